#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "qmbp/branching_law.hpp"

namespace qmbp {

/// Generator of the process restricted to states 0..cap with q_{ij} =
/// i^2 b_{j-i+1}. State 0 is absorbing. Rate mass of jumps that would land
/// above cap is dropped, consistent with the minimal solution, and recorded
/// per row as a defect.
struct TruncatedGenerator {
    int cap = 0;                   ///< largest retained state
    int band_below = 1;            ///< one subdiagonal
    int band_above = 0;            ///< J_max - 1 superdiagonals
    std::vector<double> entries;   ///< row-major band, entries[i][d] = q_{i, i-1+d}
    std::vector<double> defect;    ///< per-row dropped rate mass

    double at(int i, int j) const;
    double row_rate(int i) const;  ///< -q_{ii} = i^2 |b_1|
};

TruncatedGenerator build_generator(const BranchingLaw& law, int cap);

/// Text dump, one "i j q_ij" line per stored nonzero.
void dump_coordinate_list(const TruncatedGenerator& gen, std::ostream& os);

/// Distribution at time t of the truncated chain started in `start`,
/// propagated by uniformization with Poisson tail mass below tol. Exposed
/// mainly for tests; the decay estimator below steps a whole time grid.
std::vector<double> evolve_distribution(const BranchingLaw& law, int cap, int start, double t,
                                        double tol);

/// P_11(t) on the truncated chain; increases toward the minimal-solution
/// value as cap grows.
double transition_p11(const BranchingLaw& law, int cap, double t, double tol);

/// Survival x_1(t) = 1 - P_10(t) on the truncated chain.
double survival(const BranchingLaw& law, int cap, double t, double tol);

struct SlopeSample {
    double t;       ///< midpoint of the two-point stencil
    double slope;   ///< local slope of log survival
};

struct DecayEstimate {
    enum class Method { uniformization, monte_carlo };

    double lambda_hat = 0.0;
    Method method = Method::uniformization;
    double window_lo = 0.0, window_hi = 0.0;  ///< fit window in time
    int cap = 0;            ///< truncation level used for the accepted estimate
    int n_paths = 0;        ///< Monte Carlo only
    double stderr_est = 0.0;  ///< Monte Carlo only
    std::vector<SlopeSample> slope_series;  ///< slope-stability diagnostics
    bool stable_window = false;  ///< a window satisfying the 2% criterion was found
    double lambda_hat_coarse = 0.0;  ///< estimate at cap/2, for the doubling check
    bool cap_converged = false;      ///< cap vs cap/2 estimates agree within 1%
};

/// Fit -d/dt log x_1(t) over the largest window of the time grid on which the
/// local two-point slopes stay within 2% relative total variation, by least
/// squares on (t, log x_1). Runs the fit at cap and 2*cap and accepts when
/// the two agree within 1%; the returned estimate is the 2*cap one.
DecayEstimate estimate_decay_uniformization(const BranchingLaw& law, int cap,
                                            std::span<const double> t_grid, double tol);

struct SurvivalSample {
    double t;
    double survival;
    double stderr_est;
};

struct GillespieCurve {
    std::vector<SurvivalSample> samples;
    int n_paths = 0;
    std::uint64_t seed = 0;
    bool state_cap_hit = false;  ///< some path was censored at the state cap
};

/// Stochastic simulation of the jump chain: holding time in state i is
/// exponential with rate i^2 |b_1|; the jump goes down one with probability
/// b_0/|b_1| or up k-1 with probability b_k/|b_1|. Paths are seeded by a
/// counter scheme on (seed, path index), so the output is reproducible
/// independent of evaluation order.
GillespieCurve gillespie_paths(const BranchingLaw& law, int initial_state,
                               std::span<const double> sample_times, int n_paths,
                               std::uint64_t seed);

}  // namespace qmbp
