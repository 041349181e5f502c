#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qmbp/branching_law.hpp"

namespace qmbp {

/// One closed-form two-sided bound on the supremum d2 of phi, together with
/// the implied interval for the decay parameter. A missing side means the
/// construction behind it is inapplicable for this law (the reason is spelled
/// out in notes); `applicable` is true when at least one side is present.
struct BoundsEntry {
    std::string name;
    std::optional<double> d2_lo;
    std::optional<double> d2_hi;
    std::optional<double> lambda_lo;  ///< 1/(4 d2_hi) when d2_hi present
    std::optional<double> lambda_hi;  ///< 1/d2_lo when d2_lo present
    bool applicable = false;
    std::string notes;
};

/// All entries plus the auxiliary scalars of the line/quadratic envelopes.
/// kappa1 = m_b/b_0 and kappa2 = m_b/(A(s0) + s0 m_b) are the slope/intercept
/// ratios of the secant and tangent lines; since the tangent intercept is at
/// least b_0, kappa2 <= kappa1 always. kappa1p = B''(1)/(2 b_0) and kappa2p =
/// (sum of b_j, j >= 2)/b_0 are the endpoint-slope ratios.
struct BoundsReport {
    std::vector<BoundsEntry> entries;
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    double s0 = 0.0;       ///< tangency point with A'(s0) = -m_b
    double kappa1p = 0.0;
    double kappa2p = 0.0;
    double s1 = 0.0;       ///< maximizer of the lower quadratic-envelope phi
    double s2 = 0.0;       ///< maximizer of the upper quadratic-envelope phi

    const BoundsEntry* find(const std::string& name) const;
};

/// Constant envelopes b_0 - m_b <= A <= b_0:
///   (log 2)^2/b_0 <= d2 <= (log 2)^2/(b_0 - m_b).
BoundsEntry constant_envelope_bounds(const BranchingLaw& law);

/// Secant line (below A) and tangent line at s0 (above A). Both envelopes are
/// of the exactly solvable two-rate form, so both sides evaluate in closed
/// form. For a two-rate law the lines coincide with A and the entry collapses
/// to the exact value; s0 is reported as 1 in that degenerate case.
BoundsEntry line_envelope_bounds(const BranchingLaw& law, double* s0_out = nullptr);

/// Lines with the extreme slopes A'(0) and A'(1). The A'(0) line lies above A
/// and always yields the lower side; the A'(1) line lies below A and yields
/// the upper side only when B''(1) < 2 b_0 (otherwise it crosses zero inside
/// the unit interval and the closed form does not apply).
BoundsEntry slope_envelope_bounds(const BranchingLaw& law);

/// Parabolas through b_0 with slope b_0 + b_1 and curvature A''(0) (above A,
/// lower side) respectively A''(1) (below A, upper side). Suprema computed
/// numerically with the same scan-plus-golden-section machinery as the main
/// pipeline. Upper side requires the lower parabola to stay positive on (0,1].
BoundsEntry quadratic_envelope_bounds(const BranchingLaw& law, double* s1_out = nullptr,
                                      double* s2_out = nullptr);

BoundsReport all_bounds(const BranchingLaw& law);

/// Pairwise comparison of the entries' decay-parameter intervals.
struct BoundsComparison {
    struct PairVerdict {
        std::string first;
        std::string second;
        std::string tighter_lambda_upper;  ///< entry with the smaller upper bound
        std::string tighter_lambda_lower;  ///< entry with the larger lower bound
    };
    std::vector<PairVerdict> pairs;
    double best_lambda_lo = 0.0;  ///< intersection of all applicable intervals
    double best_lambda_hi = 0.0;
    double best_d2_lo = 0.0;
    double best_d2_hi = 0.0;
    bool line_upper_criterion = false;  ///< m_b < B''(1)/2
    bool line_upper_observed = false;   ///< line d2_hi < slope d2_hi observed
    bool criterion_matches = false;
};

BoundsComparison compare_bounds(const BranchingLaw& law, const BoundsReport& report);

}  // namespace qmbp
