#include "qmbp/ctmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <string>

#include "qmbp/errors.hpp"

namespace qmbp {

namespace {

constexpr double kSlopeWindowRelVariation = 0.02;
constexpr double kCapAgreementRelTol = 0.01;
constexpr int kStateCap = 1 << 20;

struct PoissonWindow {
    long k_lo = 0;
    std::vector<double> weights;  ///< weights[k - k_lo]
    double tail = 0.0;            ///< 1 - sum of retained weights
};

// Poisson(mu) weights around the mode, cut at 1e-17 of the peak and then
// normalized: the mode weight through lgamma carries a relative error of
// order mu * eps, while the up/down recursion keeps the ratios accurate, so
// normalization removes the scale error. The reported tail is a geometric
// bound on the true mass outside the retained window.
PoissonWindow poisson_window(double mu, double tol) {
    PoissonWindow win;
    if (mu <= 0.0) {
        win.weights = {1.0};
        return win;
    }
    const long mode = static_cast<long>(mu);
    const double log_peak = mode * std::log(mu) - mu - std::lgamma(static_cast<double>(mode) + 1.0);
    const double peak = std::exp(log_peak);
    const double cut = peak * 1e-17;

    std::vector<double> down;
    double w = peak;
    long k = mode;
    while (k > 0 && w > cut) {
        w *= static_cast<double>(k) / mu;
        down.push_back(w);
        --k;
    }
    win.k_lo = k;
    win.weights.assign(down.rbegin(), down.rend());
    win.weights.push_back(peak);
    w = peak;
    k = mode;
    while (w > cut) {
        w *= mu / static_cast<double>(k + 1);
        win.weights.push_back(w);
        ++k;
    }
    const long k_hi = k;

    double sum = 0.0;
    for (double x : win.weights) sum += x;
    double tail_bound = 0.0;
    const double r_up = mu / static_cast<double>(k_hi + 2);
    if (r_up < 1.0) tail_bound += win.weights.back() * r_up / (1.0 - r_up);
    if (win.k_lo > 0) {
        const double r_down = static_cast<double>(win.k_lo) / mu;
        if (r_down < 1.0) tail_bound += win.weights.front() * r_down / (1.0 - r_down);
    }
    for (double& x : win.weights) x /= sum;
    win.tail = tail_bound / sum;
    if (win.tail > tol)
        throw Error(errc::tolerance_not_met,
                    "Poisson tail " + std::to_string(win.tail) + " exceeds tolerance");
    return win;
}

// One uniformization step: advances the distribution in place by time dt.
// P = I + Q/Lambda is applied k times with Poisson(Lambda dt) mixing. The
// active window [0, top] tracks the support to keep the cost proportional to
// the occupied states rather than the cap.
class Uniformizer {
  public:
    Uniformizer(const BranchingLaw& law, int cap)
        : gen_(build_generator(law, cap)),
          lambda_(gen_.row_rate(cap) > 0.0 ? gen_.row_rate(cap) : 1.0) {}

    const TruncatedGenerator& generator() const { return gen_; }
    double uniformization_rate() const { return lambda_; }

    void step(std::vector<double>& p, int& top, double dt, double tol) const {
        if (dt <= 0.0) return;
        const PoissonWindow win = poisson_window(lambda_ * dt, tol);
        std::vector<double> acc(p.size(), 0.0);
        std::vector<double> next(p.size(), 0.0);
        const long k_hi = win.k_lo + static_cast<long>(win.weights.size()) - 1;
        for (long k = 0; k <= k_hi; ++k) {
            if (k >= win.k_lo) {
                const double w = win.weights[k - win.k_lo];
                for (int i = 0; i <= top; ++i) acc[i] += w * p[i];
            }
            if (k == k_hi) break;
            apply_p(p, next, top);
            p.swap(next);
        }
        p.swap(acc);
        trim(p, top);
    }

  private:
    void apply_p(const std::vector<double>& v, std::vector<double>& out, int& top) const {
        const int cap = gen_.cap;
        const int width = gen_.band_below + gen_.band_above + 1;
        std::fill(out.begin(), out.begin() + std::min<std::size_t>(out.size(), top + gen_.band_above + 1), 0.0);
        out[0] = v[0];
        for (int i = 1; i <= top; ++i) {
            const double vi = v[i];
            if (vi == 0.0) continue;
            out[i] += vi;  // identity part
            const double* row = gen_.entries.data() + static_cast<std::size_t>(i) * width;
            const int j_hi = std::min(cap, i + gen_.band_above);
            for (int j = i - 1; j <= j_hi; ++j) out[j] += vi * row[j - i + 1] / lambda_;
        }
        top = std::min(cap, top + gen_.band_above);
        trim(out, top);
    }

    // Mass below 1e-120 cannot influence any supported tolerance: even
    // summed over every step and state it stays far under 1e-60.
    static void trim(std::vector<double>& v, int& top) {
        while (top > 1 && std::abs(v[top]) < 1e-120) --top;
    }

    TruncatedGenerator gen_;
    double lambda_;
};

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct WindowFit {
    std::size_t lo = 0, hi = 0;  ///< slope indices, inclusive
    bool found = false;
};

// Largest window of consecutive slopes whose total variation stays within 2%
// of the window median (in absolute value).
WindowFit find_stable_window(const std::vector<double>& slopes) {
    WindowFit best;
    const std::size_t n = slopes.size();
    for (std::size_t i = 0; i < n; ++i) {
        double w_min = slopes[i], w_max = slopes[i];
        for (std::size_t j = i; j < n; ++j) {
            w_min = std::min(w_min, slopes[j]);
            w_max = std::max(w_max, slopes[j]);
            std::vector<double> window(slopes.begin() + i, slopes.begin() + j + 1);
            std::nth_element(window.begin(), window.begin() + window.size() / 2, window.end());
            const double median = window[window.size() / 2];
            if (w_max - w_min > kSlopeWindowRelVariation * std::abs(median)) break;
            if (!best.found || j - i > best.hi - best.lo) {
                best.lo = i;
                best.hi = j;
                best.found = true;
            }
        }
    }
    return best;
}

struct SingleCapFit {
    double lambda = 0.0;
    double t_lo = 0.0, t_hi = 0.0;
    std::vector<SlopeSample> slopes;
    bool stable = false;
};

SingleCapFit fit_decay(const BranchingLaw& law, int cap, std::span<const double> t_grid,
                       double tol) {
    Uniformizer uni(law, cap);
    std::vector<double> p(static_cast<std::size_t>(cap) + 1, 0.0);
    p[1] = 1.0;
    int top = 1;
    std::vector<double> ts, logx;
    double t_prev = 0.0;
    for (double t : t_grid) {
        uni.step(p, top, t - t_prev, tol);
        t_prev = t;
        const double x = 1.0 - p[0];
        if (x <= 0.0) break;
        ts.push_back(t);
        logx.push_back(std::log(x));
    }
    SingleCapFit fit;
    if (ts.size() < 3) return fit;
    std::vector<double> slopes(ts.size() - 1);
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        slopes[i] = (logx[i + 1] - logx[i]) / (ts[i + 1] - ts[i]);
        fit.slopes.push_back({0.5 * (ts[i] + ts[i + 1]), slopes[i]});
    }
    const WindowFit window = find_stable_window(slopes);
    if (!window.found || window.hi - window.lo + 1 < 3) {
        // No stable window: report the last local slope so that the caller
        // still sees a number, flagged as unstable.
        fit.lambda = -slopes.back();
        fit.t_lo = ts[ts.size() - 2];
        fit.t_hi = ts.back();
        return fit;
    }
    // Least squares over the sample points spanned by the slope window.
    const std::size_t a = window.lo, b = window.hi + 1;
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    const double n = static_cast<double>(b - a + 1);
    for (std::size_t i = a; i <= b; ++i) {
        st += ts[i];
        sy += logx[i];
        stt += ts[i] * ts[i];
        sty += ts[i] * logx[i];
    }
    fit.lambda = -(n * sty - st * sy) / (n * stt - st * st);
    fit.t_lo = ts[a];
    fit.t_hi = ts[b];
    fit.stable = true;
    return fit;
}

}  // namespace

double TruncatedGenerator::at(int i, int j) const {
    if (i < 0 || i > cap || j < i - 1 || j > std::min(cap, i + band_above)) return 0.0;
    if (i == 0) return 0.0;
    const int width = band_below + band_above + 1;
    return entries[static_cast<std::size_t>(i) * width + (j - i + 1)];
}

double TruncatedGenerator::row_rate(int i) const {
    return i <= 0 ? 0.0 : -at(i, i);
}

TruncatedGenerator build_generator(const BranchingLaw& law, int cap) {
    if (cap < 10) throw Error(errc::bad_parameters, "cap must be at least 10");
    TruncatedGenerator gen;
    gen.cap = cap;
    gen.band_above = static_cast<int>(law.max_index()) - 1;
    const int width = gen.band_below + gen.band_above + 1;
    gen.entries.assign(static_cast<std::size_t>(cap + 1) * width, 0.0);
    gen.defect.assign(static_cast<std::size_t>(cap + 1), 0.0);
    for (int i = 1; i <= cap; ++i) {
        const double scale = static_cast<double>(i) * static_cast<double>(i);
        double* row = gen.entries.data() + static_cast<std::size_t>(i) * width;
        double dropped = 0.0;
        for (std::size_t k = 0; k <= law.max_index(); ++k) {
            const int j = i + static_cast<int>(k) - 1;
            const double rate = scale * law.rate(k);
            if (j <= cap)
                row[k] = rate;
            else
                dropped += rate;
        }
        gen.defect[i] = dropped;
    }
    return gen;
}

void dump_coordinate_list(const TruncatedGenerator& gen, std::ostream& os) {
    const int width = gen.band_below + gen.band_above + 1;
    for (int i = 1; i <= gen.cap; ++i) {
        for (int d = 0; d < width; ++d) {
            const int j = i - 1 + d;
            if (j < 0 || j > gen.cap) continue;
            const double q = gen.entries[static_cast<std::size_t>(i) * width + d];
            if (q != 0.0) os << i << ' ' << j << ' ' << q << '\n';
        }
    }
}

std::vector<double> evolve_distribution(const BranchingLaw& law, int cap, int start, double t,
                                        double tol) {
    if (t < 0.0) throw Error(errc::bad_parameters, "time must be nonnegative");
    if (start < 0 || start > cap) throw Error(errc::bad_parameters, "start state out of range");
    Uniformizer uni(law, cap);
    std::vector<double> p(static_cast<std::size_t>(cap) + 1, 0.0);
    p[start] = 1.0;
    int top = std::max(1, start);
    uni.step(p, top, t, tol);
    return p;
}

double transition_p11(const BranchingLaw& law, int cap, double t, double tol) {
    return evolve_distribution(law, cap, 1, t, tol)[1];
}

double survival(const BranchingLaw& law, int cap, double t, double tol) {
    return 1.0 - evolve_distribution(law, cap, 1, t, tol)[0];
}

DecayEstimate estimate_decay_uniformization(const BranchingLaw& law, int cap,
                                            std::span<const double> t_grid, double tol) {
    law.require_subcritical("estimate_decay_uniformization");
    if (t_grid.size() < 8)
        throw Error(errc::bad_parameters, "time grid needs at least 8 points");
    const SingleCapFit coarse = fit_decay(law, cap, t_grid, tol);
    const SingleCapFit fine = fit_decay(law, 2 * cap, t_grid, tol);

    DecayEstimate est;
    est.method = DecayEstimate::Method::uniformization;
    est.lambda_hat = fine.lambda;
    est.lambda_hat_coarse = coarse.lambda;
    est.cap = 2 * cap;
    est.window_lo = fine.t_lo;
    est.window_hi = fine.t_hi;
    est.slope_series = fine.slopes;
    est.stable_window = fine.stable && coarse.stable;
    est.cap_converged =
        std::abs(fine.lambda - coarse.lambda) <= kCapAgreementRelTol * std::abs(fine.lambda);
    return est;
}

GillespieCurve gillespie_paths(const BranchingLaw& law, int initial_state,
                               std::span<const double> sample_times, int n_paths,
                               std::uint64_t seed) {
    if (initial_state < 1) throw Error(errc::invalid_seed_config, "initial state must be >= 1");
    if (n_paths < 1) throw Error(errc::invalid_seed_config, "need at least one path");
    if (sample_times.empty() || !std::is_sorted(sample_times.begin(), sample_times.end()))
        throw Error(errc::invalid_seed_config, "sample times must be sorted and non-empty");

    const double total_rate = -law.rate(1);
    std::vector<double> jump_cdf;  // cumulative over k = 0, 2, 3, ...
    std::vector<int> jump_delta;
    double acc = 0.0;
    for (std::size_t k = 0; k <= law.max_index(); ++k) {
        if (k == 1) continue;
        acc += law.rate(k) / total_rate;
        jump_cdf.push_back(acc);
        jump_delta.push_back(static_cast<int>(k) - 1);
    }
    jump_cdf.back() = 1.0;

    GillespieCurve curve;
    curve.n_paths = n_paths;
    curve.seed = seed;
    const double t_max = sample_times.back();
    std::vector<long> alive(sample_times.size(), 0);

    for (int path = 0; path < n_paths; ++path) {
        std::uint64_t stream = seed ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(path) + 1));
        std::mt19937_64 rng(splitmix64(stream));
        int state = initial_state;
        double t = 0.0;
        double absorbed_at = std::numeric_limits<double>::infinity();
        while (state > 0) {
            const double rate = static_cast<double>(state) * static_cast<double>(state) * total_rate;
            t += -std::log1p(-uniform01(rng)) / rate;
            if (t > t_max) break;
            const double u = uniform01(rng);
            std::size_t pick = 0;
            while (pick + 1 < jump_cdf.size() && u > jump_cdf[pick]) ++pick;
            state += jump_delta[pick];
            if (state == 0) absorbed_at = t;
            if (state >= kStateCap) {
                curve.state_cap_hit = true;
                break;  // censored: counted as surviving the whole horizon
            }
        }
        for (std::size_t i = 0; i < sample_times.size(); ++i)
            if (sample_times[i] < absorbed_at) ++alive[i];
    }

    curve.samples.reserve(sample_times.size());
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
        const double p = static_cast<double>(alive[i]) / n_paths;
        curve.samples.push_back(
            {sample_times[i], p, std::sqrt(p * (1.0 - p) / static_cast<double>(n_paths))});
    }
    return curve;
}

}  // namespace qmbp
