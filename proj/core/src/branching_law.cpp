#include "qmbp/branching_law.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qmbp/errors.hpp"

namespace qmbp {

const char* to_string(errc code) noexcept {
    switch (code) {
        case errc::negative_rate: return "NegativeRate";
        case errc::zero_death_rate: return "ZeroDeathRate";
        case errc::no_birth_mass: return "NoBirthMass";
        case errc::conservation_violation: return "ConservationViolation";
        case errc::not_subcritical: return "NotSubcritical";
        case errc::bad_parameters: return "BadParameters";
        case errc::tolerance_not_met: return "ToleranceNotMet";
        case errc::maximizer_at_boundary: return "MaximizerAtBoundary";
        case errc::bad_truncation: return "BadTruncation";
        case errc::no_convergence: return "NoConvergence";
        case errc::invalid_seed_config: return "InvalidSeedConfig";
        case errc::config_parse: return "ConfigParse";
        case errc::io_error: return "IoError";
    }
    return "UnknownError";
}

namespace {
constexpr double kConservationTol = 1e-12;
}

BranchingLaw BranchingLaw::validate(std::span<const double> raw_rates) {
    if (raw_rates.empty() || raw_rates[0] <= 0.0)
        throw Error(errc::zero_death_rate, "b_0 must be strictly positive");
    for (std::size_t j = 2; j < raw_rates.size(); ++j) {
        if (raw_rates[j] < 0.0)
            throw Error(errc::negative_rate,
                        "b_" + std::to_string(j) + " = " + std::to_string(raw_rates[j]));
    }
    double birth_mass = 0.0;
    for (std::size_t j = 2; j < raw_rates.size(); ++j) birth_mass += raw_rates[j];
    if (raw_rates.size() < 3 || birth_mass <= 0.0)
        throw Error(errc::no_birth_mass, "sum of b_j for j >= 2 must be positive");
    double off_diag = raw_rates[0] + birth_mass;
    if (std::abs(raw_rates[1] + off_diag) > kConservationTol)
        throw Error(errc::conservation_violation,
                    "b_1 = " + std::to_string(raw_rates[1]) + " but -(sum of other rates) = " +
                        std::to_string(-off_diag));

    BranchingLaw law;
    law.b_.assign(raw_rates.begin(), raw_rates.end());
    law.b_poly_ = Polynomial(law.b_);
    law.birth_mass_ = birth_mass;
    law.mean_death_ = law.b_[0];
    double mb = 0.0, bpp = 0.0;
    for (std::size_t j = 2; j < law.b_.size(); ++j) {
        mb += (static_cast<double>(j) - 1.0) * law.b_[j];
        bpp += static_cast<double>(j) * (static_cast<double>(j) - 1.0) * law.b_[j];
    }
    law.mean_birth_ = mb;
    law.bsecond1_ = bpp;
    law.bprime1_ = mb - law.mean_death_;

    std::vector<double> a(law.b_.size() - 1);
    double acc = 0.0;
    for (std::size_t n = 0; n + 1 < law.b_.size(); ++n) {
        acc += law.b_[n];
        a[n] = acc;
    }
    law.a_series_ = ASeries{Polynomial(std::move(a))};
    return law;
}

void BranchingLaw::require_subcritical(const char* who) const {
    if (!subcritical())
        throw Error(errc::not_subcritical,
                    std::string(who) + " requires B'(1) < 0, got B'(1) = " +
                        std::to_string(bprime1_));
}

namespace {

// Bisection for a sign change of f on [lo, hi]; f(lo) and f(hi) must differ
// in sign. Returns the midpoint of the final bracket of width <= tol.
template <typename F>
double bisect(F&& f, double lo, double hi, double tol) {
    double flo = f(lo);
    for (int iter = 0; iter < 200 && hi - lo > tol; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((flo <= 0.0) == (fm <= 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

RootReport roots_of_b(const BranchingLaw& law, double a_lo, double a_hi) {
    RootReport report;
    if (law.bprime1() > 0.0) {
        // B(0) = b_0 > 0 and B < 0 just left of 1, so one interior root.
        const double q = bisect([&](double s) { return law.B(s); }, 0.0, 1.0, 1e-12);
        report.b_roots = {q, 1.0};
    } else {
        report.b_roots = {1.0};
        report.double_root_at_one = law.critical();
    }
    // A has coefficients a_0 > 0 and a_n <= 0 for n >= 1, hence at most one
    // positive real root; a sign-change scan is exact enough for reporting.
    if (a_hi > a_lo) {
        const int kScan = 2048;
        double prev_s = a_lo, prev_v = law.A(a_lo);
        for (int i = 1; i <= kScan; ++i) {
            const double s = a_lo + (a_hi - a_lo) * i / kScan;
            const double v = law.A(s);
            if (prev_v == 0.0) {
                report.a_roots.push_back(prev_s);
            } else if ((prev_v < 0.0) != (v < 0.0)) {
                report.a_roots.push_back(
                    bisect([&](double x) { return law.A(x); }, prev_s, s, 1e-13));
            }
            prev_s = s;
            prev_v = v;
        }
        if (prev_v == 0.0) report.a_roots.push_back(prev_s);
    }
    return report;
}

BranchingLaw birth_death_law(double a, double b) {
    const double rates[3] = {a, -(a + b), b};
    return BranchingLaw::validate(rates);
}

BranchingLaw skip2_law(double b0, double b2, double b3) {
    const double rates[4] = {b0, -(b0 + b2 + b3), b2, b3};
    return BranchingLaw::validate(rates);
}

}  // namespace qmbp
