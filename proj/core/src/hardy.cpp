#include "qmbp/hardy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qmbp/errors.hpp"
#include "qmbp/quadrature.hpp"

namespace qmbp {

namespace {

constexpr double kLowerCutoff = 1e-300;
constexpr double kUpperCutoff = 1.0 - 1e-16;
constexpr double kGoldenTol = 1e-10;

// Data for evaluating phi_P(s) = (-log s) Int_0^s dr/((1-r) P(r)).
//
// With g_m = sum of the P-coefficients above index m, the identity
// P(1) - P(r) = (1-r) * sum_m g_m r^m makes the split integrand
// [1/P(r) - 1/P(1)]/(1-r) = g(r)/(P(1) P(r)) exactly, removing the
// removable point at r = 1 from the quadrature.
struct PhiEvaluator {
    Polynomial p;
    Polynomial g;
    double p_at_1;

    explicit PhiEvaluator(const Polynomial& poly) : p(poly) {
        auto c = poly.coeffs();
        std::vector<double> gc(c.size() > 1 ? c.size() - 1 : 1, 0.0);
        double tail = 0.0;
        for (std::size_t m = c.size(); m-- > 1;) {
            tail += c[m];
            gc[m - 1] = tail;
        }
        g = Polynomial(std::move(gc));
        p_at_1 = poly.value(1.0);
    }

    struct IntegralValue {
        double value;
        double error;
        bool converged;
    };

    IntegralValue integral(double s, double rel_tol) const {
        const auto f = [this](double r) { return g.value(r) / (p_at_1 * p.value(r)); };
        const double log_part = -std::log1p(-s) / p_at_1;
        quad::Result smooth = quad::integrate(f, 0.0, s, rel_tol, 0.0);
        // The log part and the smooth part cancel when P(1) is small; in that
        // case the error target must be absolute, relative to the difference.
        const double target = rel_tol * std::abs(log_part + smooth.value);
        if (smooth.error > target && target > 0.0)
            smooth = quad::integrate(f, 0.0, s, 0.0, target);
        return {log_part + smooth.value, smooth.error, smooth.converged};
    }

    double phi(double s, double rel_tol, double* err_out = nullptr) const {
        if (s <= kLowerCutoff || s >= kUpperCutoff) {
            if (err_out) *err_out = 0.0;
            return 0.0;
        }
        const double neg_log_s = -std::log(s);
        const IntegralValue integ = integral(s, rel_tol);
        if (err_out) *err_out = neg_log_s * integ.error;
        return neg_log_s * integ.value;
    }
};

std::vector<double> scan_grid() {
    std::vector<double> grid;
    grid.reserve(600);
    for (int k = 40; k >= 1; --k) grid.push_back(std::ldexp(1.0, -k));
    const double right = 1.0 - std::ldexp(1.0, -12);
    for (int i = 1; i < 512; ++i) grid.push_back(0.5 + (right - 0.5) * i / 511.0);
    for (int k = 13; k <= 40; ++k) grid.push_back(1.0 - std::ldexp(1.0, -k));
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

// Golden-section maximization on [lo, hi]; deterministic, ~log_phi((hi-lo)/tol)
// evaluations. Returns the best probed point.
template <typename F>
void golden_max(F&& f, double lo, double hi, double tol, double& best_x, double& best_v) {
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > tol) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    if (f1 >= f2) {
        best_x = x1;
        best_v = f1;
    } else {
        best_x = x2;
        best_v = f2;
    }
}

}  // namespace

PhiSupremum phi_supremum(const Polynomial& positive_part, double rel_tol) {
    const PhiEvaluator eval(positive_part);
    const std::vector<double> grid = scan_grid();

    PhiSupremum result;
    result.curve.reserve(grid.size());
    std::size_t best = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = eval.phi(grid[i], rel_tol);
        result.curve.push_back({grid[i], v});
        if (v > result.curve[best].phi) best = i;
    }
    if (best == 0 || best + 1 == grid.size())
        throw Error(errc::maximizer_at_boundary,
                    "best grid sample at s = " + std::to_string(grid[best]));

    double bx = grid[best], bv = result.curve[best].phi;
    golden_max([&](double s) { return eval.phi(s, rel_tol); }, grid[best - 1], grid[best + 1],
               kGoldenTol, bx, bv);
    if (bv < result.curve[best].phi) {
        bx = grid[best];
        bv = result.curve[best].phi;
    }
    result.value = bv;
    result.abscissa = bx;
    eval.phi(bx, rel_tol, &result.quad_err);

    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        if (i == best) continue;
        const double v = result.curve[i].phi;
        if (v >= result.curve[i - 1].phi && v >= result.curve[i + 1].phi &&
            v >= result.value - 1e-9)
            result.rival_maxima.push_back(grid[i]);
    }
    return result;
}

double integral_I(const BranchingLaw& law, double s, double rel_tol) {
    law.require_subcritical("integral_I");
    if (!(s > 0.0 && s < 1.0))
        throw Error(errc::bad_parameters, "integral_I needs s in (0,1), got " + std::to_string(s));
    const PhiEvaluator eval(law.a_series().poly);
    const PhiEvaluator::IntegralValue integ = eval.integral(s, rel_tol);
    if (!integ.converged)
        throw Error(errc::tolerance_not_met,
                    "quadrature error " + std::to_string(integ.error) + " at s = " +
                        std::to_string(s));
    return integ.value;
}

double phi(const BranchingLaw& law, double s, double rel_tol) {
    law.require_subcritical("phi");
    return PhiEvaluator(law.a_series().poly).phi(s, rel_tol);
}

HardyResult hardy_index(const BranchingLaw& law, double rel_tol) {
    law.require_subcritical("hardy_index");
    PhiSupremum sup = phi_supremum(law.a_series().poly, rel_tol);
    HardyResult result;
    result.d2 = sup.value;
    result.s_star = sup.abscissa;
    result.curve = std::move(sup.curve);
    result.quad_err = sup.quad_err;
    result.lambda_lo = 1.0 / (4.0 * result.d2);
    result.lambda_hi = 1.0 / result.d2;
    result.rival_maxima = std::move(sup.rival_maxima);
    return result;
}

double closed_form_bd(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0) || !(b < a))
        throw Error(errc::bad_parameters,
                    "closed_form_bd needs a > b > 0, got a = " + std::to_string(a) +
                        ", b = " + std::to_string(b));
    const double log_term = std::log1p(std::sqrt(1.0 - b / a));
    return log_term * log_term / (a - b);
}

}  // namespace qmbp
