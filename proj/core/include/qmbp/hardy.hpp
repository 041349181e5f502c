#pragma once

#include <vector>

#include "qmbp/branching_law.hpp"
#include "qmbp/polynomial.hpp"

namespace qmbp {

/// A point on the phi curve.
struct CurvePoint {
    double s;
    double phi;
};

/// Supremum of the weighted log-integral
///   phi_P(s) = (-log s) * Int_0^s dr / ((1-r) P(r))
/// for a polynomial P strictly positive on [0, 1]. The curve holds the grid
/// scan; rival_maxima lists abscissas of grid-local maxima whose value is
/// within 1e-9 of the best one (the maximizer itself excluded).
struct PhiSupremum {
    double value = 0.0;
    double abscissa = 0.0;
    double quad_err = 0.0;
    std::vector<CurvePoint> curve;
    std::vector<double> rival_maxima;
};

/// Grid scan (geometric toward both endpoints, uniform 512 points on the
/// middle) followed by golden-section refinement of the bracketed best sample
/// to abscissa tolerance 1e-10. Throws Error{maximizer_at_boundary} if the
/// best sample sits on the first or last grid point, which cannot happen for
/// a valid positive P since phi_P vanishes at both endpoints.
PhiSupremum phi_supremum(const Polynomial& positive_part, double rel_tol);

/// Int_0^s dr/B(r) with the singular factor integrated analytically:
///   Int_0^s dr/((1-r)A(r)) = -log(1-s)/A(1) + Int_0^s [1/A(r) - 1/A(1)]/(1-r) dr,
/// where the remaining integrand is a smooth rational function.
double integral_I(const BranchingLaw& law, double s, double rel_tol = 1e-10);

/// phi(s) = (-log s) * integral_I(s). Returns exactly 0 for s below 1e-300 or
/// above 1 - 1e-16, matching the vanishing boundary limits.
double phi(const BranchingLaw& law, double s, double rel_tol = 1e-10);

struct HardyResult {
    double d2 = 0.0;          ///< sup of phi: the decay-parameter functional
    double s_star = 0.0;      ///< maximizing abscissa
    std::vector<CurvePoint> curve;
    double quad_err = 0.0;    ///< estimated absolute quadrature error at the maximizer
    double lambda_lo = 0.0;   ///< 1/(4 d2)
    double lambda_hi = 0.0;   ///< 1/d2
    std::vector<double> rival_maxima;  ///< diagnostic: near-best grid-local maxima
};

/// Maximize phi over (0, 1). Requires a subcritical law.
HardyResult hardy_index(const BranchingLaw& law, double rel_tol = 1e-10);

/// Exact supremum for the two-rate family with B(s) = (1-s)(a - b s):
///   [log(1 + sqrt(1 - b/a))]^2 / (a - b), valid for a > b > 0.
double closed_form_bd(double a, double b);

}  // namespace qmbp
