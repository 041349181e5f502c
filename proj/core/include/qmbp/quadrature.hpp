#pragma once

#include <functional>
#include <span>

namespace qmbp::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;  ///< estimated absolute error
    int evaluations = 0;
    bool converged = false;
};

/// Globally adaptive Gauss-Kronrod (G7, K15) integration of f over [a, b].
/// Panels are split worst-error-first until the accumulated error estimate
/// drops below max(abs_tol, rel_tol * |integral|) or max_panels is reached.
Result integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                 double abs_tol = 0.0, int max_panels = 4000);

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
/// Computed once per order and cached; n must be in [1, 64].
struct GaussRule {
    std::span<const double> nodes;
    std::span<const double> weights;
};
GaussRule gauss_legendre(int n);

/// Fixed-order Gauss-Legendre approximation of the integral of f over [a, b].
double gauss_legendre(const std::function<double(double)>& f, double a, double b, int n);

}  // namespace qmbp::quad
