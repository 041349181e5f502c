#pragma once

#include <functional>
#include <vector>

#include "qmbp/branching_law.hpp"
#include "qmbp/hardy.hpp"

namespace qmbp {

/// Symmetric tridiagonal generalized eigenproblem K v = ell M v from a
/// piecewise-linear finite element discretization. `nodes` spans the full
/// mesh including both boundary nodes; the degrees of freedom are the mesh
/// nodes minus the constrained boundary ones, in mesh order.
struct TridiagonalPair {
    std::vector<double> k_diag, k_off;
    std::vector<double> m_diag, m_off;
    std::vector<double> nodes;
    bool left_constrained = false;
    bool right_constrained = true;

    std::size_t size() const { return k_diag.size(); }
};

/// Mesh on [eps_l, 1 - eps_r] with n interior nodes, spaced log-uniformly in
/// the distance to the nearer endpoint (half the elements per side). This
/// keeps the per-element variation of both the 1/(1-s) weight growth near 1
/// and the logarithmic profile near 0 bounded by a constant ratio.
std::vector<double> make_graded_grid(double eps_l, double eps_r, int n);

/// Assemble stiffness Int p (g_i)'(g_j)' ds and mass Int g_i g_j w ds on the
/// given mesh with 12-point Gauss-Legendre per element. Boundary handling per
/// flags: a constrained end drops its node from the trial space (zero value),
/// a free end keeps the boundary half-hat as a degree of freedom.
TridiagonalPair assemble_general(const std::function<double(double)>& p,
                                 const std::function<double(double)>& w,
                                 std::vector<double> nodes, bool left_constrained,
                                 bool right_constrained);

/// Discretization of the decay-rate eigenproblem for a subcritical law:
/// p(s) = s, w(s) = 1/((1-s) A(s)) on [eps_l, 1-eps_r]. The left end keeps
/// its boundary value free, matching the natural condition s y'(s) -> 0
/// there; the right end is constrained to zero. Extending a trial function
/// constantly to the left of eps_l and by zero to the right of 1-eps_r only
/// lowers its Rayleigh quotient, so the discrete minimum is an upper bound
/// on the infimum over the full interval.
TridiagonalPair assemble(const BranchingLaw& law, double eps_l, double eps_r, int n);

struct SmallestEig {
    double ell = 0.0;
    std::vector<double> vec;   ///< M-normalized, one-signed (positive)
    double residual = 0.0;     ///< ||K v - ell M v|| / ||M v||
    int iterations = 0;
};

/// Smallest generalized eigenvalue by pencil bisection on the Sturm count
/// (signs of the LDL^T pivots of K - sigma M) followed by shifted inverse
/// iteration for the eigenvector and a Rayleigh-quotient polish.
SmallestEig smallest_eig(const TridiagonalPair& sys);

struct EigenRefineStep {
    double eps_left, eps_right;
    int n_grid;
    double ell;
};

struct EigenResult {
    double ell0 = 0.0;
    double eps_left = 0.0, eps_right = 0.0;
    int n_grid = 0;
    std::vector<EigenRefineStep> history;
    std::vector<CurvePoint> eigfun;  ///< (s, phi0), normalized to unit weighted L2 norm
    bool converged = false;
};

/// Refinement schedule eps = 1e-2 ... 1e-8 (both ends) with n = 256 * 2^k,
/// stopped early once successive estimates agree to target_rel_tol. Returns
/// the last (finest) estimate; `converged` records whether the target was
/// met before the schedule ran out.
EigenResult refine(const BranchingLaw& law, double target_rel_tol = 1e-8);

}  // namespace qmbp
