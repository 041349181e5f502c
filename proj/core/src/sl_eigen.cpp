#include "qmbp/sl_eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qmbp/errors.hpp"
#include "qmbp/quadrature.hpp"

namespace qmbp {

namespace {

constexpr int kMassQuadOrder = 12;
constexpr double kResidualTarget = 1e-10;

// Number of eigenvalues of the pencil (K, M) strictly below sigma, from the
// inertia of K - sigma M via its LDL^T pivots.
int sturm_count(const TridiagonalPair& sys, double sigma) {
    const std::size_t n = sys.size();
    int count = 0;
    double prev_pivot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double pivot = sys.k_diag[i] - sigma * sys.m_diag[i];
        if (i > 0) {
            const double off = sys.k_off[i - 1] - sigma * sys.m_off[i - 1];
            pivot -= off * off / prev_pivot;
        }
        if (pivot == 0.0) pivot = -std::numeric_limits<double>::min();
        if (pivot < 0.0) ++count;
        prev_pivot = pivot;
    }
    return count;
}

// Solve (K - sigma M) x = rhs with partially pivoted tridiagonal LU. The
// scalar type is a template parameter: inverse iteration runs in extended
// precision, since the shift sits within 1e-14 of the eigenvalue and the
// backward error of a double solve would dominate the residual on fine
// meshes.
template <typename Scalar>
void shifted_solve(const TridiagonalPair& sys, double sigma, std::vector<Scalar>& x,
                   const std::vector<Scalar>& rhs) {
    const std::size_t n = sys.size();
    std::vector<Scalar> diag(n), lower(n > 0 ? n - 1 : 0), upper(n > 0 ? n - 1 : 0),
        upper2(n > 1 ? n - 2 : 0, Scalar(0));
    for (std::size_t i = 0; i < n; ++i)
        diag[i] = Scalar(sys.k_diag[i]) - Scalar(sigma) * Scalar(sys.m_diag[i]);
    for (std::size_t i = 0; i + 1 < n; ++i)
        lower[i] = upper[i] = Scalar(sys.k_off[i]) - Scalar(sigma) * Scalar(sys.m_off[i]);
    x = rhs;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(lower[i]) > std::abs(diag[i])) {
            std::swap(diag[i], lower[i]);
            std::swap(upper[i], diag[i + 1]);
            if (i + 2 < n) std::swap(upper2[i], upper[i + 1]);
            std::swap(x[i], x[i + 1]);
        }
        if (diag[i] == Scalar(0)) diag[i] = Scalar(std::numeric_limits<double>::min());
        const Scalar m = lower[i] / diag[i];
        diag[i + 1] -= m * upper[i];
        if (i + 2 < n) upper[i + 1] -= m * upper2[i];
        x[i + 1] -= m * x[i];
    }
    if (diag[n - 1] == Scalar(0)) diag[n - 1] = Scalar(std::numeric_limits<double>::min());
    for (std::size_t i = n; i-- > 0;) {
        Scalar v = x[i];
        if (i + 1 < n) v -= upper[i] * x[i + 1];
        if (i + 2 < n) v -= upper2[i] * x[i + 2];
        x[i] = v / diag[i];
    }
}

void mat_vec(const std::vector<double>& diag, const std::vector<double>& off,
             const std::vector<double>& v, std::vector<double>& out) {
    const std::size_t n = diag.size();
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = diag[i] * v[i];
        if (i > 0) acc += off[i - 1] * v[i - 1];
        if (i + 1 < n) acc += off[i] * v[i + 1];
        out[i] = acc;
    }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace

std::vector<double> make_graded_grid(double eps_l, double eps_r, int n) {
    if (!(eps_l > 0.0) || !(eps_r > 0.0) || !(eps_l < 0.5) || !(eps_r < 0.5) || n < 16)
        throw Error(errc::bad_truncation,
                    "need 0 < eps < 1/2 on both ends and n >= 16, got eps_l = " +
                        std::to_string(eps_l) + ", eps_r = " + std::to_string(eps_r) +
                        ", n = " + std::to_string(n));
    const int n_left = (n + 1) / 2;      // elements in [eps_l, 1/2]
    const int n_right = n + 1 - n_left;  // elements in [1/2, 1 - eps_r]
    std::vector<double> nodes;
    nodes.reserve(static_cast<std::size_t>(n) + 2);
    for (int j = 0; j <= n_left; ++j)
        nodes.push_back(eps_l * std::pow(0.5 / eps_l, static_cast<double>(j) / n_left));
    for (int j = n_right - 1; j >= 0; --j)
        nodes.push_back(1.0 - eps_r * std::pow(0.5 / eps_r, static_cast<double>(j) / n_right));
    return nodes;
}

TridiagonalPair assemble_general(const std::function<double(double)>& p,
                                 const std::function<double(double)>& w,
                                 std::vector<double> nodes, bool left_constrained,
                                 bool right_constrained) {
    const std::size_t n_nodes = nodes.size();
    if (n_nodes < 3) throw Error(errc::bad_truncation, "mesh needs at least 3 nodes");
    const std::size_t first = left_constrained ? 1 : 0;
    const std::size_t last = right_constrained ? n_nodes - 2 : n_nodes - 1;
    const std::size_t m = last - first + 1;

    TridiagonalPair sys;
    sys.k_diag.assign(m, 0.0);
    sys.k_off.assign(m - 1, 0.0);
    sys.m_diag.assign(m, 0.0);
    sys.m_off.assign(m - 1, 0.0);
    sys.left_constrained = left_constrained;
    sys.right_constrained = right_constrained;

    const quad::GaussRule rule = quad::gauss_legendre(kMassQuadOrder);
    for (std::size_t e = 0; e + 1 < n_nodes; ++e) {
        const double x0 = nodes[e], x1 = nodes[e + 1];
        const double h = x1 - x0, mid = 0.5 * (x0 + x1), half = 0.5 * h;
        double k00 = 0.0, m00 = 0.0, m01 = 0.0, m11 = 0.0;
        for (int q = 0; q < kMassQuadOrder; ++q) {
            const double s = mid + half * rule.nodes[q];
            const double wt = half * rule.weights[q];
            const double hat0 = (x1 - s) / h;
            const double hat1 = (s - x0) / h;
            const double ws = w(s);
            k00 += wt * p(s);
            m00 += wt * ws * hat0 * hat0;
            m01 += wt * ws * hat0 * hat1;
            m11 += wt * ws * hat1 * hat1;
        }
        k00 /= h * h;  // both hat slopes are +-1/h on the element
        const std::ptrdiff_t i0 = static_cast<std::ptrdiff_t>(e) - static_cast<std::ptrdiff_t>(first);
        const std::ptrdiff_t i1 = i0 + 1;
        const auto in_range = [&](std::ptrdiff_t i) {
            return i >= 0 && i < static_cast<std::ptrdiff_t>(m);
        };
        if (in_range(i0)) {
            sys.k_diag[i0] += k00;
            sys.m_diag[i0] += m00;
        }
        if (in_range(i1)) {
            sys.k_diag[i1] += k00;
            sys.m_diag[i1] += m11;
        }
        if (in_range(i0) && in_range(i1)) {
            sys.k_off[i0] += -k00;
            sys.m_off[i0] += m01;
        }
    }
    sys.nodes = std::move(nodes);
    return sys;
}

TridiagonalPair assemble(const BranchingLaw& law, double eps_l, double eps_r, int n) {
    law.require_subcritical("assemble");
    if (!(eps_l > 0.0 && eps_l < 1.0 - eps_r && eps_r > 0.0))
        throw Error(errc::bad_truncation, "truncation offsets must satisfy 0 < eps_l < 1 - eps_r < 1");
    std::vector<double> nodes = make_graded_grid(eps_l, eps_r, n);
    return assemble_general([](double s) { return s; },
                            [&law](double s) { return 1.0 / ((1.0 - s) * law.A(s)); },
                            std::move(nodes), /*left_constrained=*/false,
                            /*right_constrained=*/true);
}

SmallestEig smallest_eig(const TridiagonalPair& sys) {
    const std::size_t n = sys.size();
    if (n == 0) throw Error(errc::bad_truncation, "empty system");

    // Jacobi-equilibrate the pencil: graded meshes make the stiffness rows
    // span many orders of magnitude, which pushes the plain residual above
    // any fixed target in double precision. The congruence (D K D, D M D)
    // with D = diag(K)^{-1/2} keeps the eigenvalues and restores unit
    // diagonal scale, so the residual is measured on the scaled system.
    TridiagonalPair scaled = sys;
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = 1.0 / std::sqrt(sys.k_diag[i]);
    for (std::size_t i = 0; i < n; ++i) {
        scaled.k_diag[i] = 1.0;
        scaled.m_diag[i] = sys.m_diag[i] * d[i] * d[i];
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        scaled.k_off[i] = sys.k_off[i] * d[i] * d[i + 1];
        scaled.m_off[i] = sys.m_off[i] * d[i] * d[i + 1];
    }

    // Coordinate Rayleigh quotients bound the smallest eigenvalue from above.
    double hi = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) hi = std::min(hi, scaled.k_diag[i] / scaled.m_diag[i]);
    hi *= 1.0 + 1e-10;
    while (sturm_count(scaled, hi) < 1) hi *= 2.0;
    double lo = 0.0;
    for (int iter = 0; iter < 200 && hi - lo > 1e-14 * hi; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (sturm_count(scaled, mid) >= 1)
            hi = mid;
        else
            lo = mid;
    }

    SmallestEig out;
    std::vector<long double> v(n, 1.0L), mv(n), kv(n);
    const double shift = lo;
    const auto mat_vec_x = [n](const std::vector<double>& diag, const std::vector<double>& off,
                               const std::vector<long double>& in, std::vector<long double>& res) {
        for (std::size_t i = 0; i < n; ++i) {
            long double acc = static_cast<long double>(diag[i]) * in[i];
            if (i > 0) acc += static_cast<long double>(off[i - 1]) * in[i - 1];
            if (i + 1 < n) acc += static_cast<long double>(off[i]) * in[i + 1];
            res[i] = acc;
        }
    };
    for (int iter = 1; iter <= 60; ++iter) {
        mat_vec_x(scaled.m_diag, scaled.m_off, v, mv);
        std::vector<long double> next;
        shifted_solve(scaled, shift, next, mv);
        long double scale = 0.0L;
        for (const auto& x : next) scale += x * x;
        scale = sqrtl(scale);
        for (auto& x : next) x /= scale;
        v = std::move(next);

        mat_vec_x(scaled.k_diag, scaled.k_off, v, kv);
        mat_vec_x(scaled.m_diag, scaled.m_off, v, mv);
        long double vkv = 0.0L, vmv = 0.0L;
        for (std::size_t i = 0; i < n; ++i) {
            vkv += kv[i] * v[i];
            vmv += mv[i] * v[i];
        }
        const long double rayleigh = vkv / vmv;
        long double res = 0.0L, m_norm = 0.0L;
        for (std::size_t i = 0; i < n; ++i) {
            const long double r = kv[i] - rayleigh * mv[i];
            res += r * r;
            m_norm += mv[i] * mv[i];
        }
        out.ell = static_cast<double>(rayleigh);
        out.residual = static_cast<double>(sqrtl(res) / sqrtl(m_norm));
        out.iterations = iter;
        if (out.residual <= kResidualTarget) break;
    }
    if (out.residual > kResidualTarget)
        throw Error(errc::no_convergence,
                    "inverse iteration residual " + std::to_string(out.residual));

    // Undo the scaling, normalize to unit M-norm, keep the ground state
    // positive.
    std::vector<double> vec(n);
    for (std::size_t i = 0; i < n; ++i) vec[i] = static_cast<double>(v[i]) * d[i];
    std::vector<double> mvec;
    mat_vec(sys.m_diag, sys.m_off, vec, mvec);
    const double m_norm = std::sqrt(dot(vec, mvec));
    double mean = 0.0;
    for (double x : vec) mean += x;
    const double sign = mean >= 0.0 ? 1.0 : -1.0;
    for (auto& x : vec) x *= sign / m_norm;
    out.vec = std::move(vec);
    return out;
}

EigenResult refine(const BranchingLaw& law, double target_rel_tol) {
    law.require_subcritical("refine");
    EigenResult result;
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (int k = 0; k <= 6; ++k) {
        const double eps = std::pow(10.0, -(2 + k));
        const int n = 256 << k;
        TridiagonalPair sys = assemble(law, eps, eps, n);
        SmallestEig eig = smallest_eig(sys);
        result.history.push_back({eps, eps, n, eig.ell});
        result.ell0 = eig.ell;
        result.eps_left = result.eps_right = eps;
        result.n_grid = n;

        result.eigfun.clear();
        result.eigfun.reserve(sys.nodes.size());
        std::size_t dof = 0;
        for (std::size_t i = 0; i < sys.nodes.size(); ++i) {
            const bool constrained = (i == 0 && sys.left_constrained) ||
                                     (i + 1 == sys.nodes.size() && sys.right_constrained);
            result.eigfun.push_back({sys.nodes[i], constrained ? 0.0 : eig.vec[dof++]});
        }

        if (!std::isnan(prev) && std::abs(prev - eig.ell) <= target_rel_tol * eig.ell) {
            result.converged = true;
            break;
        }
        prev = eig.ell;
    }
    return result;
}

}  // namespace qmbp
