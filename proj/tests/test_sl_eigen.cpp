#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qmbp/errors.hpp"
#include "qmbp/hardy.hpp"
#include "qmbp/quadrature.hpp"
#include "qmbp/sl_eigen.hpp"
#include "test_support.hpp"

using namespace qmbp;

namespace {

const BranchingLaw kBd21 = birth_death_law(2.0, 1.0);

std::vector<double> uniform_nodes(double a, double b, int n_elements) {
    std::vector<double> nodes(n_elements + 1);
    for (int i = 0; i <= n_elements; ++i) nodes[i] = a + (b - a) * i / n_elements;
    return nodes;
}

double dirichlet_laplace_eig(int n_elements) {
    auto sys = assemble_general([](double) { return 1.0; }, [](double) { return 1.0; },
                                uniform_nodes(0.0, 1.0, n_elements), true, true);
    return smallest_eig(sys).ell;
}

}  // namespace

TEST_CASE("graded grid shape") {
    const auto nodes = make_graded_grid(1e-4, 1e-6, 64);
    CHECK(nodes.size() == 66);  // 64 interior + both ends
    CHECK(nodes.front() == doctest::Approx(1e-4));
    CHECK(nodes.back() == doctest::Approx(1.0 - 1e-6));
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) CHECK(nodes[i] < nodes[i + 1]);
    CHECK_THROWS_AS(make_graded_grid(0.0, 1e-6, 64), Error);
    CHECK_THROWS_AS(make_graded_grid(1e-4, 1e-6, 8), Error);
}

TEST_CASE("constant-coefficient sanity: Dirichlet eigenvalue converges to pi^2") {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double prev_err = 0.0;
    for (int k = 0; k < 3; ++k) {
        const int n = 32 << k;
        const double err = dirichlet_laplace_eig(n) - pi2;
        CHECK(err > 0.0);  // conforming elements approach from above
        if (k > 0) {
            const double order = std::log2(prev_err / err);
            CHECK(order >= 1.9);
        }
        prev_err = err;
    }
}

TEST_CASE("stiffness and mass matrices are positive definite") {
    auto sys = assemble(kBd21, 1e-3, 1e-3, 64);
    // LDL^T pivots of K - 0*M are the K pivots: all positive iff SPD.
    const auto pivots_positive = [](const std::vector<double>& diag,
                                    const std::vector<double>& off) {
        double prev = 0.0;
        for (std::size_t i = 0; i < diag.size(); ++i) {
            double p = diag[i];
            if (i > 0) p -= off[i - 1] * off[i - 1] / prev;
            if (p <= 0.0) return false;
            prev = p;
        }
        return true;
    };
    CHECK(pivots_positive(sys.k_diag, sys.k_off));
    CHECK(pivots_positive(sys.m_diag, sys.m_off));
    CHECK_THROWS_AS(assemble(kBd21, 0.5, 0.6, 64), Error);
}

TEST_CASE("smallest eigenpair properties") {
    auto sys = assemble(kBd21, 1e-4, 1e-4, 256);
    const SmallestEig eig = smallest_eig(sys);
    CHECK(eig.ell > 0.0);
    CHECK(eig.residual <= 1e-10);

    // Rayleigh quotient of the returned vector equals ell.
    const auto quad_form = [&](const std::vector<double>& d, const std::vector<double>& o) {
        double acc = 0.0;
        for (std::size_t i = 0; i < eig.vec.size(); ++i) {
            acc += d[i] * eig.vec[i] * eig.vec[i];
            if (i + 1 < eig.vec.size()) acc += 2.0 * o[i] * eig.vec[i] * eig.vec[i + 1];
        }
        return acc;
    };
    const double rayleigh = quad_form(sys.k_diag, sys.k_off) / quad_form(sys.m_diag, sys.m_off);
    CHECK(rayleigh == doctest::Approx(eig.ell).epsilon(1e-12));

    // Ground state is one-signed.
    for (double v : eig.vec) CHECK(v > 0.0);

    // Any coordinate vector has a Rayleigh quotient at least ell.
    for (std::size_t i = 0; i < sys.size(); i += 17)
        CHECK(sys.k_diag[i] / sys.m_diag[i] >= eig.ell);
}

TEST_CASE("refinement history decreases and lands in the hardy interval") {
    const HardyResult hardy = hardy_index(kBd21);
    const EigenResult result = refine(kBd21);
    CHECK(result.ell0 > 0.0);
    for (std::size_t i = 1; i < result.history.size(); ++i)
        CHECK(result.history[i].ell <= result.history[i - 1].ell + 1e-12);
    const double slack = 1e-6 * result.ell0;
    CHECK(result.ell0 >= hardy.lambda_lo - slack);
    CHECK(result.ell0 <= hardy.lambda_hi + slack);
    // Ground-state samples are one-signed on the interior.
    int sign_changes = 0;
    for (std::size_t i = 2; i + 1 < result.eigfun.size(); ++i)
        if ((result.eigfun[i].phi > 0.0) != (result.eigfun[i - 1].phi > 0.0)) ++sign_changes;
    CHECK(sign_changes == 0);
}

TEST_CASE("variational quotients of smooth bumps dominate the refined value") {
    const EigenResult result = refine(kBd21, 1e-6);
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const double alpha = testing::uniform(rng, 0.01, 0.45);
        const double beta = testing::uniform(rng, 0.55, 0.99);
        const double c1 = testing::uniform(rng, -1.0, 1.0);
        const double c2 = testing::uniform(rng, -1.0, 1.0);
        const auto g = [&](double s) {
            const double bump = (s - alpha) * (s - alpha) * (beta - s) * (beta - s);
            return bump * (1.0 + c1 * s + c2 * s * s);
        };
        const auto dg = [&](double s) {
            const double u = (s - alpha) * (beta - s);
            const double du = (alpha + beta - 2.0 * s);
            const double v = 1.0 + c1 * s + c2 * s * s;
            return 2.0 * u * du * v + u * u * (c1 + 2.0 * c2 * s);
        };
        const double num =
            quad::integrate([&](double s) { return s * dg(s) * dg(s); }, alpha, beta, 1e-12).value;
        const double den =
            quad::integrate([&](double s) { return g(s) * g(s) / kBd21.B(s); }, alpha, beta, 1e-12)
                .value;
        CHECK(num / den >= result.ell0 - 1e-6);
    }
}

TEST_CASE("sandwich for random laws") {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 8; ++trial) {
        const BranchingLaw law = testing::random_subcritical_law(rng);
        const HardyResult hardy = hardy_index(law);
        const EigenResult result = refine(law);
        const double slack = 1e-6 * result.ell0;
        CHECK(result.ell0 >= hardy.lambda_lo - slack);
        CHECK(result.ell0 <= hardy.lambda_hi + slack);
    }
}

TEST_CASE("near-critical family stays inside its interval") {
    const BranchingLaw law = birth_death_law(1.0, 1.0 - 1e-3);
    const HardyResult hardy = hardy_index(law);
    const EigenResult result = refine(law);
    CHECK(result.ell0 >= hardy.lambda_lo - 1e-6 * result.ell0);
    CHECK(result.ell0 <= hardy.lambda_hi + 1e-6 * result.ell0);
    CHECK(hardy.lambda_lo == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("refine refuses non-subcritical laws") {
    const double critical[] = {1.0, -2.0, 1.0};
    CHECK_THROWS_AS(refine(BranchingLaw::validate(critical)), Error);
}
