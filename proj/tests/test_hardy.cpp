#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "qmbp/errors.hpp"
#include "qmbp/hardy.hpp"
#include "test_support.hpp"

using namespace qmbp;

namespace {
const BranchingLaw kReference = birth_death_law(2.0, 1.0);
}

TEST_CASE("integral against the two-rate antiderivative") {
    // For B(r) = (1-r)(a - b r): Int_0^s dr/B = log((1 - (b/a) s)/(1-s))/(a-b).
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const double a = testing::uniform(rng, 0.3, 8.0);
        const double b = a * testing::uniform(rng, 0.05, 0.95);
        const BranchingLaw law = birth_death_law(a, b);
        const double s = testing::uniform(rng, 1e-4, 1.0 - 1e-4);
        const double expected = std::log((1.0 - b / a * s) / (1.0 - s)) / (a - b);
        CHECK(integral_I(law, s) == doctest::Approx(expected).epsilon(1e-10));
    }
    // Frozen spot value: a=2, b=1, s=1/2 gives log(3/2).
    CHECK(integral_I(kReference, 0.5) == doctest::Approx(0.4054651081081644).epsilon(1e-12));
}

TEST_CASE("integral is proportional to s/b0 near the origin") {
    for (double s : {1e-4, 1e-6, 1e-8}) {
        CHECK(integral_I(kReference, s) / s == doctest::Approx(0.5).epsilon(1e-3));
    }
}

TEST_CASE("integral increases in s") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const BranchingLaw law = testing::random_subcritical_law(rng);
        double prev = 0.0;
        for (int k = 1; k <= 20; ++k) {
            const double value = integral_I(law, k / 21.0);
            CHECK(value > prev);
            prev = value;
        }
    }
}

TEST_CASE("phi spot values and boundary behavior") {
    CHECK(phi(kReference, 0.5) == doctest::Approx(0.28104699650060755).epsilon(1e-12));
    CHECK(phi(kReference, 1e-301) == 0.0);
    CHECK(phi(kReference, 1.0 - 1e-17) == 0.0);
    // Limits at both ends vanish.
    CHECK(phi(kReference, 1e-12) < 1e-9);
    CHECK(phi(kReference, 1.0 - 1e-12) < 1e-9);
}

TEST_CASE("phi refuses non-subcritical laws") {
    const double critical[] = {1.0, -2.0, 1.0};
    const BranchingLaw law = BranchingLaw::validate(critical);
    CHECK_THROWS_WITH_AS(phi(law, 0.5), doctest::Contains("NotSubcritical"), Error);
    CHECK_THROWS_AS(hardy_index(law), Error);
}

TEST_CASE("closed form matches the printed two-rate variants") {
    CHECK(closed_form_bd(2.0, 1.0) == doctest::Approx(0.2860110365126445).epsilon(1e-15));
    CHECK(closed_form_bd(1.0, 1e-12) == doctest::Approx(0.4804530139182014).epsilon(1e-6));
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const double a = testing::uniform(rng, 0.1, 10.0);
        const double b = a * testing::uniform(rng, 1e-3, 0.999);
        const double kappa = b / a;
        const double alt = std::pow(std::log1p(std::sqrt(1.0 - kappa)), 2) / ((1.0 - kappa) * a);
        CHECK(closed_form_bd(a, b) == doctest::Approx(alt).epsilon(1e-13));
    }
    CHECK_THROWS_AS(closed_form_bd(1.0, 2.0), Error);
    CHECK_THROWS_AS(closed_form_bd(1.0, 0.0), Error);
}

TEST_CASE("supremum matches the exact two-rate value") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        const double a = testing::uniform(rng, 0.2, 10.0);
        const double b = a * testing::uniform(rng, 0.02, 0.98);
        const BranchingLaw law = birth_death_law(a, b);
        const HardyResult result = hardy_index(law);
        const double exact = closed_form_bd(a, b);
        CHECK(std::abs(result.d2 - exact) <= 1e-8 * exact);
        // Maximizer of the two-rate family is 1/(1 + sqrt(1 - b/a)).
        const double s_star = 1.0 / (1.0 + std::sqrt(1.0 - b / a));
        CHECK(result.s_star == doctest::Approx(s_star).epsilon(1e-6));
    }
}

TEST_CASE("hardy result invariants") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 25; ++trial) {
        const BranchingLaw law = testing::random_subcritical_law(rng);
        const HardyResult result = hardy_index(law);
        CHECK(result.d2 > 0.0);
        CHECK(result.s_star > 0.0);
        CHECK(result.s_star < 1.0);
        CHECK(result.lambda_lo == result.lambda_hi / 4.0);
        CHECK(result.lambda_lo > 0.0);
        for (const auto& pt : result.curve) CHECK(pt.phi <= result.d2 + result.quad_err + 1e-12);
        CHECK(phi(law, result.s_star) == doctest::Approx(result.d2).epsilon(1e-9));
    }
}

TEST_CASE("critical-limit family pushes the lower rate bound toward a/4") {
    // lower bound 1/(4 d2) tends to a/4 as b -> a from below
    const double d2_k2 = hardy_index(birth_death_law(1.0, 1.0 - 1e-2)).d2;
    const double d2_k3 = hardy_index(birth_death_law(1.0, 1.0 - 1e-3)).d2;
    CHECK(std::abs(1.0 / (4.0 * d2_k2) - 0.25) < 0.03);
    CHECK(std::abs(1.0 / (4.0 * d2_k3) - 0.25) < 0.01);
}

TEST_CASE("two-sided log inequality") {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 1000; ++trial) {
        const double sigma = testing::uniform(rng, 1e-6, 10.0);
        const double t = testing::uniform(rng, 1e-6, 100.0);
        const double lhs = std::log1p(sigma * t) * std::log1p(sigma / t);
        const double rhs = std::pow(std::log1p(sigma), 2);
        CHECK(lhs <= rhs + 1e-14);
    }
}

TEST_CASE("log-ratio bound") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        double x = std::exp(testing::uniform(rng, -6.0, 6.0));
        if (x == 1.0) continue;
        CHECK(std::log(x) / (x - 1.0) <= (1.0 + x) / (2.0 * x) + 1e-14);
    }
}

TEST_CASE("quadratic inequality") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 1000; ++trial) {
        const double x = testing::uniform(rng, 1e-9, 1.0);
        const double p = testing::uniform(rng, -1.0 + 1e-9, 1.0);
        CHECK(p * (1.0 - p) * x * x - 4.0 * p * x + p - 1.0 < 0.0);
    }
}

TEST_CASE("concavity of the log-product kernel") {
    // f(x) = -log x * log((1 + p x)/(1 - x)) has nonpositive second difference.
    const auto f = [](double x, double p) {
        return -std::log(x) * std::log((1.0 + p * x) / (1.0 - x));
    };
    const double h = 1e-4;
    for (int i = 1; i < 100; ++i) {
        const double x = 0.01 + (0.98 * i) / 100.0;
        for (int j = 0; j < 100; ++j) {
            const double p = -0.99 + (1.98 * j) / 99.0;
            const double second = f(x + h, p) - 2.0 * f(x, p) + f(x - h, p);
            CHECK(second / (h * h) <= 1e-6);
        }
    }
}

TEST_CASE("phi is concave for skip-2 laws") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const BranchingLaw law = testing::random_skip2_law(rng);
        const double h = 1e-2;
        for (double x = 0.02; x < 0.985; x += 0.02) {
            const double second =
                phi(law, x + h, 1e-12) - 2.0 * phi(law, x, 1e-12) + phi(law, x - h, 1e-12);
            CHECK(second <= 1e-6);
        }
    }
}

TEST_CASE("weighted endpoint inequality for piecewise-linear test functions") {
    // Int f^2/(s log^2 s) <= 4 Int s (f')^2 for f vanishing at both ends.
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 50; ++trial) {
        const double alpha = testing::uniform(rng, 1e-3, 0.4);
        const double beta = testing::uniform(rng, 0.6, 0.999);
        const int n_knots = 3 + static_cast<int>(rng() % 6);
        std::vector<double> xs{alpha}, ys{0.0};
        for (int k = 1; k < n_knots; ++k) {
            xs.push_back(testing::uniform(rng, alpha, beta));
            ys.push_back(testing::uniform(rng, -1.0, 1.0));
        }
        xs.push_back(beta);
        ys.push_back(0.0);
        std::vector<std::size_t> order(xs.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](auto i, auto j) { return xs[i] < xs[j]; });

        double lhs = 0.0, rhs = 0.0;
        for (std::size_t k = 0; k + 1 < order.size(); ++k) {
            const double x0 = xs[order[k]], x1 = xs[order[k + 1]];
            const double y0 = ys[order[k]], y1 = ys[order[k + 1]];
            if (x1 <= x0) continue;
            const double slope = (y1 - y0) / (x1 - x0);
            rhs += 4.0 * slope * slope * 0.5 * (x1 * x1 - x0 * x0);
            // 40-point panel rule is plenty for this smooth integrand.
            const int n_q = 40;
            for (int q = 0; q < n_q; ++q) {
                const double s = x0 + (x1 - x0) * (q + 0.5) / n_q;
                const double fval = y0 + slope * (s - x0);
                lhs += (x1 - x0) / n_q * fval * fval / (s * std::log(s) * std::log(s));
            }
        }
        CHECK(lhs <= rhs + 1e-6);
    }
}
