#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qmbp/branching_law.hpp"
#include "qmbp/errors.hpp"
#include "test_support.hpp"

using namespace qmbp;

TEST_CASE("validate_law populates moments") {
    const double rates[] = {2.0, -3.0, 1.0};
    const BranchingLaw law = BranchingLaw::validate(rates);
    CHECK(law.mean_death() == 2.0);
    CHECK(law.mean_birth() == 1.0);
    CHECK(law.bprime1() == -1.0);
    CHECK(law.bsecond1() == 2.0);
    CHECK(law.subcritical());
}

TEST_CASE("critical law validates but is not subcritical") {
    const double rates[] = {1.0, -2.0, 1.0};
    const BranchingLaw law = BranchingLaw::validate(rates);
    CHECK(law.bprime1() == 0.0);
    CHECK(!law.subcritical());
    CHECK(law.critical());
    CHECK_THROWS_AS(law.require_subcritical("test"), Error);
}

TEST_CASE("supercritical law validates and is flagged") {
    const double rates[] = {1.0, -2.5, 1.0, 0.5};
    const BranchingLaw law = BranchingLaw::validate(rates);
    CHECK(law.mean_birth() == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(law.bprime1() > 0.0);
    CHECK(!law.subcritical());
}

TEST_CASE("validation rejects malformed inputs") {
    const auto code_of = [](std::vector<double> rates) {
        try {
            BranchingLaw::validate(rates);
        } catch (const Error& e) {
            return e.code();
        }
        return errc::bad_parameters;
    };
    CHECK(code_of({2.0, -3.0, -1.0, 2.0}) == errc::negative_rate);
    CHECK(code_of({0.0, -1.0, 1.0}) == errc::zero_death_rate);
    CHECK(code_of({-1.0, 0.0, 1.0}) == errc::zero_death_rate);
    CHECK(code_of({2.0, -2.0, 0.0}) == errc::no_birth_mass);
    CHECK(code_of({2.0, -2.0}) == errc::no_birth_mass);
    CHECK(code_of({2.0, -3.0 + 1e-9, 1.0}) == errc::conservation_violation);
    // Mismatch within tolerance is accepted, not repaired.
    CHECK_NOTHROW(BranchingLaw::validate(std::vector<double>{2.0, -3.0 + 1e-13, 1.0}));
}

TEST_CASE("B evaluation") {
    const double rates[] = {2.0, -3.0, 1.0};
    const BranchingLaw law = BranchingLaw::validate(rates);
    CHECK(law.B(0.0) == 2.0);
    CHECK(law.B(1.0) == 0.0);  // conservation makes this exact in floating point
    CHECK(law.B(0.5) == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("A evaluation from the cumulative series") {
    const double rates[] = {2.0, -3.0, 1.0};
    const BranchingLaw law = BranchingLaw::validate(rates);
    // A(s) = 2 - s for this law.
    CHECK(law.A(0.0) == 2.0);
    CHECK(law.A(1.0) == 1.0);
    CHECK(law.A(0.3, 1) == -1.0);
    CHECK(law.A(0.7, 2) == 0.0);
}

TEST_CASE("roots of B") {
    std::mt19937_64 rng(11);
    SUBCASE("subcritical: only root 1") {
        const double rates[] = {2.0, -3.0, 1.0};
        const RootReport report = roots_of_b(BranchingLaw::validate(rates));
        REQUIRE(report.b_roots.size() == 1);
        CHECK(report.b_roots[0] == 1.0);
        CHECK(!report.double_root_at_one);
    }
    SUBCASE("critical: double root at 1") {
        const double rates[] = {1.0, -2.0, 1.0};
        const RootReport report = roots_of_b(BranchingLaw::validate(rates));
        REQUIRE(report.b_roots.size() == 1);
        CHECK(report.double_root_at_one);
    }
    SUBCASE("supercritical: interior root with small residual") {
        const double rates[] = {1.0, -2.5, 1.0, 0.5};
        const BranchingLaw law = BranchingLaw::validate(rates);
        const RootReport report = roots_of_b(law);
        REQUIRE(report.b_roots.size() == 2);
        const double q = report.b_roots[0];
        CHECK(q > 0.0);
        CHECK(q < 1.0);
        CHECK(std::abs(law.B(q)) < 1e-10);
    }
    SUBCASE("A root reporting on a user interval") {
        // A(s) = 2 - s has the single root 2.
        const double rates[] = {2.0, -3.0, 1.0};
        const RootReport report = roots_of_b(BranchingLaw::validate(rates), 0.0, 3.0);
        REQUIRE(report.a_roots.size() == 1);
        CHECK(report.a_roots[0] == doctest::Approx(2.0).epsilon(1e-10));
    }
}

TEST_CASE("factorization and series properties on random laws") {
    std::mt19937_64 rng(202);
    for (int trial = 0; trial < 1000; ++trial) {
        const BranchingLaw law = testing::random_subcritical_law(rng);
        for (int k = 0; k < 100; ++k) {
            const double s = testing::uniform(rng, 1e-6, 1.0 - 1e-6);
            const double b = law.B(s);
            const double factored = (1.0 - s) * law.A(s);
            CHECK(b > 0.0);
            CHECK(std::abs(b - factored) <= 1e-12 * std::max(std::abs(b), 1.0));
        }
    }
}

TEST_CASE("A is decreasing, concave, and sandwiched") {
    std::mt19937_64 rng(303);
    for (int trial = 0; trial < 200; ++trial) {
        const BranchingLaw law = testing::random_subcritical_law(rng);
        const double b0 = law.mean_death();
        const double a1 = b0 - law.mean_birth();
        CHECK(law.A(0.0) == doctest::Approx(b0).epsilon(1e-14));
        CHECK(law.A(1.0) == doctest::Approx(a1).epsilon(1e-13));
        // a_n <= 0 for n >= 1
        const auto coeffs = law.a_series().poly.coeffs();
        for (std::size_t n = 1; n < coeffs.size(); ++n) CHECK(coeffs[n] <= 0.0);
        for (int k = 0; k <= 50; ++k) {
            const double s = k / 50.0;
            CHECK(law.A(s, 1) < 0.0);
            CHECK(law.A(s, 2) <= 0.0);
            if (k > 0 && k < 50) {
                CHECK(law.A(s) < b0);
                CHECK(law.A(s) > a1);
            }
        }
    }
}

TEST_CASE("second moment dominates twice the mean birth rate") {
    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 200; ++trial) {
        const BranchingLaw law = testing::random_subcritical_law(rng);
        CHECK(law.bsecond1() >= 2.0 * law.mean_birth() - 1e-12);
    }
    // Equality holds exactly when nothing sits above index 2.
    const BranchingLaw bd = birth_death_law(2.0, 1.0);
    CHECK(bd.bsecond1() == 2.0 * bd.mean_birth());
}
