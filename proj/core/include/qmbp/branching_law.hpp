#pragma once

#include <span>
#include <vector>

#include "qmbp/polynomial.hpp"

namespace qmbp {

/// Cumulative-sum coefficients a_n = b_0 + ... + b_n of the finite rate
/// sequence. Because the rates sum to zero, a_n vanishes for n >= J_max, so
/// A(s) = B(s)/(1-s) is the polynomial sum a_n s^n of degree <= J_max - 1 and
/// can be evaluated exactly everywhere, including at the removable point s=1.
struct ASeries {
    Polynomial poly;

    double value(double s) const { return poly.value(s); }
    double derivative(double s, int order) const { return poly.derivative(s, order); }
};

/// Validated rate sequence (b_0, b_1, ..., b_J) of a quadratic branching
/// process together with its derived moments. Immutable after construction;
/// all member functions are const and safe for concurrent use.
class BranchingLaw {
  public:
    /// Validates raw rates: b_j >= 0 for j != 1, b_0 > 0, positive birth mass,
    /// and b_1 equal to -(sum of the others) within 1e-12 absolute. Inputs
    /// failing any check are rejected, never repaired.
    static BranchingLaw validate(std::span<const double> raw_rates);

    std::span<const double> rates() const { return b_; }
    std::size_t max_index() const { return b_.size() - 1; }  ///< J_max
    double rate(std::size_t j) const { return j < b_.size() ? b_[j] : 0.0; }

    double mean_death() const { return mean_death_; }   ///< m_d = b_0
    double mean_birth() const { return mean_birth_; }   ///< m_b = sum (j-1) b_j
    double birth_mass() const { return birth_mass_; }   ///< sum_{j>=2} b_j
    double bprime1() const { return bprime1_; }          ///< B'(1) = m_b - m_d
    double bsecond1() const { return bsecond1_; }        ///< B''(1) = sum j(j-1) b_j

    bool subcritical() const { return bprime1_ < 0.0; }
    bool critical() const { return bprime1_ == 0.0; }

    /// B(s) = sum b_j s^j by Horner recurrence (exact polynomial).
    double B(double s) const { return b_poly_.value(s); }

    /// A(s) = B(s)/(1-s) and derivatives, always from the cumulative-sum
    /// polynomial, never by dividing B by (1-s).
    double A(double s, int order = 0) const { return a_series_.derivative(s, order); }

    const ASeries& a_series() const { return a_series_; }
    const Polynomial& b_polynomial() const { return b_poly_; }

    /// Throws Error{not_subcritical} unless B'(1) < 0.
    void require_subcritical(const char* who) const;

  private:
    BranchingLaw() = default;

    std::vector<double> b_;
    Polynomial b_poly_;
    ASeries a_series_;
    double mean_death_ = 0.0;
    double mean_birth_ = 0.0;
    double birth_mass_ = 0.0;
    double bprime1_ = 0.0;
    double bsecond1_ = 0.0;
};

/// Root structure of B on [0, 1] plus the real roots of A on a user interval.
struct RootReport {
    std::vector<double> b_roots;   ///< roots of B in [0, 1]; always contains 1
    bool double_root_at_one = false;  ///< critical case B'(1) = 0
    std::vector<double> a_roots;   ///< roots of A in [a_lo, a_hi]
};

/// If B'(1) <= 0 the only root of B in [0, 1] is 1; if B'(1) > 0 there is a
/// second root q in (0, 1), located by bisection to 1e-12 absolute.
RootReport roots_of_b(const BranchingLaw& law, double a_lo = 0.0, double a_hi = 1.0);

/// Rate list (a, -(a+b), b): pure birth-death with rates a n^2 down, b n^2 up.
BranchingLaw birth_death_law(double a, double b);

/// Rate list (b0, -(b0+b2+b3), b2, b3): largest jump two states up.
BranchingLaw skip2_law(double b0, double b2, double b3);

}  // namespace qmbp
