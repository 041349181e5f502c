#pragma once

#include <span>
#include <vector>

namespace qmbp {

/// Dense real polynomial with coefficients in ascending order of degree.
/// Evaluation uses Horner recurrences; derivatives up to second order are
/// evaluated without forming intermediate coefficient arrays.
class Polynomial {
  public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }

    std::span<const double> coeffs() const { return c_; }
    int degree() const { return static_cast<int>(c_.size()) - 1; }

    double operator()(double s) const { return value(s); }

    double value(double s) const {
        double acc = 0.0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
        return acc;
    }

    /// Evaluate the order-th derivative (order in {0, 1, 2}).
    double derivative(double s, int order) const {
        if (order == 0) return value(s);
        double p = 0.0, dp = 0.0, ddp = 0.0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
            ddp = ddp * s + 2.0 * dp;
            dp = dp * s + p;
            p = p * s + *it;
        }
        return order == 1 ? dp : ddp;
    }

    Polynomial derived() const {
        if (c_.size() <= 1) return Polynomial{};
        std::vector<double> d(c_.size() - 1);
        for (std::size_t n = 1; n < c_.size(); ++n) d[n - 1] = static_cast<double>(n) * c_[n];
        return Polynomial(std::move(d));
    }

  private:
    void trim() {
        while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
    }

    std::vector<double> c_;
};

}  // namespace qmbp
