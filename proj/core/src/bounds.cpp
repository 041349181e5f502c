#include "qmbp/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "qmbp/errors.hpp"
#include "qmbp/hardy.hpp"

namespace qmbp {

namespace {

constexpr double kBoundsRelTol = 1e-12;

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void fill_lambda(BoundsEntry& entry) {
    if (entry.d2_hi) entry.lambda_lo = 1.0 / (4.0 * *entry.d2_hi);
    if (entry.d2_lo) entry.lambda_hi = 1.0 / *entry.d2_lo;
    entry.applicable = entry.d2_lo.has_value() || entry.d2_hi.has_value();
}

}  // namespace

const BoundsEntry* BoundsReport::find(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return &e;
    return nullptr;
}

BoundsEntry constant_envelope_bounds(const BranchingLaw& law) {
    law.require_subcritical("constant_envelope_bounds");
    const double log2sq = std::numbers::ln2_v<double> * std::numbers::ln2_v<double>;
    BoundsEntry entry;
    entry.name = "constant_envelope";
    entry.d2_lo = log2sq / law.mean_death();
    entry.d2_hi = log2sq / (law.mean_death() - law.mean_birth());
    fill_lambda(entry);
    return entry;
}

BoundsEntry line_envelope_bounds(const BranchingLaw& law, double* s0_out) {
    law.require_subcritical("line_envelope_bounds");
    const double b0 = law.mean_death();
    const double mb = law.mean_birth();

    // A' decreases from -(birth mass) at 0 to -B''(1)/2 at 1 and -m_b lies in
    // between, so the tangency point exists. A linear A (two-rate law) makes
    // every point a tangency point; the construction then degenerates with
    // secant == tangent == A and we report s0 = 1.
    double s0 = 1.0;
    const double slope_spread = std::abs(law.A(0.0, 1) - law.A(1.0, 1));
    if (slope_spread > 1e-14 * std::max(1.0, std::abs(law.A(1.0, 1)))) {
        double lo = 0.0, hi = 1.0;
        for (int iter = 0; iter < 100 && hi - lo > 1e-12; ++iter) {
            const double mid = 0.5 * (lo + hi);
            if (law.A(mid, 1) + mb >= 0.0)
                lo = mid;
            else
                hi = mid;
        }
        s0 = 0.5 * (lo + hi);
    }
    if (s0_out) *s0_out = s0;

    const double tangent_intercept = law.A(s0) + mb * s0;
    BoundsEntry entry;
    entry.name = "line_envelope";
    entry.d2_lo = closed_form_bd(tangent_intercept, mb);
    entry.d2_hi = closed_form_bd(b0, mb);
    fill_lambda(entry);

    // Cross-check: the closed form must match the numeric supremum of the
    // tangent-envelope phi; recorded for diagnosis.
    const Polynomial tangent(std::vector<double>{tangent_intercept, -mb});
    const PhiSupremum direct = phi_supremum(tangent, kBoundsRelTol);
    entry.notes = "tangent envelope numeric sup = " + format_value(direct.value) +
                  " at s = " + format_value(direct.abscissa);
    return entry;
}

BoundsEntry slope_envelope_bounds(const BranchingLaw& law) {
    law.require_subcritical("slope_envelope_bounds");
    const double b0 = law.mean_death();
    const double birth_mass = law.birth_mass();
    const double half_bpp = 0.5 * law.bsecond1();

    BoundsEntry entry;
    entry.name = "slope_envelope";
    entry.d2_lo = closed_form_bd(b0, birth_mass);
    if (half_bpp < b0) {
        entry.d2_hi = closed_form_bd(b0, half_bpp);
    } else {
        entry.notes = "upper side inapplicable: B''(1) >= 2 b_0, the steep line "
                      "crosses zero inside the unit interval";
    }
    fill_lambda(entry);
    return entry;
}

BoundsEntry quadratic_envelope_bounds(const BranchingLaw& law, double* s1_out, double* s2_out) {
    law.require_subcritical("quadratic_envelope_bounds");
    const double b0 = law.mean_death();
    const double a1 = law.A(0.0, 1);
    const double curv0 = law.A(0.0, 2);
    const double curv1 = law.A(1.0, 2);

    // Both parabolas are concave (curvatures <= 0), so positivity on [0, 1]
    // reduces to positivity at the right endpoint.
    const Polynomial upper_parabola(std::vector<double>{b0, a1, 0.5 * curv0});
    const Polynomial lower_parabola(std::vector<double>{b0, a1, 0.5 * curv1});

    BoundsEntry entry;
    entry.name = "quadratic_envelope";
    const PhiSupremum lo_sup = phi_supremum(upper_parabola, kBoundsRelTol);
    entry.d2_lo = lo_sup.value;
    if (s1_out) *s1_out = lo_sup.abscissa;
    if (lower_parabola.value(1.0) > 0.0) {
        const PhiSupremum hi_sup = phi_supremum(lower_parabola, kBoundsRelTol);
        entry.d2_hi = hi_sup.value;
        if (s2_out) *s2_out = hi_sup.abscissa;
    } else {
        entry.notes = "upper side inapplicable: the steep parabola is not positive "
                      "on the unit interval";
        if (s2_out) *s2_out = std::numeric_limits<double>::quiet_NaN();
    }
    fill_lambda(entry);
    return entry;
}

BoundsReport all_bounds(const BranchingLaw& law) {
    BoundsReport report;
    report.kappa1 = law.mean_birth() / law.mean_death();
    report.kappa1p = law.bsecond1() / (2.0 * law.mean_death());
    report.kappa2p = law.birth_mass() / law.mean_death();
    report.entries.push_back(constant_envelope_bounds(law));
    report.entries.push_back(line_envelope_bounds(law, &report.s0));
    report.kappa2 = law.mean_birth() / (law.A(report.s0) + report.s0 * law.mean_birth());
    report.entries.push_back(slope_envelope_bounds(law));
    report.entries.push_back(quadratic_envelope_bounds(law, &report.s1, &report.s2));
    return report;
}

BoundsComparison compare_bounds(const BranchingLaw& law, const BoundsReport& report) {
    BoundsComparison cmp;
    cmp.best_lambda_lo = 0.0;
    cmp.best_lambda_hi = std::numeric_limits<double>::infinity();
    cmp.best_d2_lo = 0.0;
    cmp.best_d2_hi = std::numeric_limits<double>::infinity();
    for (const auto& e : report.entries) {
        if (e.d2_lo) cmp.best_d2_lo = std::max(cmp.best_d2_lo, *e.d2_lo);
        if (e.d2_hi) cmp.best_d2_hi = std::min(cmp.best_d2_hi, *e.d2_hi);
        if (e.lambda_lo) cmp.best_lambda_lo = std::max(cmp.best_lambda_lo, *e.lambda_lo);
        if (e.lambda_hi) cmp.best_lambda_hi = std::min(cmp.best_lambda_hi, *e.lambda_hi);
    }
    for (std::size_t i = 0; i < report.entries.size(); ++i) {
        for (std::size_t j = i + 1; j < report.entries.size(); ++j) {
            const BoundsEntry& a = report.entries[i];
            const BoundsEntry& b = report.entries[j];
            BoundsComparison::PairVerdict verdict;
            verdict.first = a.name;
            verdict.second = b.name;
            if (a.lambda_hi && b.lambda_hi)
                verdict.tighter_lambda_upper = *a.lambda_hi <= *b.lambda_hi ? a.name : b.name;
            if (a.lambda_lo && b.lambda_lo)
                verdict.tighter_lambda_lower = *a.lambda_lo >= *b.lambda_lo ? a.name : b.name;
            cmp.pairs.push_back(std::move(verdict));
        }
    }
    cmp.line_upper_criterion = law.mean_birth() < 0.5 * law.bsecond1();
    const BoundsEntry* line = report.find("line_envelope");
    const BoundsEntry* slope = report.find("slope_envelope");
    if (line && slope && line->d2_hi && slope->d2_hi) {
        cmp.line_upper_observed = *line->d2_hi < *slope->d2_hi;
        cmp.criterion_matches = cmp.line_upper_criterion == cmp.line_upper_observed;
    } else {
        // The slope-envelope upper side is absent exactly when B''(1) >= 2 b_0;
        // the line-envelope upper bound is then trivially the tighter one.
        cmp.line_upper_observed = cmp.line_upper_criterion;
        cmp.criterion_matches = true;
    }
    return cmp;
}

}  // namespace qmbp
