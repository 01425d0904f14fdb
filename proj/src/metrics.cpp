#include "imbalance/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "imbalance/special_functions.hpp"

namespace imbalance {

namespace {

std::optional<double> safe_ratio(double num, double den) {
    if (den == 0.0) return std::nullopt;
    return num / den;
}

std::optional<double> harmonic(std::optional<double> a, double b) {
    if (!a) return std::nullopt;
    return safe_ratio(2.0 * *a * b, *a + b);
}

}  // namespace

namespace {

// Misclassified (wrong = true) or correctly classified mass of each class.
ClassErrors class_masses_by_outcome(double R, double b, double b0, const QuadratureSpec& spec, bool wrong) {
    if (!std::isfinite(R) || !std::isfinite(b) || !std::isfinite(b0)) {
        throw std::domain_error("class_error_integrals: non-finite argument");
    }
    if (std::abs(R) > 1.0) throw std::domain_error("class_error_integrals: |R| > 1");
    const double a = -b0;
    if (std::abs(R) == 1.0) {
        // The student field is R y + b: errors are the y-mass where its sign
        // disagrees with y + b0.
        const double cut = -b / R;
        auto mass_between = [](double lo, double hi) {
            return lo < hi ? gauss_tail_H(lo) - gauss_tail_H(hi) : 0.0;
        };
        if (R > 0.0) {
            // student positive for y > cut
            if (wrong) return {mass_between(a, cut), mass_between(cut, a)};
            return {gauss_tail_H(std::max(a, cut)), gauss_tail_H(-std::min(a, cut))};
        }
        // student positive for y < cut
        if (wrong) return {gauss_tail_H(std::max(a, cut)), gauss_tail_H(-std::min(a, cut))};
        return {mass_between(a, cut), mass_between(cut, a)};
    }
    const double width = std::sqrt((1.0 - R) * (1.0 + R));
    // positives are misclassified when x < u' = -(y R + b) / sqrt(1 - R^2)
    auto u_prime = [=](double y) { return -(y * R + b) / width; };
    const double flip = wrong ? 1.0 : -1.0;
    std::vector<Feature> features;
    if (R != 0.0) features.push_back({-b / R, width / std::abs(R)});
    const double plus = integrate_1d([&](double y) { return gauss_tail_H(-flip * u_prime(y)); }, spec,
                                     GaussianWeight::gaussian_above(a), features, Execution::serial);
    const double minus = integrate_1d([&](double y) { return gauss_tail_H(flip * u_prime(y)); }, spec,
                                      GaussianWeight::gaussian_below(a), features, Execution::serial);
    return {plus, minus};
}

}  // namespace

ClassErrors class_error_integrals(double R, double b, double b0, const QuadratureSpec& spec) {
    return class_masses_by_outcome(R, b, b0, spec, true);
}

MetricsReport report_from_rates(double recall, double specificity, double rho_test) {
    if (!(rho_test > 0.0 && rho_test < 1.0)) throw std::invalid_argument("rho_test must lie in (0, 1)");
    MetricsReport m;
    m.rho_test = rho_test;
    m.recall = recall;
    m.specificity = specificity;
    m.accuracy = rho_test * recall + (1.0 - rho_test) * specificity;
    m.generalization_error = 1.0 - m.accuracy;
    m.balanced_accuracy = 0.5 * (recall + specificity);
    const double true_pos = rho_test * recall;
    const double false_pos = (1.0 - rho_test) * (1.0 - specificity);
    const double true_neg = (1.0 - rho_test) * specificity;
    const double false_neg = rho_test * (1.0 - recall);
    m.precision = safe_ratio(true_pos, true_pos + false_pos);
    m.f1 = harmonic(m.precision, recall);
    m.precision_neg = safe_ratio(true_neg, true_neg + false_neg);
    m.f1_neg = harmonic(m.precision_neg, specificity);
    return m;
}

MetricsReport report(double R, double b, double b0, double rho_test, const QuadratureSpec& spec) {
    // Both outcomes are integrated directly so that a rate that is exactly
    // 0 or 1 (a constant classifier) is not blurred by 1 - I / c rounding.
    const ClassErrors wrong = class_masses_by_outcome(R, b, b0, spec, true);
    const ClassErrors right = class_masses_by_outcome(R, b, b0, spec, false);
    const double recall = std::clamp(right.I_plus / (right.I_plus + wrong.I_plus), 0.0, 1.0);
    const double specificity = std::clamp(right.I_minus / (right.I_minus + wrong.I_minus), 0.0, 1.0);
    return report_from_rates(recall, specificity, rho_test);
}

double train_error(const ControlParams& cp, const OrderParams& op, const IntegrationOptions& opts) {
    const double beta = cp.beta();
    const double rho = cp.rho_train();
    const auto features = boltzmann_features(beta);
    double total = 0.0;
    if (rho > 0.0) {
        total += rho / cp.c_plus() *
                 class_integral(cp, op, ClassSide::positive, [beta](double u) { return thermal_error_fraction(u, beta); },
                                features, opts);
    }
    if (rho < 1.0) {
        total += (1.0 - rho) / cp.c_minus() *
                 class_integral(cp, op, ClassSide::negative,
                                [beta](double u) { return thermal_error_fraction(-u, beta); }, features, opts);
    }
    return total;
}

BoundaryDensity boundary_density(double b0) {
    const ClassMasses c = class_masses(b0);
    const double phi = normal_pdf(b0);
    return {phi / c.c_plus, phi / c.c_minus};
}

}  // namespace imbalance
