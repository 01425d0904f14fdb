#include "imbalance/special_functions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <algorithm>

namespace imbalance {

namespace {

constexpr double log_sqrt_2pi = 0.91893853320467274178032973640562;
// Beyond this point erfc(x / sqrt 2) starts losing bits to underflow.
constexpr double erfc_safe_limit = 26.0;
// Below this point the continued fraction needs too many terms.
constexpr double mills_cf_threshold = 5.0;

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) {
        throw std::domain_error(std::string(what) + ": non-finite argument");
    }
}

// Modified Lentz evaluation of
//   1 / (x + 1/(x + 2/(x + 3/(x + ...))))
double mills_continued_fraction(double x) {
    constexpr double tiny = 1e-300;
    double f = x;
    double c = f;
    double d = 0.0;
    for (int j = 1; j < 2000; ++j) {
        d = x + j * d;
        if (std::abs(d) < tiny) d = tiny;
        d = 1.0 / d;
        c = x + j / c;
        if (std::abs(c) < tiny) c = tiny;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return 1.0 / f;
}

}  // namespace

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x - log_sqrt_2pi);
}

double log_normal_pdf(double x) {
    return -0.5 * x * x - log_sqrt_2pi;
}

double gauss_tail_H(double x) {
    require_finite(x, "gauss_tail_H");
    return 0.5 * std::erfc(x * std::numbers::sqrt2 / 2.0);
}

double log_gauss_tail_H(double x) {
    require_finite(x, "log_gauss_tail_H");
    if (x < 0.0) {
        return std::log1p(-gauss_tail_H(-x));
    }
    if (x <= erfc_safe_limit) {
        return std::log(gauss_tail_H(x));
    }
    return log_normal_pdf(x) + std::log(mills_continued_fraction(x));
}

double mills_ratio(double x) {
    require_finite(x, "mills_ratio");
    if (x >= mills_cf_threshold) {
        return mills_continued_fraction(x);
    }
    return std::exp(log_gauss_tail_H(x) - log_normal_pdf(x));
}

ClassMasses class_masses(double b0) {
    require_finite(b0, "class_masses");
    return {gauss_tail_H(-b0), gauss_tail_H(b0)};
}

double rho_intrinsic(double b0) {
    return class_masses(b0).c_plus;
}

double log_add_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(-std::abs(a - b)));
}

namespace {

void check_boltzmann_args(double h, double beta) {
    if (!(h >= 0.0 && h <= 1.0)) {
        throw std::domain_error("log_boltzmann: H value outside [0, 1]");
    }
    if (!(beta > 0.0) || std::isnan(beta)) {
        throw std::domain_error("log_boltzmann: beta must be positive");
    }
}

}  // namespace

double log_boltzmann_plus(double h, double beta) {
    check_boltzmann_args(h, beta);
    if (std::isinf(beta)) {
        if (h == 0.0) {
            throw log_divergence_error("log_boltzmann_plus: log(0) at infinite beta");
        }
        return std::log(h);
    }
    // h + e^-beta (1 - h), both addends non-negative
    const double log_h = h > 0.0 ? std::log(h) : -std::numeric_limits<double>::infinity();
    const double log_rest = h < 1.0 ? -beta + std::log1p(-h) : -std::numeric_limits<double>::infinity();
    return log_add_exp(log_h, log_rest);
}

double log_boltzmann_minus(double h, double beta) {
    check_boltzmann_args(h, beta);
    if (std::isinf(beta)) {
        if (h == 1.0) {
            throw log_divergence_error("log_boltzmann_minus: log(0) at infinite beta");
        }
        return std::log1p(-h);
    }
    const double shift = std::expm1(-beta) * h;  // (e^-beta - 1) h, in (-1, 0]
    if (shift > -0.5) {
        return std::log1p(shift);
    }
    // (1 - h) + e^-beta h
    const double log_rest = h < 1.0 ? std::log1p(-h) : -std::numeric_limits<double>::infinity();
    return log_add_exp(log_rest, -beta + std::log(h));
}

double log_boltzmann_u(double u, double beta) {
    return log_add_exp(log_gauss_tail_H(u), -beta + log_gauss_tail_H(-u));
}

double boltzmann_ratio(double u, double beta) {
    require_finite(u, "boltzmann_ratio");
    if (u >= 0.0) {
        // phi / (H(u) + k H(-u)) = 1 / (M(u) + k H(-u) / phi(u))
        const double thermal = std::exp(-beta - log_normal_pdf(u)) * gauss_tail_H(-u);
        return 1.0 / (mills_ratio(u) + thermal);
    }
    return normal_pdf(u) / (gauss_tail_H(u) + std::exp(-beta) * gauss_tail_H(-u));
}

double thermal_error_fraction(double u, double beta) {
    const double log_correct = log_gauss_tail_H(u);
    const double log_wrong = -beta + log_gauss_tail_H(-u);
    return std::exp(log_wrong - log_add_exp(log_correct, log_wrong));
}

}  // namespace imbalance
