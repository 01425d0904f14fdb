#include <doctest.h>

#include <cmath>
#include <random>

#include "imbalance/metrics.hpp"
#include "imbalance/saddle_solver.hpp"
#include "imbalance/special_functions.hpp"
#include "oracle_values.hpp"

using namespace imbalance;

TEST_CASE("class errors against direct integration") {
    const ClassErrors e = class_error_integrals(0.5, -0.3, -0.6);
    CHECK(e.I_plus == doctest::Approx(oracle::class_error_plus_example).epsilon(1e-11));
    CHECK(e.I_minus == doctest::Approx(oracle::class_error_minus_example).epsilon(1e-11));
}

TEST_CASE("class errors against Monte-Carlo of the 2-D Gaussian") {
    const double R = 0.5, b = -0.3, b0 = -0.6;
    const ClassErrors e = class_error_integrals(R, b, b0);
    std::mt19937_64 gen(99);
    std::normal_distribution<double> nd;
    const int n = 10000000;
    long plus = 0, minus = 0;
    const double w = std::sqrt(1 - R * R);
    for (int k = 0; k < n; ++k) {
        const double y = nd(gen);
        const double x = nd(gen);
        const double student = x * w + y * R + b;
        if (student * (y + b0) < 0.0) (y + b0 > 0.0 ? plus : minus) += 1;
    }
    const double p_plus = double(plus) / n;
    const double p_minus = double(minus) / n;
    CHECK(std::abs(p_plus - e.I_plus) < 3.0 * std::sqrt(p_plus * (1 - p_plus) / n));
    CHECK(std::abs(p_minus - e.I_minus) < 3.0 * std::sqrt(p_minus * (1 - p_minus) / n));
}

TEST_CASE("class error limits") {
    const ClassErrors chance = class_error_integrals(0.0, 0.0, 0.0);
    CHECK(chance.I_plus == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(chance.I_minus == doctest::Approx(0.25).epsilon(1e-13));
    const ClassErrors perfect = class_error_integrals(1.0, -0.6, -0.6);
    CHECK(perfect.I_plus == 0.0);
    CHECK(perfect.I_minus == 0.0);
    const ClassErrors near = class_error_integrals(1.0 - 1e-10, -0.6, -0.6);
    CHECK(near.I_plus < 1e-5);
    CHECK(near.I_minus < 1e-5);
    // Shifted perfect direction: negatives between the two planes are
    // called positive.
    const ClassErrors shifted = class_error_integrals(1.0, -0.2, -0.6);
    CHECK(shifted.I_plus == 0.0);
    CHECK(shifted.I_minus == doctest::Approx(gauss_tail_H(0.2) - gauss_tail_H(0.6)).epsilon(1e-14));
    // Anti-aligned student gets everything wrong at matching bias.
    const ClassErrors anti = class_error_integrals(-1.0, 0.6, -0.6);
    CHECK(anti.I_plus == doctest::Approx(gauss_tail_H(0.6)).epsilon(1e-14));
    CHECK(anti.I_minus == doctest::Approx(gauss_tail_H(-0.6)).epsilon(1e-14));
    // Continuity of the analytic limit.
    const ClassErrors limit = class_error_integrals(1.0 - 1e-12, -0.2, -0.6);
    CHECK(limit.I_minus == doctest::Approx(shifted.I_minus).epsilon(1e-4));
    CHECK(limit.I_plus < 1e-4);
    CHECK_THROWS_AS(class_error_integrals(1.1, 0.0, 0.0), std::domain_error);
}

TEST_CASE("class errors lie inside the class masses") {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> uR(-1.0, 1.0), ub(-3.0, 3.0), ub0(-2.5, 0.5);
    for (int k = 0; k < 2000; ++k) {
        const double b0 = ub0(gen);
        const ClassErrors e = class_error_integrals(uR(gen), ub(gen), b0);
        const ClassMasses c = class_masses(b0);
        CHECK(e.I_plus >= 0.0);
        CHECK(e.I_minus >= 0.0);
        CHECK(e.I_plus <= c.c_plus * (1 + 1e-12));
        CHECK(e.I_minus <= c.c_minus * (1 + 1e-12));
    }
}

TEST_CASE("rates from direct outcome masses match one minus the error rates") {
    for (double R : {-0.7, 0.0, 0.5, 0.93}) {
        for (double b : {-1.0, 0.0, 0.8}) {
            const MetricsReport m = report(R, b, -0.6, 0.5);
            const ClassErrors e = class_error_integrals(R, b, -0.6);
            const ClassMasses c = class_masses(-0.6);
            CHECK(std::abs(m.recall - (1 - e.I_plus / c.c_plus)) < 1e-12);
            CHECK(std::abs(m.specificity - (1 - e.I_minus / c.c_minus)) < 1e-12);
        }
    }
}

TEST_CASE("report arithmetic") {
    const MetricsReport m = report_from_rates(0.8, 0.6, 0.5);
    CHECK(m.accuracy == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(m.balanced_accuracy == doctest::Approx(0.7).epsilon(1e-15));
    REQUIRE(m.precision);
    CHECK(*m.precision == doctest::Approx(0.8 / 1.2).epsilon(1e-15));
    REQUIRE(m.f1);
    CHECK(*m.f1 == doctest::Approx(2 * (0.8 / 1.2) * 0.8 / (0.8 / 1.2 + 0.8)).epsilon(1e-15));
    CHECK(*m.f1 == doctest::Approx(0.72727272727).epsilon(1e-10));
    CHECK(m.generalization_error == doctest::Approx(0.3).epsilon(1e-15));
    CHECK_THROWS_AS(report_from_rates(0.5, 0.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(report_from_rates(0.5, 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("perfect and constant students") {
    const MetricsReport perfect = report(1.0, -0.6, -0.6, 0.3);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.specificity == 1.0);
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.balanced_accuracy == 1.0);
    CHECK(*perfect.precision == 1.0);
    CHECK(*perfect.f1 == 1.0);
    CHECK(*perfect.precision_neg == 1.0);
    CHECK(*perfect.f1_neg == 1.0);
    CHECK(perfect.generalization_error == 0.0);

    const MetricsReport all_neg = report(0.4, -60.0, -0.6, 0.3);
    CHECK(all_neg.recall == 0.0);
    CHECK(all_neg.specificity == 1.0);
    CHECK(all_neg.accuracy == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(all_neg.balanced_accuracy == 0.5);
    // No predicted positives: precision and F1 are undefined, not 0.
    CHECK_FALSE(all_neg.precision.has_value());
    CHECK_FALSE(all_neg.f1.has_value());
    REQUIRE(all_neg.precision_neg);
    CHECK(*all_neg.precision_neg == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("exact metric identities over random inputs") {
    std::mt19937_64 gen(2718);
    std::uniform_real_distribution<double> uR(-1.0, 1.0), ub(-3.0, 3.0), ub0(-2.0, 0.5), urho(0.001, 0.999);
    for (int k = 0; k < 10000; ++k) {
        const double R = uR(gen), b = ub(gen), b0 = ub0(gen), rho = urho(gen);
        const MetricsReport m = report(R, b, b0, rho);
        CHECK(std::abs(m.accuracy - (rho * m.recall + (1 - rho) * m.specificity)) < 1e-14);
        CHECK(std::abs(m.balanced_accuracy - 0.5 * (m.recall + m.specificity)) < 1e-14);
        CHECK(std::abs(m.generalization_error - (1 - m.accuracy)) < 1e-14);
        if (m.precision && m.f1 && (*m.precision + m.recall) > 0) {
            CHECK(std::abs(*m.f1 - 2 * *m.precision * m.recall / (*m.precision + m.recall)) < 1e-12);
        }
        if (m.precision_neg && m.f1_neg && (*m.precision_neg + m.specificity) > 0) {
            CHECK(std::abs(*m.f1_neg - 2 * *m.precision_neg * m.specificity / (*m.precision_neg + m.specificity)) < 1e-12);
        }
        const MetricsReport other = report(R, b, b0, 0.5);
        CHECK(std::abs(other.balanced_accuracy - m.balanced_accuracy) < 1e-12);
    }
}

TEST_CASE("label flip at zero teacher bias") {
    for (double R : {-0.5, 0.1, 0.7, 0.99}) {
        for (double b : {-1.0, -0.2, 0.3, 2.0}) {
            const MetricsReport a = report(R, b, 0.0, 0.5);
            const MetricsReport f = report(R, -b, 0.0, 0.5);
            CHECK(std::abs(a.recall - f.specificity) < 1e-12);
        }
    }
}

TEST_CASE("recall grows with the student bias") {
    for (double b0 : {-0.3, -0.6, -1.5}) {
        for (double R : {0.2, 0.6, 0.95}) {
            double prev = -1.0;
            for (double b = -4.0; b <= 4.0; b += 0.05) {
                const double r = report(R, b, b0, 0.5).recall;
                CHECK(r >= prev - 1e-14);
                prev = r;
            }
        }
    }
}

TEST_CASE("train error is the beta-derivative of the energetic term") {
    const ControlParams cp(-0.6, 1.1, 0.5, 0.5);
    const SaddleSolution sol = solve(cp);
    REQUIRE(sol.converged);
    auto energy = [&](double beta) {
        const ControlParams c = cp.with_temperature(1.0 / beta);
        return c.rho_train() * energetic_term_plus(c, sol.params) +
               (1 - c.rho_train()) * energetic_term_minus(c, sol.params);
    };
    const double h = 1e-4;
    const double fd = (energy(cp.beta() + h) - energy(cp.beta() - h)) / (2 * h);
    const double et = train_error(cp, sol.params);
    CHECK(std::abs(et - fd) < 1e-5);
    CHECK(et >= 0.0);
    CHECK(et <= 1.0);
}

TEST_CASE("train error at infinite temperature is the chance misclassification") {
    const ControlParams cp(-0.6, 1.1, 1e8, 0.4);
    OrderParams op;
    op.R = 0.3;
    op.q = 0.5;
    op.b = -0.3;
    const double wrong_pos = class_integral(cp, op, ClassSide::positive, [](double u) { return 1.0 - gauss_tail_H(u); }, {});
    const double wrong_neg = class_integral(cp, op, ClassSide::negative, [](double u) { return gauss_tail_H(u); }, {});
    const double chance = 0.4 / cp.c_plus() * wrong_pos + 0.6 / cp.c_minus() * wrong_neg;
    CHECK(train_error(cp, op) == doctest::Approx(chance).epsilon(1e-7));
}

TEST_CASE("train error vanishes for a perfect student at low temperature") {
    const ControlParams cp(-0.6, 1.1, 0.02, 0.5);
    OrderParams op;
    op.q = 1.0 - 1e-8;
    op.R = std::sqrt(op.q - 1e-12);
    op.b = -0.6;
    CHECK(train_error(cp, op) < 1e-3);
}

TEST_CASE("boundary densities") {
    const BoundaryDensity zero = boundary_density(0.0);
    CHECK(zero.density_plus == zero.density_minus);
    const BoundaryDensity m1 = boundary_density(-1.0);
    CHECK(m1.density_plus == doctest::Approx(oracle::boundary_density_plus_m1).epsilon(1e-14));
    CHECK(m1.density_minus == doctest::Approx(oracle::boundary_density_minus_m1).epsilon(1e-14));
    const ClassMasses c = class_masses(-1.0);
    CHECK(m1.density_plus / m1.density_minus == doctest::Approx(c.c_minus / c.c_plus).epsilon(1e-14));
}
