#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "imbalance/special_functions.hpp"
#include "oracle_values.hpp"

using namespace imbalance;

namespace {
double rel_err(double got, double want) {
    if (want == 0.0) return std::abs(got);
    return std::abs(got - want) / std::abs(want);
}
}  // namespace

TEST_CASE("tail function against high-precision values") {
    for (std::size_t i = 0; i < std::size(oracle::tail_x); ++i) {
        CAPTURE(oracle::tail_x[i]);
        CHECK(rel_err(gauss_tail_H(oracle::tail_x[i]), oracle::tail_H[i]) < 1e-12);
    }
    CHECK(gauss_tail_H(0.0) == 0.5);
    CHECK(gauss_tail_H(1.0) == doctest::Approx(0.158655253931457).epsilon(1e-14));
}

TEST_CASE("tail function limits at |x| = 40") {
    CHECK(gauss_tail_H(40.0) < 1e-300);
    // 1 - 1e-300 rounds to 1 in double precision; the deficit is what matters.
    CHECK(1.0 - gauss_tail_H(-40.0) < 1e-300);
}

TEST_CASE("tail function rejects non-finite input") {
    CHECK_THROWS_AS(gauss_tail_H(std::numeric_limits<double>::quiet_NaN()), std::domain_error);
    CHECK_THROWS_AS(gauss_tail_H(std::numeric_limits<double>::infinity()), std::domain_error);
    CHECK_THROWS_AS(log_gauss_tail_H(-std::numeric_limits<double>::infinity()), std::domain_error);
}

TEST_CASE("log tail stays finite and accurate past underflow") {
    for (std::size_t i = 0; i < std::size(oracle::tail_log_H_x); ++i) {
        const double x = oracle::tail_log_H_x[i];
        CAPTURE(x);
        const double want = oracle::tail_log_H[i];
        const double got = log_gauss_tail_H(x);
        CHECK(std::isfinite(got));
        CHECK(rel_err(got, want) < 1e-12);
    }
}

TEST_CASE("Mills ratio on both sides of the continued-fraction switch") {
    for (std::size_t i = 0; i < std::size(oracle::mills_x); ++i) {
        CAPTURE(oracle::mills_x[i]);
        CHECK(rel_err(mills_ratio(oracle::mills_x[i]), oracle::mills[i]) < 1e-13);
    }
}

TEST_CASE("H(x) + H(-x) = 1 and monotone decrease") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> dist(-40.0, 40.0);
    for (int k = 0; k < 10000; ++k) {
        const double x = dist(gen);
        CHECK(std::abs(gauss_tail_H(x) + gauss_tail_H(-x) - 1.0) < 1e-14);
    }
    double prev = 1.0;
    for (double x = -40.0; x <= 40.0; x += 0.01) {
        const double h = gauss_tail_H(x);
        CHECK(h <= prev);
        prev = h;
    }
}

TEST_CASE("intrinsic imbalance") {
    CHECK(rho_intrinsic(0.0) == 0.5);
    CHECK(std::abs(rho_intrinsic(-0.6) - 0.27) < 0.005);
    CHECK(std::abs(rho_intrinsic(-2.0) - 0.02) / 0.02 < 0.3);
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> dist(-8.0, 8.0);
    for (int k = 0; k < 10000; ++k) {
        const double b0 = dist(gen);
        CHECK(std::abs(rho_intrinsic(b0) + rho_intrinsic(-b0) - 1.0) < 1e-14);
        const ClassMasses m = class_masses(b0);
        CHECK(std::abs(m.c_plus + m.c_minus - 1.0) < 1e-14);
    }
    double prev = 0.0;
    for (double b0 = -8.0; b0 <= 8.0; b0 += 0.05) {
        const double r = rho_intrinsic(b0);
        CHECK(r > prev);
        prev = r;
    }
}

TEST_CASE("positive-class log weight") {
    CHECK(log_boltzmann_plus(1.0, 3.0) == 0.0);
    CHECK(log_boltzmann_plus(1.0, 1e3) == 0.0);
    CHECK(std::abs(log_boltzmann_plus(0.5, 1e-6)) < 1e-6);
    CHECK(rel_err(log_boltzmann_plus(1e-30, 20.0), oracle::log_boltzmann_plus_tiny) < 1e-14);
    CHECK(log_boltzmann_plus(0.0, 20.0) == doctest::Approx(-20.0).epsilon(1e-15));
    CHECK(log_boltzmann_plus(0.0, 1e3) == doctest::Approx(-1e3).epsilon(1e-15));
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(log_boltzmann_plus(0.0, inf), log_divergence_error);
    CHECK(log_boltzmann_plus(0.25, inf) == doctest::Approx(std::log(0.25)));
    CHECK_THROWS_AS(log_boltzmann_plus(1.5, 1.0), std::domain_error);
    CHECK_THROWS_AS(log_boltzmann_plus(0.5, 0.0), std::domain_error);
    CHECK_THROWS_AS(log_boltzmann_plus(0.5, -1.0), std::domain_error);
}

TEST_CASE("negative-class log weight") {
    CHECK(log_boltzmann_minus(0.0, 5.0) == 0.0);
    CHECK(rel_err(log_boltzmann_minus(0.7, 3.0), oracle::log_boltzmann_minus_mid) < 1e-14);
    CHECK(log_boltzmann_minus(1.0, 1e3) == doctest::Approx(-1e3).epsilon(1e-15));
    CHECK(std::isfinite(log_boltzmann_minus(1.0 - 1e-16, 1e3)));
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(log_boltzmann_minus(1.0, inf), log_divergence_error);
}

TEST_CASE("log weight in the field agrees with both forms") {
    for (std::size_t i = 0; i < std::size(oracle::boltz_u); ++i) {
        const double u = oracle::boltz_u[i];
        const double beta = oracle::boltz_beta[i];
        CAPTURE(u);
        CAPTURE(beta);
        const double want = oracle::log_boltz[i];
        CHECK(std::abs(log_boltzmann_u(u, beta) - want) <= 1e-13 * std::max(1.0, std::abs(want)));
        CHECK(rel_err(boltzmann_ratio(u, beta), oracle::boltz_ratio[i]) < 1e-12);
        CHECK(rel_err(thermal_error_fraction(u, beta), oracle::thermal_fraction[i]) < 1e-12);
    }
    // Where 1 - H(u) keeps its digits the H-form and the u-form coincide.
    for (double u = -3.0; u <= 3.0; u += 0.37) {
        for (double beta : {0.1, 2.0, 30.0}) {
            CHECK(log_boltzmann_u(u, beta) == doctest::Approx(log_boltzmann_plus(gauss_tail_H(u), beta)).epsilon(1e-12));
            CHECK(log_boltzmann_u(-u, beta) == doctest::Approx(log_boltzmann_minus(gauss_tail_H(u), beta)).epsilon(1e-12));
        }
    }
}

TEST_CASE("ratio is the field derivative of the log weight") {
    for (double beta : {0.5, 2.0, 40.0}) {
        const double kappa = std::exp(-beta);
        for (double u = -5.0; u <= 5.0; u += 0.5) {
            const double h = 1e-5;
            const double fd = (log_boltzmann_u(u + h, beta) - log_boltzmann_u(u - h, beta)) / (2 * h);
            CHECK(-fd == doctest::Approx((1 - kappa) * boltzmann_ratio(u, beta)).epsilon(1e-7));
        }
    }
}

TEST_CASE("log weights are finite up to beta = 1e3") {
    for (double u = -60.0; u <= 60.0; u += 0.5) {
        CHECK(std::isfinite(log_boltzmann_u(u, 1e3)));
        CHECK(std::isfinite(boltzmann_ratio(u, 1e3)));
        CHECK(std::isfinite(thermal_error_fraction(u, 1e3)));
    }
}
