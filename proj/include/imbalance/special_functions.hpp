#pragma once

#include <stdexcept>

namespace imbalance {

/// Raised when a log-weight diverges (zero argument at infinite beta).
class log_divergence_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

double normal_pdf(double x);
double log_normal_pdf(double x);

/// Gaussian tail H(x) = P(Z > x) = erfc(x / sqrt 2) / 2.
/// Throws std::domain_error for non-finite x.
double gauss_tail_H(double x);

/// log H(x), finite for every finite x (uses the Mills-ratio continued
/// fraction once erfc would underflow).
double log_gauss_tail_H(double x);

/// Mills ratio H(x) / phi(x).
double mills_ratio(double x);

struct ClassMasses {
    double c_plus;
    double c_minus;
};

/// Population mass of the positive (anomalous) and negative class for
/// teacher bias b0. c_minus is computed as H(b0), not 1 - c_plus.
ClassMasses class_masses(double b0);

/// Intrinsic anomaly fraction, equal to class_masses(b0).c_plus.
double rho_intrinsic(double b0);

/// log(e^-beta + (1 - e^-beta) h) for the positive class.
/// Throws log_divergence_error when h == 0 and beta is infinite.
double log_boltzmann_plus(double h, double beta);

/// log((e^-beta - 1) h + 1) for the negative class, via log1p.
/// Throws log_divergence_error when h == 1 and beta is infinite.
double log_boltzmann_minus(double h, double beta);

/// log(H(u) + e^-beta H(-u)): the positive-class log-weight as a function
/// of the local field u, evaluated entirely in log space. The negative
/// class weight is log_boltzmann_u(-u, beta).
double log_boltzmann_u(double u, double beta);

/// phi(u) / (H(u) + e^-beta H(-u)). Multiplied by (1 - e^-beta) this is
/// minus the u-derivative of log_boltzmann_u.
double boltzmann_ratio(double u, double beta);

/// e^-beta H(-u) / (H(u) + e^-beta H(-u)): the thermal probability that a
/// positive sample at field u is misclassified.
double thermal_error_fraction(double u, double beta);

double log_add_exp(double a, double b);

}  // namespace imbalance
