#pragma once

#include <optional>

#include "imbalance/landscape.hpp"

namespace imbalance {

/// Ratio metrics whose denominator vanishes are left empty.
struct MetricsReport {
    double recall = 0.0;
    double specificity = 0.0;
    double accuracy = 0.0;
    double balanced_accuracy = 0.0;
    std::optional<double> precision;
    std::optional<double> f1;
    std::optional<double> precision_neg;
    std::optional<double> f1_neg;
    double generalization_error = 0.0;
    double rho_test = 0.5;
};

struct ClassErrors {
    double I_plus;   // mass of positives classified negative
    double I_minus;  // mass of negatives classified positive
};

/// Misclassified population mass per class for a student at overlap R and
/// bias b. |R| = 1 is handled as the exact limit.
ClassErrors class_error_integrals(double R, double b, double b0, const QuadratureSpec& spec = {});

/// Metrics from recall and specificity at test imbalance rho_test in (0, 1).
MetricsReport report_from_rates(double recall, double specificity, double rho_test);

MetricsReport report(double R, double b, double b0, double rho_test, const QuadratureSpec& spec = {});

/// Thermal training error: the beta-derivative of the class-weighted energetic term.
double train_error(const ControlParams& cp, const OrderParams& op, const IntegrationOptions& opts = {});

struct BoundaryDensity {
    double density_plus;
    double density_minus;
};

/// phi(b0) / c_+ and phi(b0) / c_-: class-conditional density at the
/// teacher boundary.
BoundaryDensity boundary_density(double b0);

}  // namespace imbalance
