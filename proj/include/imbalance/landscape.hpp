#pragma once

#include <functional>
#include <span>
#include <vector>

#include "imbalance/quadrature.hpp"

namespace imbalance {

/// Control knobs of the model. Validated on construction; beta and the
/// class masses are cached.
class ControlParams {
public:
    /// Throws std::invalid_argument unless alpha > 0, temperature > 0 (finite)
    /// and rho_train in [0, 1].
    ControlParams(double b0, double alpha, double temperature, double rho_train);

    double b0() const { return b0_; }
    double alpha() const { return alpha_; }
    double temperature() const { return temperature_; }
    double rho_train() const { return rho_train_; }
    double beta() const { return beta_; }
    double c_plus() const { return c_plus_; }
    double c_minus() const { return c_minus_; }

    ControlParams with_b0(double v) const { return {v, alpha_, temperature_, rho_train_}; }
    ControlParams with_alpha(double v) const { return {b0_, v, temperature_, rho_train_}; }
    ControlParams with_temperature(double v) const { return {b0_, alpha_, v, rho_train_}; }
    ControlParams with_rho_train(double v) const { return {b0_, alpha_, temperature_, v}; }

private:
    double b0_;
    double alpha_;
    double temperature_;
    double rho_train_;
    double beta_;
    double c_plus_;
    double c_minus_;
};

struct OrderParams {
    double R = 0.0;
    double q = 0.0;
    double R_hat = 0.0;
    double q_hat = 0.0;
    double b = 0.0;
};

/// Throws std::domain_error unless 0 <= q < 1, |R| <= 1 and R^2 <= q + 1e-12.
void check_order_params(const OrderParams& op);

enum class ClassSide { positive, negative };

/// reduced: exact one-dimensional form of the class double integral.
/// tensor: iterated (y, t) quadrature, kept as a cross-check.
enum class IntegrationRoute { reduced, tensor };

struct IntegrationOptions {
    QuadratureSpec spec{};
    IntegrationRoute route = IntegrationRoute::reduced;
    Execution exec = Execution::parallel;
};

/// (t sqrt(q - R^2) - y R - b) / sqrt(1 - q). Throws std::domain_error for q >= 1.
double integrand_u(double y, double t, const OrderParams& op);

/// Sharp features of the Boltzmann-weighted integrands in the local field u:
/// the sign change at u = 0 and, at large beta, the crossover at |u| = sqrt(2 beta).
std::vector<Feature> boltzmann_features(double beta);

/// Unnormalised class average: the integral over y in the class of Dy and
/// over t of Dt of F(u). u_features locate sharp transitions of F in u.
double class_integral(const ControlParams& cp, const OrderParams& op, ClassSide side,
                      const std::function<double(double)>& F, std::span<const Feature> u_features,
                      const IntegrationOptions& opts = {});

/// Integral of Dt F(v) with v = (t sqrt(q - R^2) + b0 R - b) / sqrt(1 - q),
/// the local field on the teacher boundary y = -b0.
double boundary_integral(const ControlParams& cp, const OrderParams& op, const std::function<double(double)>& F,
                         std::span<const Feature> u_features, const IntegrationOptions& opts = {});

/// Energetic terms; both are non-negative.
double energetic_term_plus(const ControlParams& cp, const OrderParams& op, const IntegrationOptions& opts = {});
double energetic_term_minus(const ControlParams& cp, const OrderParams& op, const IntegrationOptions& opts = {});

/// Entropic term with the Lagrange multiplier eliminated through
/// lambda = 1 / (1 - q) - q_hat, so that lambda + q_hat = 1 / (1 - q).
double entropic_term(const OrderParams& op);

/// G0 at an explicit lambda; used to check the elimination.
double entropic_term_at_lambda(const OrderParams& op, double lambda);

/// G0 - alpha rho G+ - alpha (1 - rho) G-. An absent class is not evaluated.
double variational_free_energy(const ControlParams& cp, const OrderParams& op, const IntegrationOptions& opts = {});

/// variational_free_energy with the conjugates fixed by the overlap
/// equations: R_hat = R / (1 - q), q_hat = q / (1 - q)^2 - R_hat^2.
double reduced_free_energy(const ControlParams& cp, double R, double q, double b, const IntegrationOptions& opts = {});

}  // namespace imbalance
