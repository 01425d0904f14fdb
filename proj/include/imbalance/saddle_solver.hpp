#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "imbalance/landscape.hpp"

namespace imbalance {

enum class BiasMode { learned_bias, fixed_bias };

struct SolverSettings {
    double damping = 0.3;
    double min_damping = 0.05;
    double tolerance = 1e-9;
    int max_iterations = 20000;
    /// Half-width of the bias root bracket; unset means max(5, 3 |b0|).
    std::optional<double> bias_bracket_halfwidth;
    double floor_epsilon = 1e-12;
    BiasMode mode = BiasMode::learned_bias;
    IntegrationOptions integration{};

    /// Throws std::invalid_argument on out-of-range fields.
    void validate() const;
    double bracket_for(double b0) const;
};

struct SaddleSolution {
    OrderParams params;
    /// Absolute residuals, in order: R - R_hat (1 - q), q - (q_hat + R_hat^2)(1 - q)^2,
    /// R_hat update, q_hat update, bias stationarity.
    std::array<double, 5> residuals{};
    double free_energy = 0.0;
    int iterations = 0;
    bool converged = false;
    /// Starting point of the iteration.
    OrderParams initial;
    std::string diagnostics;

    double residual_max() const;
};

struct Conjugates {
    double R_hat;
    double q_hat;
};

struct Overlaps {
    double R;
    double q;
};

/// Conjugate fields implied by the overlaps:
///   q_hat = alpha / (1 - q) sum_c w_c <g_c(u)^2>_c,
///   R_hat = alpha phi(b0) / sqrt(1 - q) [w_+ <g_+(v)>_t - w_- <g_-(v)>_t],
/// with w_+ = rho / c_+, w_- = (1 - rho) / c_-, g_+(u) = (1 - e^-beta) phi(u) / Z(u),
/// g_-(u) = -g_+(-u) and v the local field on the teacher boundary.
/// Equivalent to R_hat = -alpha dE/dR and q_hat = 2 alpha dE/dq for the
/// class-weighted energetic term E.
Conjugates update_conjugates(const ControlParams& cp, const OrderParams& op, const IntegrationOptions& opts = {});

/// Closed-form solution of R = R_hat (1 - q), q = (q_hat + R_hat^2)(1 - q)^2.
Overlaps update_overlaps(double R_hat, double q_hat);

/// dE/db: zero at the stationary bias, equal to -(1/alpha) times the
/// b-derivative of the variational free energy.
double bias_residual(const ControlParams& cp, const OrderParams& op, const IntegrationOptions& opts = {});

/// Residuals of the five stationarity equations at op.
std::array<double, 5> saddle_residuals(const ControlParams& cp, const OrderParams& op, BiasMode mode,
                                       const IntegrationOptions& opts = {});

/// The default starting point (R, q, R_hat, q_hat, b) = (0.1, 0.2, 0.1, 0.2, b0 / 2);
/// b = b0 in fixed-bias mode.
OrderParams default_initial(const ControlParams& cp, BiasMode mode);

/// Damped fixed-point iteration. Never throws on non-convergence; throws
/// std::runtime_error if the bias root cannot be bracketed after one widening.
SaddleSolution solve(const ControlParams& cp, const SolverSettings& settings = {},
                     std::optional<OrderParams> init = std::nullopt);

/// solve(), except that a bias-bracketing failure (the constant-classifier
/// regime) becomes a non-converged solution whose diagnostics carry the
/// message. params hold the starting point and residuals are NaN.
SaddleSolution solve_or_flag(const ControlParams& cp, const SolverSettings& settings = {},
                             std::optional<OrderParams> init = std::nullopt);

enum class SweepAxis { rho_train, temperature, alpha, b0 };

ControlParams with_axis(const ControlParams& cp, SweepAxis axis, double value);
double axis_value(const ControlParams& cp, SweepAxis axis);
const char* axis_name(SweepAxis axis);

/// Solves grid points in order, warm-starting from the last converged point.
/// Throws std::invalid_argument unless the grid is non-empty and strictly monotone.
std::vector<SaddleSolution> continuation_sweep(const ControlParams& cp_template, SweepAxis axis,
                                               const std::vector<double>& grid, const SolverSettings& settings = {});

}  // namespace imbalance
