#include "imbalance/saddle_solver.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "imbalance/special_functions.hpp"

namespace imbalance {

namespace {

// Class weights rho / c_+ and (1 - rho) / c_-; an absent class weighs 0.
struct ClassWeights {
    double plus;
    double minus;
};

ClassWeights class_weights(const ControlParams& cp) {
    const double rho = cp.rho_train();
    return {rho > 0.0 ? rho / cp.c_plus() : 0.0, rho < 1.0 ? (1.0 - rho) / cp.c_minus() : 0.0};
}

struct ForceTerms {
    double beta;
    double gap;  // 1 - e^-beta

    explicit ForceTerms(double b) : beta(b), gap(-std::expm1(-b)) {}
    // Minus the u-derivative of the positive-class log weight. The
    // denominator H(u) + e^-beta H(-u) is bounded below by e^-beta / 2.
    double plus(double u) const { return gap * boltzmann_ratio(u, beta); }
    double minus(double u) const { return -gap * boltzmann_ratio(-u, beta); }
};

double max_abs_difference(const OrderParams& a, const OrderParams& b) {
    return std::max({std::abs(a.R - b.R), std::abs(a.q - b.q), std::abs(a.R_hat - b.R_hat),
                     std::abs(a.q_hat - b.q_hat), std::abs(a.b - b.b)});
}

double solve_bias(const ControlParams& cp, OrderParams op, double centre, double halfwidth,
                  const IntegrationOptions& opts) {
    auto f = [&](double b) {
        op.b = b;
        return bias_residual(cp, op, opts);
    };
    for (int attempt = 0; attempt < 2; ++attempt) {
        const double w = halfwidth * (attempt == 0 ? 1.0 : 4.0);
        double lo = centre - w;
        double hi = centre + w;
        const double f_lo = f(lo);
        const double f_hi = f(hi);
        if (f_lo == 0.0) return lo;
        if (f_hi == 0.0) return hi;
        if ((f_lo < 0.0) == (f_hi < 0.0)) continue;
        std::uintmax_t max_iter = 200;
        auto tol = [](double a, double b) { return std::abs(a - b) <= 1e-14 * std::max(1.0, std::abs(a)); };
        const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, tol, max_iter);
        return 0.5 * (a + b);
    }
    // The usual cause: with a bounded per-sample penalty (e^-beta floor) an
    // imbalanced set past |log(rho / (1 - rho))| > beta is fit best by a
    // constant classifier, and the bias root runs off to infinity.
    std::ostringstream msg;
    msg << "bias root not bracketed around b = " << centre << " (half-width " << halfwidth
        << ", widened once); the bias diverges, constant-classifier regime";
    throw std::runtime_error(msg.str());
}

}  // namespace

void SolverSettings::validate() const {
    if (!(damping > 0.0 && damping <= 1.0)) throw std::invalid_argument("damping must lie in (0, 1]");
    if (!(min_damping > 0.0 && min_damping <= damping)) {
        throw std::invalid_argument("min_damping must lie in (0, damping]");
    }
    if (!(tolerance >= 1e-12) || !std::isfinite(tolerance)) throw std::invalid_argument("tolerance must be >= 1e-12");
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be positive");
    if (bias_bracket_halfwidth && !(*bias_bracket_halfwidth > 0.0)) {
        throw std::invalid_argument("bias_bracket_halfwidth must be > 0");
    }
    if (!(floor_epsilon > 0.0 && floor_epsilon < 1e-3)) {
        throw std::invalid_argument("floor_epsilon must lie in (0, 1e-3)");
    }
    integration.spec.validate();
}

double SolverSettings::bracket_for(double b0) const {
    return bias_bracket_halfwidth.value_or(std::max(5.0, 3.0 * std::abs(b0)));
}

double SaddleSolution::residual_max() const {
    double m = 0.0;
    for (double r : residuals) m = std::max(m, std::abs(r));
    return m;
}

Conjugates update_conjugates(const ControlParams& cp, const OrderParams& op, const IntegrationOptions& opts) {
    check_order_params(op);
    const ClassWeights w = class_weights(cp);
    const ForceTerms g(cp.beta());
    const auto features = boltzmann_features(cp.beta());
    const double one_minus_q = 1.0 - op.q;
    const double d = std::sqrt(one_minus_q);

    double sq_sum = 0.0;
    double boundary = 0.0;
    if (w.plus > 0.0) {
        sq_sum += w.plus * class_integral(
                               cp, op, ClassSide::positive, [&](double u) { return g.plus(u) * g.plus(u); },
                               features, opts);
        boundary += w.plus * boundary_integral(cp, op, [&](double v) { return g.plus(v); }, features, opts);
    }
    if (w.minus > 0.0) {
        sq_sum += w.minus * class_integral(
                                cp, op, ClassSide::negative, [&](double u) { return g.minus(u) * g.minus(u); },
                                features, opts);
        boundary -= w.minus * boundary_integral(cp, op, [&](double v) { return g.minus(v); }, features, opts);
    }
    const double alpha = cp.alpha();
    return {alpha * normal_pdf(cp.b0()) / d * boundary, alpha / one_minus_q * sq_sum};
}

Overlaps update_overlaps(double R_hat, double q_hat) {
    if (!(q_hat >= 0.0)) throw std::domain_error("update_overlaps: q_hat must be >= 0");
    const double D = q_hat + R_hat * R_hat;
    if (D == 0.0) return {0.0, 0.0};
    // 1 - q = (sqrt(4D + 1) - 1) / (2D) = 2 / (sqrt(4D + 1) + 1), free of cancellation.
    const double one_minus_q = 2.0 / (std::sqrt(4.0 * D + 1.0) + 1.0);
    const double q = 1.0 - one_minus_q;
    return {R_hat * one_minus_q, q};
}

double bias_residual(const ControlParams& cp, const OrderParams& op, const IntegrationOptions& opts) {
    check_order_params(op);
    const ClassWeights w = class_weights(cp);
    const ForceTerms g(cp.beta());
    const auto features = boltzmann_features(cp.beta());
    double sum = 0.0;
    if (w.plus > 0.0) {
        sum += w.plus * class_integral(cp, op, ClassSide::positive, [&](double u) { return g.plus(u); }, features, opts);
    }
    if (w.minus > 0.0) {
        sum += w.minus * class_integral(cp, op, ClassSide::negative, [&](double u) { return g.minus(u); }, features, opts);
    }
    return -sum / std::sqrt(1.0 - op.q);
}

std::array<double, 5> saddle_residuals(const ControlParams& cp, const OrderParams& op, BiasMode mode,
                                       const IntegrationOptions& opts) {
    const double one_minus_q = 1.0 - op.q;
    const Conjugates c = update_conjugates(cp, op, opts);
    return {op.R - op.R_hat * one_minus_q,
            op.q - (op.q_hat + op.R_hat * op.R_hat) * one_minus_q * one_minus_q,
            op.R_hat - c.R_hat,
            op.q_hat - c.q_hat,
            mode == BiasMode::fixed_bias ? 0.0 : bias_residual(cp, op, opts)};
}

OrderParams default_initial(const ControlParams& cp, BiasMode mode) {
    OrderParams op;
    op.R = 0.1;
    op.q = 0.2;
    op.R_hat = 0.1;
    op.q_hat = 0.2;
    op.b = mode == BiasMode::fixed_bias ? cp.b0() : 0.5 * cp.b0();
    return op;
}

SaddleSolution solve(const ControlParams& cp, const SolverSettings& settings, std::optional<OrderParams> init) {
    settings.validate();
    const bool fixed = settings.mode == BiasMode::fixed_bias;
    OrderParams op = init.value_or(default_initial(cp, settings.mode));
    if (fixed) op.b = cp.b0();
    check_order_params(op);

    SaddleSolution out;
    out.initial = op;
    const IntegrationOptions& opts = settings.integration;
    const double halfwidth = settings.bracket_for(cp.b0());
    const double q_ceiling = 1.0 - settings.floor_epsilon;

    auto overlaps_of = [&](OrderParams& target) {
        const Overlaps ov = update_overlaps(target.R_hat, target.q_hat);
        target.q = std::min(ov.q, q_ceiling);
        target.R = ov.R;
    };

    double eta = settings.damping;
    double previous_norm = std::numeric_limits<double>::infinity();
    int increases = 0;
    double norm = previous_norm;
    int it = 0;
    for (; it < settings.max_iterations; ++it) {
        OrderParams candidate = op;
        const Conjugates c = update_conjugates(cp, op, opts);
        candidate.R_hat = c.R_hat;
        candidate.q_hat = std::max(c.q_hat, 0.0);
        overlaps_of(candidate);
        if (!fixed) candidate.b = solve_bias(cp, candidate, op.b, halfwidth, opts);

        norm = max_abs_difference(candidate, op);
        if (!std::isfinite(norm)) {
            out.diagnostics = "non-finite update";
            break;
        }
        if (norm < settings.tolerance) break;

        increases = norm > previous_norm ? increases + 1 : 0;
        if (increases >= 5) {
            eta = std::max(0.5 * eta, settings.min_damping);
            increases = 0;
        }
        previous_norm = norm;

        op.R_hat = (1.0 - eta) * op.R_hat + eta * candidate.R_hat;
        op.q_hat = (1.0 - eta) * op.q_hat + eta * candidate.q_hat;
        op.b = (1.0 - eta) * op.b + eta * candidate.b;
        overlaps_of(op);
    }

    out.params = op;
    out.iterations = it;
    const IntegrationOptions fine{opts.spec.doubled(), opts.route, opts.exec};
    out.residuals = saddle_residuals(cp, op, settings.mode, fine);
    out.free_energy = variational_free_energy(cp, op, fine);
    const bool update_ok = norm < settings.tolerance;
    out.converged = update_ok && out.residual_max() < 10.0 * settings.tolerance;
    if (out.diagnostics.empty()) {
        std::ostringstream msg;
        if (!update_ok) {
            msg << "update norm " << norm << " after " << it << " iterations";
        } else if (!out.converged) {
            msg << "residual " << out.residual_max() << " exceeds 10x tolerance under doubled quadrature";
        }
        out.diagnostics = msg.str();
    }
    return out;
}

ControlParams with_axis(const ControlParams& cp, SweepAxis axis, double value) {
    switch (axis) {
        case SweepAxis::rho_train:
            return cp.with_rho_train(value);
        case SweepAxis::temperature:
            return cp.with_temperature(value);
        case SweepAxis::alpha:
            return cp.with_alpha(value);
        case SweepAxis::b0:
            return cp.with_b0(value);
    }
    return cp;
}

double axis_value(const ControlParams& cp, SweepAxis axis) {
    switch (axis) {
        case SweepAxis::rho_train:
            return cp.rho_train();
        case SweepAxis::temperature:
            return cp.temperature();
        case SweepAxis::alpha:
            return cp.alpha();
        case SweepAxis::b0:
            return cp.b0();
    }
    return 0.0;
}

const char* axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::rho_train:
            return "rho_train";
        case SweepAxis::temperature:
            return "T";
        case SweepAxis::alpha:
            return "alpha";
        case SweepAxis::b0:
            return "b0";
    }
    return "";
}

std::vector<SaddleSolution> continuation_sweep(const ControlParams& cp_template, SweepAxis axis,
                                               const std::vector<double>& grid, const SolverSettings& settings) {
    if (grid.empty()) throw std::invalid_argument("continuation_sweep: empty grid");
    if (grid.size() > 1) {
        const bool up = grid[1] > grid[0];
        for (std::size_t i = 1; i < grid.size(); ++i) {
            if (up ? !(grid[i] > grid[i - 1]) : !(grid[i] < grid[i - 1])) {
                throw std::invalid_argument("continuation_sweep: grid must be strictly monotone");
            }
        }
    }
    std::vector<SaddleSolution> out;
    out.reserve(grid.size());
    std::optional<OrderParams> warm;
    for (double value : grid) {
        const ControlParams cp = with_axis(cp_template, axis, value);
        SaddleSolution sol = solve_or_flag(cp, settings, warm);
        if (sol.converged) warm = sol.params;
        out.push_back(std::move(sol));
    }
    return out;
}

SaddleSolution solve_or_flag(const ControlParams& cp, const SolverSettings& settings, std::optional<OrderParams> init) {
    try {
        return solve(cp, settings, init);
    } catch (const std::runtime_error& e) {
        SaddleSolution failed;
        failed.params = init.value_or(default_initial(cp, settings.mode));
        failed.initial = failed.params;
        failed.residuals.fill(std::numeric_limits<double>::quiet_NaN());
        failed.free_energy = std::numeric_limits<double>::quiet_NaN();
        failed.diagnostics = e.what();
        return failed;
    }
}

}  // namespace imbalance
