#include "imbalance/landscape.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "imbalance/special_functions.hpp"

namespace imbalance {

ControlParams::ControlParams(double b0, double alpha, double temperature, double rho_train)
    : b0_(b0), alpha_(alpha), temperature_(temperature), rho_train_(rho_train) {
    if (!std::isfinite(b0)) throw std::invalid_argument("b0 must be finite");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be > 0");
    // T = 0 is the ground state and is not supported.
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
        throw std::invalid_argument("temperature must be > 0 and finite");
    }
    if (!(rho_train >= 0.0 && rho_train <= 1.0)) throw std::invalid_argument("rho_train must lie in [0, 1]");
    beta_ = 1.0 / temperature;
    const ClassMasses masses = class_masses(b0);
    c_plus_ = masses.c_plus;
    c_minus_ = masses.c_minus;
}

void check_order_params(const OrderParams& op) {
    if (!std::isfinite(op.R) || !std::isfinite(op.q) || !std::isfinite(op.R_hat) || !std::isfinite(op.q_hat) ||
        !std::isfinite(op.b)) {
        throw std::domain_error("order parameters must be finite");
    }
    if (!(op.q >= 0.0 && op.q < 1.0)) throw std::domain_error("q must lie in [0, 1)");
    if (std::abs(op.R) > 1.0) throw std::domain_error("|R| must not exceed 1");
    if (op.R * op.R > op.q + 1e-12) throw std::domain_error("R^2 must not exceed q");
}

namespace {

struct FieldScales {
    double d;   // sqrt(1 - q)
    double s;   // sqrt(max(q - R^2, 0))
    double sq;  // sqrt(q)
};

FieldScales field_scales(const OrderParams& op) {
    if (!(op.q < 1.0)) throw std::domain_error("q >= 1: local field is singular");
    return {std::sqrt(1.0 - op.q), std::sqrt(std::max(op.q - op.R * op.R, 0.0)), std::sqrt(std::max(op.q, 0.0))};
}

double class_mass(const ControlParams& cp, ClassSide side) {
    return side == ClassSide::positive ? cp.c_plus() : cp.c_minus();
}

// Writing t s - y R = sqrt(q) z, y given z is normal with mean -R z / sqrt(q)
// and standard deviation sqrt((q - R^2) / q); the y constraint then
// integrates out in closed form.
double class_integral_reduced(const ControlParams& cp, const OrderParams& op, ClassSide side,
                              const std::function<double(double)>& F, std::span<const Feature> u_features,
                              const IntegrationOptions& opts) {
    const FieldScales fs = field_scales(op);
    if (fs.sq == 0.0) {
        return class_mass(cp, side) * F(-op.b / fs.d);
    }
    const double a = -cp.b0();
    const double coef = op.R / fs.sq;
    const double sigma = fs.s / fs.sq;
    const double sign = side == ClassSide::positive ? 1.0 : -1.0;

    auto class_probability = [=](double z) {
        const double arg = a + coef * z;
        if (sigma == 0.0) {
            const double x = sign * arg;
            return x < 0.0 ? 1.0 : (x > 0.0 ? 0.0 : 0.5);
        }
        return gauss_tail_H(sign * arg / sigma);
    };

    std::vector<Feature> features;
    for (const Feature& f : u_features) {
        features.push_back({(op.b + fs.d * f.center) / fs.sq, fs.d * f.width / fs.sq});
    }
    if (coef != 0.0) features.push_back({-a / coef, sigma / std::abs(coef)});

    QuadratureSpec spec = opts.spec;
    spec.truncation_radius += std::abs(cp.b0());
    auto integrand = [&](double z) {
        const double p = class_probability(z);
        return p == 0.0 ? 0.0 : p * F((fs.sq * z - op.b) / fs.d);
    };
    return integrate_1d(integrand, spec, GaussianWeight::full_gaussian(), features, opts.exec);
}

double class_integral_tensor(const ControlParams& cp, const OrderParams& op, ClassSide side,
                             const std::function<double(double)>& F, std::span<const Feature> u_features,
                             const IntegrationOptions& opts) {
    const FieldScales fs = field_scales(op);
    const GaussianWeight weight = side == ClassSide::positive ? GaussianWeight::gaussian_above(-cp.b0())
                                                               : GaussianWeight::gaussian_below(-cp.b0());
    auto f = [&](double y, double t) { return F((t * fs.s - y * op.R - op.b) / fs.d); };
    FeatureProvider provider;
    if (fs.s > 0.0 && !u_features.empty()) {
        provider = [&](double y) {
            std::vector<Feature> out;
            for (const Feature& feat : u_features) {
                out.push_back({(fs.d * feat.center + y * op.R + op.b) / fs.s, fs.d * feat.width / fs.s});
            }
            return out;
        };
    }
    return integrate_2d(f, opts.spec, weight, provider, opts.exec);
}

}  // namespace

double integrand_u(double y, double t, const OrderParams& op) {
    const FieldScales fs = field_scales(op);
    return (t * fs.s - y * op.R - op.b) / fs.d;
}

std::vector<Feature> boltzmann_features(double beta) {
    std::vector<Feature> out{{0.0, 1.0}};
    if (beta > 2.0) {
        const double edge = std::sqrt(2.0 * beta);
        out.push_back({edge, 1.0 / edge});
        out.push_back({-edge, 1.0 / edge});
    }
    return out;
}

double class_integral(const ControlParams& cp, const OrderParams& op, ClassSide side,
                      const std::function<double(double)>& F, std::span<const Feature> u_features,
                      const IntegrationOptions& opts) {
    if (opts.route == IntegrationRoute::tensor) {
        return class_integral_tensor(cp, op, side, F, u_features, opts);
    }
    return class_integral_reduced(cp, op, side, F, u_features, opts);
}

double boundary_integral(const ControlParams& cp, const OrderParams& op, const std::function<double(double)>& F,
                         std::span<const Feature> u_features, const IntegrationOptions& opts) {
    const FieldScales fs = field_scales(op);
    const double offset = cp.b0() * op.R - op.b;
    if (fs.s == 0.0) return F(offset / fs.d);
    std::vector<Feature> features;
    for (const Feature& f : u_features) {
        features.push_back({(fs.d * f.center - offset) / fs.s, fs.d * f.width / fs.s});
    }
    auto integrand = [&](double t) { return F((t * fs.s + offset) / fs.d); };
    return integrate_1d(integrand, opts.spec, GaussianWeight::full_gaussian(), features, opts.exec);
}

double energetic_term_plus(const ControlParams& cp, const OrderParams& op, const IntegrationOptions& opts) {
    const double beta = cp.beta();
    const auto features = boltzmann_features(beta);
    auto log_weight = [beta](double u) { return log_boltzmann_u(u, beta); };
    return -class_integral(cp, op, ClassSide::positive, log_weight, features, opts) / cp.c_plus();
}

double energetic_term_minus(const ControlParams& cp, const OrderParams& op, const IntegrationOptions& opts) {
    const double beta = cp.beta();
    const auto features = boltzmann_features(beta);
    auto log_weight = [beta](double u) { return log_boltzmann_u(-u, beta); };
    return -class_integral(cp, op, ClassSide::negative, log_weight, features, opts) / cp.c_minus();
}

double entropic_term_at_lambda(const OrderParams& op, double lambda) {
    const double denom = lambda + op.q_hat;
    if (!(denom > 0.0)) throw std::domain_error("entropic term requires lambda + q_hat > 0");
    return -op.R_hat * op.R + 0.5 * op.q * op.q_hat + 0.5 * lambda - 0.5 * std::log(denom) +
           0.5 * (op.R_hat * op.R_hat + op.q_hat) / denom - 0.5;
}

double entropic_term(const OrderParams& op) {
    if (!(op.q < 1.0)) throw std::domain_error("entropic term is singular at q >= 1");
    // q_hat cancels once lambda + q_hat = 1 / (1 - q).
    const double one_minus_q = 1.0 - op.q;
    return -op.R_hat * op.R + 0.5 * op.R_hat * op.R_hat * one_minus_q + 0.5 * op.q / one_minus_q +
           0.5 * std::log1p(-op.q);
}

double variational_free_energy(const ControlParams& cp, const OrderParams& op, const IntegrationOptions& opts) {
    double value = entropic_term(op);
    const double rho = cp.rho_train();
    if (rho > 0.0) value -= cp.alpha() * rho * energetic_term_plus(cp, op, opts);
    if (rho < 1.0) value -= cp.alpha() * (1.0 - rho) * energetic_term_minus(cp, op, opts);
    return value;
}

double reduced_free_energy(const ControlParams& cp, double R, double q, double b, const IntegrationOptions& opts) {
    OrderParams op;
    op.R = R;
    op.q = q;
    op.b = b;
    op.R_hat = R / (1.0 - q);
    op.q_hat = q / ((1.0 - q) * (1.0 - q)) - op.R_hat * op.R_hat;
    return variational_free_energy(cp, op, opts);
}

}  // namespace imbalance
