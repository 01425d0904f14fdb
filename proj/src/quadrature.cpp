#include "imbalance/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "imbalance/special_functions.hpp"

namespace imbalance {

namespace {

// Width of the base Gauss-Legendre panels, in standard deviations.
constexpr double base_panel_width = 2.0;
// node_count is the number of nodes per this much range.
constexpr double node_count_span = 16.0;
// Refinement stops once a feature's geometric ring reaches this scale.
constexpr double min_feature_width = 1e-9;
constexpr double breakpoint_merge = 1e-12;

NodeSet compute_gauss_legendre(int n) {
    NodeSet rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0;
            double p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double step = p1 / pp;
            z -= step;
            if (std::abs(step) < 1e-16) break;
        }
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        rule.weights[i] = rule.weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
    return rule;
}

// Golub-Welsch on the Jacobi matrix of the probabilists' Hermite
// polynomials, then one Newton polish per root. The Newton starting guesses
// of the classical recipe diverge beyond about 150 nodes.
NodeSet compute_gauss_hermite(int n) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd off(std::max(n - 1, 0));
    for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    eig.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
    if (eig.info() != Eigen::Success) throw std::runtime_error("gauss_hermite_rule: eigen-solve failed");

    NodeSet rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = eig.eigenvalues()[i];
        double w = eig.eigenvectors()(0, i) * eig.eigenvectors()(0, i);
        // Orthonormal recurrence p_{k+1} = (x p_k - sqrt(k) p_{k-1}) / sqrt(k + 1).
        double p1 = 1.0;
        double p0 = 0.0;
        for (int k = 0; k < n; ++k) {
            const double next = (x * p1 - std::sqrt(static_cast<double>(k)) * p0) / std::sqrt(k + 1.0);
            p0 = p1;
            p1 = next;
        }
        const double deriv = std::sqrt(static_cast<double>(n)) * p0;
        const double step = p1 / deriv;
        if (std::isfinite(step) && std::abs(step) < 1e-8) {
            x -= step;
            const double w_newton = 1.0 / (n * p0 * p0);
            if (std::isfinite(w_newton) && w_newton > 0.0) w = w_newton;
        }
        rule.nodes[i] = x;
        rule.weights[i] = w;
    }
    return rule;
}

// Rules are computed once per size; returned references stay valid.
class RuleCache {
public:
    explicit RuleCache(NodeSet (*compute)(int)) : compute_(compute) {}

    const NodeSet& get(int n) {
        std::lock_guard lock(mutex_);
        auto& slot = rules_[n];
        if (!slot) slot = std::make_unique<const NodeSet>(compute_(n));
        return *slot;
    }

private:
    NodeSet (*compute_)(int);
    std::mutex mutex_;
    std::map<int, std::unique_ptr<const NodeSet>> rules_;
};

std::vector<double> panel_breakpoints(double lo, double hi, std::span<const Feature> features) {
    std::vector<double> points;
    const int base = std::max(1, static_cast<int>(std::ceil((hi - lo) / base_panel_width - 1e-12)));
    for (int k = 0; k <= base; ++k) points.push_back(lo + (hi - lo) * k / base);

    for (const Feature& f : features) {
        if (!std::isfinite(f.center) || !std::isfinite(f.width)) continue;
        const double width = std::max(std::abs(f.width), min_feature_width);
        points.push_back(f.center);
        for (double ring = width; ring < base_panel_width; ring *= 2.0) {
            points.push_back(f.center - ring);
            points.push_back(f.center + ring);
        }
    }

    std::vector<double> kept;
    for (double p : points) {
        if (p >= lo && p <= hi) kept.push_back(p);
    }
    std::sort(kept.begin(), kept.end());
    std::vector<double> merged;
    for (double p : kept) {
        if (merged.empty() || p - merged.back() > breakpoint_merge * std::max(1.0, std::abs(p))) {
            merged.push_back(p);
        }
    }
    if (merged.back() < hi) merged.back() = hi;
    return merged;
}

int nodes_per_panel(int node_count) {
    return std::max(8, static_cast<int>(std::ceil(node_count * base_panel_width / node_count_span)));
}

std::string describe(double x) {
    std::ostringstream out;
    out.precision(17);
    out << x;
    return out.str();
}

}  // namespace

void QuadratureSpec::validate() const {
    if (node_count_t < 8 || node_count_y < 8) {
        throw std::invalid_argument("QuadratureSpec: node counts must be >= 8");
    }
    if (!(truncation_radius >= 6.0) || !std::isfinite(truncation_radius)) {
        throw std::invalid_argument("QuadratureSpec: truncation_radius must be >= 6");
    }
}

QuadratureSpec QuadratureSpec::doubled() const {
    QuadratureSpec out = *this;
    out.node_count_t *= 2;
    out.node_count_y *= 2;
    return out;
}

double GaussianWeight::mass() const {
    switch (kind_) {
        case Kind::full:
            return 1.0;
        case Kind::above:
            return gauss_tail_H(bound_);
        case Kind::below:
            return gauss_tail_H(-bound_);
    }
    return 1.0;
}

std::pair<double, double> truncated_interval(GaussianWeight weight, double radius) {
    switch (weight.kind()) {
        case GaussianWeight::Kind::full:
            return {-radius, radius};
        case GaussianWeight::Kind::above: {
            const double a = weight.bound();
            return {std::max(a, -radius), std::max(a, 0.0) + radius};
        }
        case GaussianWeight::Kind::below: {
            const double a = weight.bound();
            return {std::min(a, 0.0) - radius, std::min(a, radius)};
        }
    }
    return {-radius, radius};
}

double neglected_tail_mass(GaussianWeight weight, double radius) {
    const auto [lo, hi] = truncated_interval(weight, radius);
    double lost = 0.0;
    switch (weight.kind()) {
        case GaussianWeight::Kind::full:
            lost = gauss_tail_H(-lo) + gauss_tail_H(hi);
            break;
        case GaussianWeight::Kind::above:
            lost = gauss_tail_H(hi) + (lo > weight.bound() ? gauss_tail_H(-lo) - gauss_tail_H(-weight.bound()) : 0.0);
            break;
        case GaussianWeight::Kind::below:
            lost = gauss_tail_H(-lo) + (hi < weight.bound() ? gauss_tail_H(hi) - gauss_tail_H(weight.bound()) : 0.0);
            break;
    }
    return lost / weight.mass();
}

const NodeSet& gauss_legendre_rule(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre_rule: n must be positive");
    static RuleCache cache(&compute_gauss_legendre);
    return cache.get(n);
}

const NodeSet& gauss_hermite_rule(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite_rule: n must be positive");
    static RuleCache cache(&compute_gauss_hermite);
    return cache.get(n);
}

NodeSet gaussian_nodes(int node_count, double radius, QuadratureScheme scheme, GaussianWeight weight,
                       std::span<const Feature> features) {
    if (!std::isfinite(weight.bound())) {
        throw std::invalid_argument("gaussian_nodes: half-line bound must be finite");
    }
    // Hermite nodes only cover the full line and cannot be refined.
    if (scheme == QuadratureScheme::gauss_hermite && weight.kind() == GaussianWeight::Kind::full &&
        features.empty()) {
        return gauss_hermite_rule(node_count);
    }
    const auto [lo, hi] = truncated_interval(weight, radius);
    NodeSet out;
    if (!(hi > lo)) return out;
    const std::vector<double> points = panel_breakpoints(lo, hi, features);
    const NodeSet& rule = gauss_legendre_rule(nodes_per_panel(node_count));
    out.nodes.reserve((points.size() - 1) * rule.nodes.size());
    out.weights.reserve(out.nodes.capacity());
    for (std::size_t p = 0; p + 1 < points.size(); ++p) {
        const double mid = 0.5 * (points[p] + points[p + 1]);
        const double half = 0.5 * (points[p + 1] - points[p]);
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
            const double x = mid + half * rule.nodes[k];
            out.nodes.push_back(x);
            out.weights.push_back(half * rule.weights[k] * normal_pdf(x));
        }
    }
    return out;
}

double integrate_1d(const std::function<double(double)>& f, const QuadratureSpec& spec, GaussianWeight weight,
                    std::span<const Feature> features, Execution exec) {
    spec.validate();
    const int count = std::max(spec.node_count_t, spec.node_count_y);
    const NodeSet set = gaussian_nodes(count, spec.truncation_radius, spec.scheme, weight, features);
    const double total = kernels::weighted_sum(set.nodes, set.weights, f, exec);
    if (std::isfinite(total)) return total;
    for (double x : set.nodes) {
        if (!std::isfinite(f(x))) {
            throw integration_error("integrate_1d: integrand not finite at x = " + describe(x), {x});
        }
    }
    throw integration_error("integrate_1d: non-finite sum", {});
}

double integrate_2d(const std::function<double(double, double)>& f, const QuadratureSpec& spec,
                    GaussianWeight weight_y, const FeatureProvider& t_features, Execution exec) {
    spec.validate();
    const NodeSet outer =
        gaussian_nodes(spec.node_count_y, spec.truncation_radius, spec.scheme, weight_y, {});
    const NodeSet plain_inner = gaussian_nodes(spec.node_count_t, spec.truncation_radius, spec.scheme,
                                               GaussianWeight::full_gaussian(), {});
    auto inner = [&](double y) {
        auto g = [&](double t) { return f(y, t); };
        NodeSet refined;
        const NodeSet* set = &plain_inner;
        if (t_features) {
            const std::vector<Feature> feats = t_features(y);
            refined = gaussian_nodes(spec.node_count_t, spec.truncation_radius, spec.scheme,
                                     GaussianWeight::full_gaussian(), feats);
            set = &refined;
        }
        const double value = kernels::weighted_sum_serial(set->nodes, set->weights, g);
        if (!std::isfinite(value)) {
            for (double t : set->nodes) {
                if (!std::isfinite(g(t))) {
                    throw integration_error(
                        "integrate_2d: integrand not finite at (y, t) = (" + describe(y) + ", " + describe(t) + ")",
                        {y, t});
                }
            }
        }
        return value;
    };
    const double total = kernels::outer_sum(outer.nodes, outer.weights, inner, exec);
    if (!std::isfinite(total)) throw integration_error("integrate_2d: non-finite sum", {});
    return total;
}

}  // namespace imbalance
