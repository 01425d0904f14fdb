#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "imbalance/kernels.hpp"

namespace imbalance {

enum class QuadratureScheme { gauss_hermite, gauss_legendre_mapped };

/// Discretisation of the Gaussian measures Dt (node_count_t) and Dy
/// (node_count_y). Node counts are per 16 standard deviations of range.
struct QuadratureSpec {
    int node_count_t = 200;
    int node_count_y = 200;
    double truncation_radius = 8.0;
    QuadratureScheme scheme = QuadratureScheme::gauss_legendre_mapped;

    /// Throws std::invalid_argument unless node counts >= 8 and radius >= 6.
    void validate() const;
    QuadratureSpec doubled() const;
};

/// Gaussian measure on the full line or restricted to a half line.
class GaussianWeight {
public:
    enum class Kind { full, above, below };

    static GaussianWeight full_gaussian() { return {Kind::full, 0.0}; }
    static GaussianWeight gaussian_above(double a) { return {Kind::above, a}; }
    static GaussianWeight gaussian_below(double a) { return {Kind::below, a}; }

    Kind kind() const { return kind_; }
    double bound() const { return bound_; }
    /// Total mass of the weight: 1, H(a) or 1 - H(a).
    double mass() const;

private:
    GaussianWeight(Kind kind, double bound) : kind_(kind), bound_(bound) {}
    Kind kind_;
    double bound_;
};

/// A sharp transition of the integrand; the node layout is refined
/// geometrically around center down to scale width. A width of zero marks
/// a discontinuity (breakpoint only).
struct Feature {
    double center;
    double width;
};

/// Quadrature nodes with the Gaussian density folded into the weights.
struct NodeSet {
    std::vector<double> nodes;
    std::vector<double> weights;
};

class integration_error : public std::runtime_error {
public:
    integration_error(const std::string& what, std::vector<double> location)
        : std::runtime_error(what), location_(std::move(location)) {}
    /// Coordinates of the node where the integrand was not finite.
    const std::vector<double>& location() const { return location_; }

private:
    std::vector<double> location_;
};

/// Integration interval [lo, hi] used for a weight at the given radius.
std::pair<double, double> truncated_interval(GaussianWeight weight, double radius);

/// Weight mass outside truncated_interval, relative to weight.mass().
double neglected_tail_mass(GaussianWeight weight, double radius);

NodeSet gaussian_nodes(int node_count, double radius, QuadratureScheme scheme, GaussianWeight weight,
                       std::span<const Feature> features = {});

/// Gauss-Legendre rule on [-1, 1].
const NodeSet& gauss_legendre_rule(int n);
/// Gauss-Hermite rule for the standard normal density.
const NodeSet& gauss_hermite_rule(int n);

/// One-dimensional integral at the larger of the two spec node counts.
double integrate_1d(const std::function<double(double)>& f, const QuadratureSpec& spec,
                    GaussianWeight weight, std::span<const Feature> features = {},
                    Execution exec = Execution::parallel);

using FeatureProvider = std::function<std::vector<Feature>(double y)>;

/// Iterated integral over y (weight_y) of the full-Gaussian t integral of
/// f(y, t). t_features, when set, refines the t layout separately for each
/// outer node y.
double integrate_2d(const std::function<double(double, double)>& f, const QuadratureSpec& spec,
                    GaussianWeight weight_y, const FeatureProvider& t_features = {},
                    Execution exec = Execution::parallel);

}  // namespace imbalance
