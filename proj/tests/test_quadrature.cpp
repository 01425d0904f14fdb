#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "imbalance/quadrature.hpp"
#include "imbalance/special_functions.hpp"

using namespace imbalance;

namespace {

// Smooth battery: polynomials, exponentials and the tail function itself.
std::vector<std::function<double(double)>> smooth_battery() {
    return {
        [](double) { return 1.0; },
        [](double y) { return y * y; },
        [](double y) { return std::pow(y, 4); },
        [](double y) { return std::cos(y); },
        [](double y) { return std::exp(0.5 * y); },
        [](double y) { return gauss_tail_H(0.7 * y - 0.2); },
        [](double y) { return std::log1p(std::exp(-y)); },
    };
}

}  // namespace

TEST_CASE("spec validation") {
    QuadratureSpec spec;
    CHECK_NOTHROW(spec.validate());
    spec.node_count_t = 7;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = {};
    spec.truncation_radius = 5.5;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    const QuadratureSpec d = QuadratureSpec{}.doubled();
    CHECK(d.node_count_t == 400);
    CHECK(d.node_count_y == 400);
}

TEST_CASE("Gaussian moments on the full line") {
    const QuadratureSpec spec;
    CHECK(integrate_1d([](double) { return 1.0; }, spec, GaussianWeight::full_gaussian()) ==
          doctest::Approx(1.0).epsilon(1e-13));
    CHECK(integrate_1d([](double y) { return y * y; }, spec, GaussianWeight::full_gaussian()) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(integrate_1d([](double y) { return y; }, spec, GaussianWeight::full_gaussian())) < 1e-14);
    // y^6 puts about 3e-10 of its mass beyond the 8-sigma cut.
    CHECK(integrate_1d([](double y) { return std::pow(y, 6); }, spec, GaussianWeight::full_gaussian()) ==
          doctest::Approx(15.0).epsilon(5e-11));
    CHECK(integrate_1d([](double y) { return std::cos(y); }, spec, GaussianWeight::full_gaussian()) ==
          doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
}

TEST_CASE("half-line mass equals the tail function") {
    const QuadratureSpec spec;
    for (double a = -6.0; a <= 6.0; a += 0.25) {
        CAPTURE(a);
        const double above = integrate_1d([](double) { return 1.0; }, spec, GaussianWeight::gaussian_above(a));
        const double below = integrate_1d([](double) { return 1.0; }, spec, GaussianWeight::gaussian_below(a));
        CHECK(std::abs(above - gauss_tail_H(a)) < 1e-12 * std::max(1.0, 0.0) + 1e-15);
        CHECK(std::abs(above - gauss_tail_H(a)) / gauss_tail_H(a) < 1e-11);
        CHECK(std::abs(below - gauss_tail_H(-a)) / gauss_tail_H(-a) < 1e-11);
        CHECK(GaussianWeight::gaussian_above(a).mass() == gauss_tail_H(a));
    }
}

TEST_CASE("half-line first moment") {
    const QuadratureSpec spec;
    for (double a : {-3.0, -0.6, 0.0, 1.5, 4.0}) {
        const double m = integrate_1d([](double y) { return y; }, spec, GaussianWeight::gaussian_above(a));
        CHECK(m == doctest::Approx(normal_pdf(a)).epsilon(1e-11));
    }
}

TEST_CASE("tail bound of the truncated interval") {
    // Each cut tail holds at most H(8) < 1e-15 of absolute mass.
    CHECK(gauss_tail_H(8.0) < 1e-15);
    for (double a : {-6.0, -1.0, 0.0, 2.0, 6.0}) {
        for (const auto& w : {GaussianWeight::gaussian_above(a), GaussianWeight::gaussian_below(a)}) {
            CHECK(neglected_tail_mass(w, 8.0) * w.mass() <= gauss_tail_H(8.0) * (1 + 1e-12));
        }
    }
    CHECK(neglected_tail_mass(GaussianWeight::full_gaussian(), 8.0) == doctest::Approx(2 * gauss_tail_H(8.0)));
    const auto [lo, hi] = truncated_interval(GaussianWeight::gaussian_above(-2.0), 8.0);
    CHECK(lo == -2.0);
    CHECK(hi == 8.0);
    const auto [lo2, hi2] = truncated_interval(GaussianWeight::gaussian_below(3.0), 8.0);
    CHECK(lo2 == -8.0);
    CHECK(hi2 == 3.0);
}

TEST_CASE("doubling node counts changes the smooth battery by < 1e-9") {
    const QuadratureSpec spec;
    const QuadratureSpec fine = spec.doubled();
    const std::vector<GaussianWeight> weights = {GaussianWeight::full_gaussian(), GaussianWeight::gaussian_above(-0.6),
                                                 GaussianWeight::gaussian_below(-0.6),
                                                 GaussianWeight::gaussian_above(1.5)};
    for (const auto& f : smooth_battery()) {
        for (const auto& w : weights) {
            const double a = integrate_1d(f, spec, w);
            const double b = integrate_1d(f, fine, w);
            CHECK(std::abs(a - b) < 1e-9);
        }
    }
}

TEST_CASE("features refine a sharp step") {
    // H(u / 1e-3) is a near-step at u = 0.3; the exact integral is
    // P(Z > 0.3) to within O(width^2).
    const QuadratureSpec spec;
    const std::vector<Feature> features = {{0.3, 1e-3}};
    const double got = integrate_1d([](double y) { return gauss_tail_H(-(y - 0.3) / 1e-3); }, spec,
                                    GaussianWeight::full_gaussian(), features);
    CHECK(got == doctest::Approx(gauss_tail_H(0.3)).epsilon(1e-6));
    // A zero-width feature is a breakpoint: the indicator is integrated exactly.
    const std::vector<Feature> brk = {{0.3, 0.0}};
    const double ind = integrate_1d([](double y) { return y > 0.3 ? 1.0 : 0.0; }, spec,
                                    GaussianWeight::full_gaussian(), brk);
    CHECK(ind == doctest::Approx(gauss_tail_H(0.3)).epsilon(1e-12));
}

TEST_CASE("node sets are sorted with positive weights") {
    const std::vector<Feature> features = {{0.0, 0.05}, {2.0, 0.5}};
    const NodeSet ns = gaussian_nodes(200, 8.0, QuadratureScheme::gauss_legendre_mapped,
                                      GaussianWeight::gaussian_above(-0.6), features);
    REQUIRE(ns.nodes.size() == ns.weights.size());
    for (std::size_t i = 0; i + 1 < ns.nodes.size(); ++i) CHECK(ns.nodes[i] < ns.nodes[i + 1]);
    for (double w : ns.weights) CHECK(w > 0.0);
    CHECK(ns.nodes.front() >= -0.6);
}

TEST_CASE("Gauss-Hermite rule") {
    const NodeSet& gh = gauss_hermite_rule(40);
    double m0 = 0.0;
    double m2 = 0.0;
    double m8 = 0.0;
    for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
        m0 += gh.weights[i];
        m2 += gh.weights[i] * gh.nodes[i] * gh.nodes[i];
        m8 += gh.weights[i] * std::pow(gh.nodes[i], 8);
    }
    CHECK(m0 == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(m2 == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(m8 == doctest::Approx(105.0).epsilon(1e-12));
    QuadratureSpec spec;
    spec.scheme = QuadratureScheme::gauss_hermite;
    CHECK(integrate_1d([](double y) { return std::cos(y); }, spec, GaussianWeight::full_gaussian()) ==
          doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    // Half lines fall back to mapped Legendre panels.
    CHECK(integrate_1d([](double) { return 1.0; }, spec, GaussianWeight::gaussian_above(0.4)) ==
          doctest::Approx(gauss_tail_H(0.4)).epsilon(1e-11));
}

TEST_CASE("Gauss-Legendre rule integrates polynomials exactly") {
    const NodeSet& gl = gauss_legendre_rule(10);
    double s = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) s += gl.weights[i] * std::pow(gl.nodes[i], 18);
    CHECK(s == doctest::Approx(2.0 / 19.0).epsilon(1e-14));
}

TEST_CASE("two-dimensional integral factorises") {
    const QuadratureSpec spec;
    const auto g = [](double y) { return std::exp(-0.3 * y); };
    const auto h = [](double t) { return gauss_tail_H(0.5 * t + 0.1); };
    for (const auto& w : {GaussianWeight::full_gaussian(), GaussianWeight::gaussian_above(-0.6),
                          GaussianWeight::gaussian_below(1.2)}) {
        const double joint = integrate_2d([&](double y, double t) { return g(y) * h(t); }, spec, w);
        const double prod = integrate_1d(g, spec, w) * integrate_1d(h, spec, GaussianWeight::full_gaussian());
        CHECK(std::abs(joint - prod) < 1e-12);
    }
}

TEST_CASE("two-dimensional integral with per-row features") {
    const QuadratureSpec spec;
    // P(t > y) with y ~ N(0,1) restricted to y > 0: the step in t sits at t = y.
    const FeatureProvider feats = [](double y) { return std::vector<Feature>{{y, 0.0}}; };
    const double got = integrate_2d([](double y, double t) { return t > y ? 1.0 : 0.0; }, spec,
                                    GaussianWeight::gaussian_above(0.0), feats);
    CHECK(got == doctest::Approx(0.125).epsilon(1e-11));
}

TEST_CASE("non-finite integrand reports the node") {
    const QuadratureSpec spec;
    try {
        integrate_1d([](double y) { return y > 1.0 ? std::numeric_limits<double>::quiet_NaN() : 0.0; }, spec,
                     GaussianWeight::full_gaussian());
        FAIL("expected integration_error");
    } catch (const integration_error& e) {
        REQUIRE(e.location().size() == 1);
        CHECK(e.location()[0] > 1.0);
    }
    try {
        integrate_2d([](double y, double t) { return (y > 0.5 && t < -1.0) ? std::numeric_limits<double>::infinity() : 1.0; },
                     spec, GaussianWeight::full_gaussian());
        FAIL("expected integration_error");
    } catch (const integration_error& e) {
        REQUIRE(e.location().size() == 2);
        CHECK(e.location()[0] > 0.5);
        CHECK(e.location()[1] < -1.0);
    }
}

TEST_CASE("serial and parallel integration are bit-identical") {
    const QuadratureSpec spec;
    const auto f = [](double y) { return std::sin(3 * y) * gauss_tail_H(y); };
    const auto f2 = [](double y, double t) { return std::log1p(std::exp(y - t)); };
    for (const auto& w : {GaussianWeight::full_gaussian(), GaussianWeight::gaussian_above(-0.6)}) {
        CHECK(integrate_1d(f, spec, w, {}, Execution::serial) == integrate_1d(f, spec, w, {}, Execution::parallel));
        CHECK(integrate_2d(f2, spec, w, {}, Execution::serial) == integrate_2d(f2, spec, w, {}, Execution::parallel));
    }
}
