#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "imbalance/kernels.hpp"

using namespace imbalance;

namespace {

struct Matrix {
    std::size_t rows;
    std::size_t dim;
    std::vector<float> data;
};

Matrix random_matrix(std::size_t rows, std::size_t dim, unsigned seed) {
    std::mt19937 gen(seed);
    std::normal_distribution<float> nd;
    Matrix m{rows, dim, std::vector<float>(rows * dim)};
    for (auto& x : m.data) x = nd(gen);
    return m;
}

std::vector<double> random_vector(std::size_t n, unsigned seed) {
    std::mt19937 gen(seed);
    std::normal_distribution<double> nd;
    std::vector<double> v(n);
    for (auto& x : v) x = nd(gen);
    return v;
}

}  // namespace

TEST_CASE("weighted sums agree bitwise for every size") {
    for (std::size_t n : {0u, 1u, 127u, 128u, 129u, 1000u, 4097u}) {
        const auto nodes = random_vector(n, 3);
        const auto weights = random_vector(n, 4);
        const auto f = [](double x) { return std::exp(-x * x) + x; };
        const double s = kernels::weighted_sum_serial(nodes, weights, f);
        const double p = kernels::weighted_sum_parallel(nodes, weights, f);
        CHECK(s == p);
        double naive = 0.0;
        for (std::size_t i = 0; i < n; ++i) naive += weights[i] * f(nodes[i]);
        CHECK(s == doctest::Approx(naive).epsilon(1e-12));
    }
}

TEST_CASE("outer sums agree bitwise") {
    const auto nodes = random_vector(333, 5);
    const auto weights = random_vector(333, 6);
    const auto inner = [](double y) { return std::sin(y) * std::cos(2 * y); };
    CHECK(kernels::outer_sum_serial(nodes, weights, inner) == kernels::outer_sum_parallel(nodes, weights, inner));
}

TEST_CASE("kernel exceptions propagate out of the parallel region") {
    const auto nodes = random_vector(1000, 1);
    const auto weights = random_vector(1000, 2);
    const auto bad = [](double x) -> double {
        if (x > 2.0) throw std::runtime_error("bad node");
        return x;
    };
    CHECK_THROWS_AS(kernels::weighted_sum_parallel(nodes, weights, bad), std::runtime_error);
    CHECK_THROWS_AS(kernels::outer_sum_parallel(nodes, weights, bad), std::runtime_error);
}

TEST_CASE("affine and gathered scores agree bitwise") {
    for (std::size_t dim : {1u, 7u, 64u, 501u}) {
        const Matrix m = random_matrix(300, dim, 9);
        const auto w = random_vector(dim, 10);
        std::vector<double> s(300), p(300);
        kernels::affine_scores_serial(m.data, dim, w, 0.25, -0.1, s);
        kernels::affine_scores_parallel(m.data, dim, w, 0.25, -0.1, p);
        CHECK(s == p);
        for (std::size_t r = 0; r < 300; ++r) {
            double naive = 0.0;
            for (std::size_t j = 0; j < dim; ++j) naive += double(m.data[r * dim + j]) * w[j];
            CHECK(s[r] == doctest::Approx(0.25 * naive - 0.1).epsilon(1e-12));
        }
        std::vector<std::size_t> idx = {5, 299, 0, 17, 17, 150};
        std::vector<double> gs(idx.size()), gp(idx.size());
        kernels::gather_scores_serial(m.data, dim, idx, w, 0.25, -0.1, gs);
        kernels::gather_scores_parallel(m.data, dim, idx, w, 0.25, -0.1, gp);
        CHECK(gs == gp);
        for (std::size_t k = 0; k < idx.size(); ++k) CHECK(gs[k] == s[idx[k]]);
    }
}

TEST_CASE("row accumulation agrees bitwise") {
    for (std::size_t dim : {3u, 128u, 1000u}) {
        const Matrix m = random_matrix(64, dim, 12);
        std::vector<std::size_t> idx(20);
        std::iota(idx.begin(), idx.end(), 0);
        std::reverse(idx.begin(), idx.end());
        const auto coeffs = random_vector(idx.size(), 13);
        auto s = random_vector(dim, 14);
        auto p = s;
        auto naive = s;
        kernels::accumulate_rows_serial(m.data, dim, idx, coeffs, s);
        kernels::accumulate_rows_parallel(m.data, dim, idx, coeffs, p);
        CHECK(s == p);
        for (std::size_t k = 0; k < idx.size(); ++k) {
            for (std::size_t j = 0; j < dim; ++j) naive[j] += coeffs[k] * m.data[idx[k] * dim + j];
        }
        for (std::size_t j = 0; j < dim; ++j) CHECK(s[j] == doctest::Approx(naive[j]).epsilon(1e-12));
    }
}

TEST_CASE("dispatch selects the requested variant") {
    const Matrix m = random_matrix(50, 33, 21);
    const auto w = random_vector(33, 22);
    std::vector<double> a(50), b(50);
    kernels::affine_scores(m.data, 33, w, 1.0, 0.0, a, Execution::serial);
    kernels::affine_scores(m.data, 33, w, 1.0, 0.0, b, Execution::parallel);
    CHECK(a == b);
    CHECK(kernels::available_threads() >= 1);
}
