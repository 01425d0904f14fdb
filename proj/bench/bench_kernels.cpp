// Serial reference against OpenMP kernels. Both variants produce
// bit-identical results, so only the wall time differs.

#include <benchmark/benchmark.h>

#include <numeric>
#include <random>
#include <vector>

#include "imbalance/kernels.hpp"
#include "imbalance/landscape.hpp"
#include "imbalance/special_functions.hpp"

using namespace imbalance;

namespace {

Execution exec_of(const benchmark::State& state) {
    return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void label(benchmark::State& state) {
    state.SetLabel(state.range(0) == 0 ? "serial" : "parallel, " + std::to_string(kernels::available_threads()) +
                                                        " threads");
}

struct Matrix {
    std::size_t rows, dim;
    std::vector<float> data;
    std::vector<double> w;

    Matrix(std::size_t r, std::size_t d) : rows(r), dim(d), data(r * d), w(d) {
        std::mt19937_64 gen(1);
        std::normal_distribution<float> nf;
        std::normal_distribution<double> nd;
        for (float& x : data) x = nf(gen);
        for (double& x : w) x = nd(gen);
    }
};

void BM_weighted_sum(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(1));
    std::vector<double> nodes(n), weights(n, 1.0 / n);
    for (std::size_t i = 0; i < n; ++i) nodes[i] = -8.0 + 16.0 * i / (n - 1);
    const Execution exec = exec_of(state);
    for (auto _ : state) {
        const double s = kernels::weighted_sum(nodes, weights, [](double u) { return log_boltzmann_u(u, 2.0); }, exec);
        benchmark::DoNotOptimize(s);
    }
    label(state);
    state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}

void BM_affine_scores(benchmark::State& state) {
    const Matrix m(2000, static_cast<std::size_t>(state.range(1)));
    std::vector<double> scores(m.rows);
    const Execution exec = exec_of(state);
    for (auto _ : state) {
        kernels::affine_scores(m.data, m.dim, m.w, 0.01, -0.6, scores, exec);
        benchmark::DoNotOptimize(scores.data());
    }
    label(state);
    state.SetBytesProcessed(state.iterations() * static_cast<long>(m.data.size() * sizeof(float)));
}

void BM_accumulate_rows(benchmark::State& state) {
    const Matrix m(2000, static_cast<std::size_t>(state.range(1)));
    std::vector<std::size_t> idx(200);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> coeffs(idx.size(), 0.5), out(m.dim, 0.0);
    const Execution exec = exec_of(state);
    for (auto _ : state) {
        kernels::accumulate_rows(m.data, m.dim, idx, coeffs, out, exec);
        benchmark::DoNotOptimize(out.data());
    }
    label(state);
}

void BM_energetic_term(benchmark::State& state) {
    const ControlParams cp(-0.6, 1.1, 0.5, 0.5);
    OrderParams op;
    op.R = 0.3;
    op.q = 0.5;
    op.b = -0.3;
    IntegrationOptions opts;
    opts.exec = exec_of(state);
    opts.route = state.range(1) == 0 ? IntegrationRoute::reduced : IntegrationRoute::tensor;
    for (auto _ : state) benchmark::DoNotOptimize(energetic_term_plus(cp, op, opts));
    state.SetLabel(std::string(state.range(1) == 0 ? "reduced" : "tensor") + ", " +
                   (state.range(0) == 0 ? "serial" : "parallel"));
}

}  // namespace

BENCHMARK(BM_weighted_sum)->ArgsProduct({{0, 1}, {400, 20000}});
BENCHMARK(BM_affine_scores)->ArgsProduct({{0, 1}, {500, 5000}});
BENCHMARK(BM_accumulate_rows)->ArgsProduct({{0, 1}, {500, 5000}});
BENCHMARK(BM_energetic_term)->ArgsProduct({{0, 1}, {0, 1}});

BENCHMARK_MAIN();
