#pragma once

// Data-parallel inner loops. Every kernel has a serial reference and an
// OpenMP version that produce bit-identical results: work is cut into
// fixed-size blocks (independent of the thread count), each block is
// reduced serially, and block partials are combined in index order.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace imbalance {

enum class Execution { serial, parallel };

namespace kernels {

inline constexpr std::size_t block_size = 128;

inline std::size_t block_count(std::size_t n) {
    return (n + block_size - 1) / block_size;
}

/// Sum over i of weights[i] * f(nodes[i]).
template <class F>
double weighted_sum_serial(std::span<const double> nodes, std::span<const double> weights, F&& f) {
    const std::size_t n = nodes.size();
    double total = 0.0;
    for (std::size_t blk = 0; blk < block_count(n); ++blk) {
        const std::size_t lo = blk * block_size;
        const std::size_t hi = std::min(n, lo + block_size);
        double partial = 0.0;
        for (std::size_t i = lo; i < hi; ++i) partial += weights[i] * f(nodes[i]);
        total += partial;
    }
    return total;
}

template <class F>
double weighted_sum_parallel(std::span<const double> nodes, std::span<const double> weights, F&& f) {
    const std::size_t n = nodes.size();
    const std::size_t blocks = block_count(n);
    std::vector<double> partials(blocks, 0.0);
    std::exception_ptr failure;
#pragma omp parallel for schedule(static) if (blocks > 1)
    for (std::ptrdiff_t blk = 0; blk < static_cast<std::ptrdiff_t>(blocks); ++blk) {
        try {
            const std::size_t lo = static_cast<std::size_t>(blk) * block_size;
            const std::size_t hi = std::min(n, lo + block_size);
            double partial = 0.0;
            for (std::size_t i = lo; i < hi; ++i) partial += weights[i] * f(nodes[i]);
            partials[blk] = partial;
        } catch (...) {
#pragma omp critical(imbalance_kernel_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    double total = 0.0;
    for (double p : partials) total += p;
    return total;
}

template <class F>
double weighted_sum(std::span<const double> nodes, std::span<const double> weights, F&& f,
                    Execution exec) {
    if (exec == Execution::parallel) return weighted_sum_parallel(nodes, weights, f);
    return weighted_sum_serial(nodes, weights, f);
}

/// Sum over i of outer_weights[i] * inner(outer_nodes[i]); each inner
/// call is itself serial. Used for iterated two-dimensional quadrature.
template <class F>
double outer_sum_serial(std::span<const double> outer_nodes, std::span<const double> outer_weights,
                        F&& inner) {
    double total = 0.0;
    for (std::size_t i = 0; i < outer_nodes.size(); ++i) {
        total += outer_weights[i] * inner(outer_nodes[i]);
    }
    return total;
}

template <class F>
double outer_sum_parallel(std::span<const double> outer_nodes, std::span<const double> outer_weights,
                          F&& inner) {
    const std::size_t n = outer_nodes.size();
    std::vector<double> partials(n, 0.0);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        try {
            partials[i] = outer_weights[i] * inner(outer_nodes[i]);
        } catch (...) {
#pragma omp critical(imbalance_kernel_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    double total = 0.0;
    for (double p : partials) total += p;
    return total;
}

template <class F>
double outer_sum(std::span<const double> outer_nodes, std::span<const double> outer_weights, F&& inner,
                 Execution exec) {
    if (exec == Execution::parallel) return outer_sum_parallel(outer_nodes, outer_weights, inner);
    return outer_sum_serial(outer_nodes, outer_weights, inner);
}

/// scores[r] = scale * dot(rows[r], w) + offset for a row-major float matrix.
void affine_scores_serial(std::span<const float> rows, std::size_t dim, std::span<const double> w,
                          double scale, double offset, std::span<double> scores);
void affine_scores_parallel(std::span<const float> rows, std::size_t dim, std::span<const double> w,
                            double scale, double offset, std::span<double> scores);
void affine_scores(std::span<const float> rows, std::size_t dim, std::span<const double> w,
                   double scale, double offset, std::span<double> scores, Execution exec);

/// scores[k] = scale * dot(rows[indices[k]], w) + offset.
void gather_scores_serial(std::span<const float> rows, std::size_t dim, std::span<const std::size_t> indices,
                          std::span<const double> w, double scale, double offset, std::span<double> scores);
void gather_scores_parallel(std::span<const float> rows, std::size_t dim, std::span<const std::size_t> indices,
                            std::span<const double> w, double scale, double offset, std::span<double> scores);
void gather_scores(std::span<const float> rows, std::size_t dim, std::span<const std::size_t> indices,
                   std::span<const double> w, double scale, double offset, std::span<double> scores, Execution exec);

/// out[j] += sum over k of coeffs[k] * rows[indices[k]][j], k in ascending order.
void accumulate_rows_serial(std::span<const float> rows, std::size_t dim, std::span<const std::size_t> indices,
                            std::span<const double> coeffs, std::span<double> out);
void accumulate_rows_parallel(std::span<const float> rows, std::size_t dim, std::span<const std::size_t> indices,
                              std::span<const double> coeffs, std::span<double> out);
void accumulate_rows(std::span<const float> rows, std::size_t dim, std::span<const std::size_t> indices,
                     std::span<const double> coeffs, std::span<double> out, Execution exec);

/// Row dot product in a fixed summation order (shared by both variants).
double row_dot(const float* row, const double* w, std::size_t dim);

int available_threads();

}  // namespace kernels
}  // namespace imbalance
