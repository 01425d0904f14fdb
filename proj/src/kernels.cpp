#include "imbalance/kernels.hpp"

#include <algorithm>
#include <stdexcept>

namespace imbalance::kernels {

double row_dot(const float* row, const double* w, std::size_t dim) {
    double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    std::size_t i = 0;
    for (; i + 8 <= dim; i += 8) {
        for (std::size_t k = 0; k < 8; ++k) acc[k] += static_cast<double>(row[i + k]) * w[i + k];
    }
    double tail = 0.0;
    for (; i < dim; ++i) tail += static_cast<double>(row[i]) * w[i];
    return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail;
}

namespace {

void check_shapes(std::span<const float> rows, std::size_t dim, std::span<const double> w,
                  std::span<double> scores) {
    if (w.size() != dim || rows.size() != dim * scores.size()) {
        throw std::invalid_argument("affine_scores: shape mismatch");
    }
}

}  // namespace

void affine_scores_serial(std::span<const float> rows, std::size_t dim, std::span<const double> w,
                          double scale, double offset, std::span<double> scores) {
    check_shapes(rows, dim, w, scores);
    for (std::size_t r = 0; r < scores.size(); ++r) {
        scores[r] = scale * row_dot(rows.data() + r * dim, w.data(), dim) + offset;
    }
}

void affine_scores_parallel(std::span<const float> rows, std::size_t dim, std::span<const double> w,
                            double scale, double offset, std::span<double> scores) {
    check_shapes(rows, dim, w, scores);
    const auto n = static_cast<std::ptrdiff_t>(scores.size());
#pragma omp parallel for schedule(static) if (n > 64)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
        scores[r] = scale * row_dot(rows.data() + r * dim, w.data(), dim) + offset;
    }
}

void affine_scores(std::span<const float> rows, std::size_t dim, std::span<const double> w,
                   double scale, double offset, std::span<double> scores, Execution exec) {
    if (exec == Execution::parallel) {
        affine_scores_parallel(rows, dim, w, scale, offset, scores);
    } else {
        affine_scores_serial(rows, dim, w, scale, offset, scores);
    }
}

namespace {

void check_gather(std::span<const float> rows, std::size_t dim, std::span<const std::size_t> indices,
                  std::size_t vec_size, std::size_t per_index) {
    if (vec_size != dim || indices.size() != per_index) throw std::invalid_argument("kernel: shape mismatch");
    for (std::size_t i : indices) {
        if ((i + 1) * dim > rows.size()) throw std::out_of_range("kernel: row index out of range");
    }
}

}  // namespace

void gather_scores_serial(std::span<const float> rows, std::size_t dim, std::span<const std::size_t> indices,
                          std::span<const double> w, double scale, double offset, std::span<double> scores) {
    check_gather(rows, dim, indices, w.size(), scores.size());
    for (std::size_t k = 0; k < indices.size(); ++k) {
        scores[k] = scale * row_dot(rows.data() + indices[k] * dim, w.data(), dim) + offset;
    }
}

void gather_scores_parallel(std::span<const float> rows, std::size_t dim, std::span<const std::size_t> indices,
                            std::span<const double> w, double scale, double offset, std::span<double> scores) {
    check_gather(rows, dim, indices, w.size(), scores.size());
    const auto n = static_cast<std::ptrdiff_t>(indices.size());
#pragma omp parallel for schedule(static) if (n * static_cast<std::ptrdiff_t>(dim) > 65536)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        scores[k] = scale * row_dot(rows.data() + indices[k] * dim, w.data(), dim) + offset;
    }
}

void gather_scores(std::span<const float> rows, std::size_t dim, std::span<const std::size_t> indices,
                   std::span<const double> w, double scale, double offset, std::span<double> scores, Execution exec) {
    if (exec == Execution::parallel) {
        gather_scores_parallel(rows, dim, indices, w, scale, offset, scores);
    } else {
        gather_scores_serial(rows, dim, indices, w, scale, offset, scores);
    }
}

void accumulate_rows_serial(std::span<const float> rows, std::size_t dim, std::span<const std::size_t> indices,
                            std::span<const double> coeffs, std::span<double> out) {
    check_gather(rows, dim, indices, out.size(), coeffs.size());
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const float* row = rows.data() + indices[k] * dim;
        const double c = coeffs[k];
        for (std::size_t j = 0; j < dim; ++j) out[j] += c * static_cast<double>(row[j]);
    }
}

void accumulate_rows_parallel(std::span<const float> rows, std::size_t dim, std::span<const std::size_t> indices,
                              std::span<const double> coeffs, std::span<double> out) {
    check_gather(rows, dim, indices, out.size(), coeffs.size());
    // Columns are split across threads; each column still sums k in order.
    const auto blocks = static_cast<std::ptrdiff_t>(block_count(dim));
#pragma omp parallel for schedule(static) if (blocks * static_cast<std::ptrdiff_t>(indices.size()) > 512)
    for (std::ptrdiff_t blk = 0; blk < blocks; ++blk) {
        const std::size_t lo = static_cast<std::size_t>(blk) * block_size;
        const std::size_t hi = std::min(dim, lo + block_size);
        for (std::size_t k = 0; k < indices.size(); ++k) {
            const float* row = rows.data() + indices[k] * dim;
            const double c = coeffs[k];
            for (std::size_t j = lo; j < hi; ++j) out[j] += c * static_cast<double>(row[j]);
        }
    }
}

void accumulate_rows(std::span<const float> rows, std::size_t dim, std::span<const std::size_t> indices,
                     std::span<const double> coeffs, std::span<double> out, Execution exec) {
    if (exec == Execution::parallel) {
        accumulate_rows_parallel(rows, dim, indices, coeffs, out);
    } else {
        accumulate_rows_serial(rows, dim, indices, coeffs, out);
    }
}

int available_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace imbalance::kernels
