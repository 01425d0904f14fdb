#include "imbalance/simulator.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "imbalance/special_functions.hpp"

namespace imbalance {

namespace {

double sigmoid(double h) {
    if (h >= 0.0) return 1.0 / (1.0 + std::exp(-h));
    const double e = std::exp(h);
    return e / (1.0 + e);
}

double squared_norm(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return acc;
}

void project_to_sphere(std::vector<double>& w) {
    const double scale = std::sqrt(static_cast<double>(w.size()) / squared_norm(w));
    for (double& x : w) x *= scale;
}

template <class T>
void shuffle_in_place(std::vector<T>& v, Philox& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        boost::random::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(v[i - 1], v[pick(rng)]);
    }
}

double score_threshold(double threshold) {
    return std::log(threshold / (1.0 - threshold));
}

std::vector<double> unit_teacher(std::span<const double> teacher_w0) {
    const double n = static_cast<double>(teacher_w0.size());
    const double norm2 = squared_norm(teacher_w0);
    if (teacher_w0.empty() || std::abs(norm2 / n - 1.0) > 1e-6) {
        throw std::invalid_argument("teacher weights must have squared norm N");
    }
    std::vector<double> e(teacher_w0.begin(), teacher_w0.end());
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : e) x *= inv;
    return e;
}

struct Pass {
    double loss;
    double error;
};

// Mean squared sigmoid loss and hard-threshold error over the whole set.
Pass full_pass(const LabeledSamples& data, const StudentState& s, double threshold, Execution exec) {
    std::vector<double> h(data.size());
    const double scale = 1.0 / std::sqrt(static_cast<double>(data.dim));
    kernels::affine_scores(data.rows, data.dim, s.w, scale, s.b, h, exec);
    const double cut = score_threshold(threshold);
    double loss = 0.0;
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double diff = sigmoid(h[i]) - data.labels[i];
        loss += diff * diff;
        if ((h[i] > cut) != (data.labels[i] == 1)) ++wrong;
    }
    const double n = static_cast<double>(h.size());
    return {loss / n, static_cast<double>(wrong) / n};
}

}  // namespace

void SimConfig::validate() const {
    auto fail = [](const char* msg) { throw std::invalid_argument(msg); };
    if (dimension_N < 1) fail("dimension_N must be positive");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) fail("alpha must be > 0");
    if (!std::isfinite(b0)) fail("b0 must be finite");
    if (!(rho_train >= 0.0 && rho_train <= 1.0)) fail("rho_train must lie in [0, 1]");
    if (!(rho_test > 0.0 && rho_test < 1.0)) fail("rho_test must lie in (0, 1)");
    if (test_size < 1) fail("test_size must be positive");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be > 0");
    if (batch_size < 1) fail("batch_size must be positive");
    if (epochs < 1) fail("epochs must be positive");
    if (!(threshold > 0.0 && threshold < 1.0)) fail("threshold must lie in (0, 1)");
    if (!(langevin_temperature >= 0.0) || !std::isfinite(langevin_temperature)) {
        fail("langevin_temperature must be >= 0");
    }
    if (!(plateau_tolerance >= 0.0)) fail("plateau_tolerance must be >= 0");
    if (plateau_window < 1) fail("plateau_window must be positive");
    if (train_size() == 0) fail("training set is empty");
}

double SimConfig::effective_temperature() const {
    return learning_rate / batch_size;
}

std::size_t SimConfig::positive_count() const {
    return static_cast<std::size_t>(std::llround(alpha * dimension_N * rho_train));
}

std::size_t SimConfig::train_size() const {
    return positive_count() + static_cast<std::size_t>(std::llround(alpha * dimension_N * (1.0 - rho_train)));
}

Philox make_stream(std::uint64_t seed, SimStream stream) {
    return Philox(seed, static_cast<std::uint64_t>(stream));
}

std::vector<double> canonical_teacher(int N) {
    if (N < 1) throw std::invalid_argument("canonical_teacher: N must be positive");
    std::vector<double> w(static_cast<std::size_t>(N), 0.0);
    w[0] = std::sqrt(static_cast<double>(N));
    return w;
}

double inverse_gauss_tail(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("inverse_gauss_tail: p must lie in (0, 1)");
    return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double sample_class_field(bool positive, double b0, Philox& rng) {
    // H(y) is uniform on (0, H(-b0)) for positives; negatives mirror with b0 -> -b0.
    const double mass = positive ? gauss_tail_H(-b0) : gauss_tail_H(b0);
    const double edge = positive ? -b0 : b0;
    double y = inverse_gauss_tail(rng.uniform_open() * mass);
    if (!(y > edge)) y = std::nextafter(edge, std::numeric_limits<double>::infinity());
    return positive ? y : -y;
}

LabeledSamples sample_labeled_set(std::size_t count_pos, std::size_t count_neg, double b0,
                                  std::span<const double> teacher_w0, Philox& rng) {
    const std::size_t total = count_pos + count_neg;
    if (total == 0) throw std::invalid_argument("sample_labeled_set: no samples requested");
    const std::vector<double> e = unit_teacher(teacher_w0);
    const std::size_t dim = e.size();

    LabeledSamples out;
    out.dim = dim;
    out.labels.assign(total, 0);
    std::fill(out.labels.begin(), out.labels.begin() + static_cast<std::ptrdiff_t>(count_pos), 1);
    shuffle_in_place(out.labels, rng);
    out.rows.resize(total * dim);
    out.teacher_field.resize(total);

    boost::random::normal_distribution<double> normal;
    std::vector<double> g(dim);
    for (std::size_t i = 0; i < total; ++i) {
        const bool positive = out.labels[i] == 1;
        float* row = out.rows.data() + i * dim;
        for (;;) {
            const double y = sample_class_field(positive, b0, rng);
            double along = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                g[j] = normal(rng);
                along += g[j] * e[j];
            }
            double field = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                row[j] = static_cast<float>(y * e[j] + (g[j] - along * e[j]));
                field += e[j] * static_cast<double>(row[j]);
            }
            // Rounding to float can move a sample across the teacher boundary.
            if ((field + b0 > 0.0) == positive && field + b0 != 0.0) {
                out.teacher_field[i] = field;
                break;
            }
        }
    }
    return out;
}

LabeledSamples sample_training_set(const SimConfig& config, std::span<const double> teacher_w0, Philox& rng) {
    config.validate();
    if (teacher_w0.size() != static_cast<std::size_t>(config.dimension_N)) {
        throw std::invalid_argument("sample_training_set: teacher dimension differs from N");
    }
    const std::size_t pos = config.positive_count();
    return sample_labeled_set(pos, config.train_size() - pos, config.b0, teacher_w0, rng);
}

double population_positive_fraction(double b0, std::size_t draws, Philox& rng) {
    if (draws == 0) throw std::invalid_argument("population_positive_fraction: no draws");
    boost::random::normal_distribution<double> normal;
    std::size_t positives = 0;
    for (std::size_t i = 0; i < draws; ++i) {
        if (normal(rng) > -b0) ++positives;
    }
    return static_cast<double>(positives) / static_cast<double>(draws);
}

SimResult train_student(const SimConfig& config, const LabeledSamples& data, std::span<const double> teacher_w0,
                        Philox& rng, const StudentState* init) {
    config.validate();
    if (data.size() == 0) throw std::invalid_argument("train_student: empty training set");
    const std::size_t dim = data.dim;
    if (teacher_w0.size() != dim) throw std::invalid_argument("train_student: teacher dimension mismatch");

    SimResult result;
    StudentState& s = result.student;
    boost::random::normal_distribution<double> normal;
    if (init) {
        if (init->w.size() != dim) throw std::invalid_argument("train_student: initial weights have wrong size");
        s = *init;
    } else {
        Philox init_rng = make_stream(config.seed, SimStream::init);
        s.w.resize(dim);
        for (double& x : s.w) x = normal(init_rng);
        s.b = 0.0;
    }
    project_to_sphere(s.w);

    const double lr = config.learning_rate;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    const bool langevin = config.dynamics == Dynamics::langevin;
    const double temperature =
        config.langevin_temperature > 0.0 ? config.langevin_temperature : config.effective_temperature();
    const double noise = std::sqrt(2.0 * lr * temperature);
    result.effective_temperature = langevin ? temperature : config.effective_temperature();

    const Pass start = full_pass(data, s, config.threshold, config.exec);
    result.loss_trajectory.emplace_back(0, start.loss);

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t bs = static_cast<std::size_t>(config.batch_size);
    std::vector<double> h(bs);
    std::vector<double> coeffs(bs);

    int epoch = 1;
    for (; epoch <= config.epochs; ++epoch) {
        shuffle_in_place(order, rng);
        double loss_sum = 0.0;
        for (std::size_t start_idx = 0; start_idx < order.size(); start_idx += bs) {
            const std::size_t count = std::min(bs, order.size() - start_idx);
            std::span<const std::size_t> idx(order.data() + start_idx, count);
            std::span<double> hb(h.data(), count);
            std::span<double> cb(coeffs.data(), count);
            kernels::gather_scores(data.rows, dim, idx, s.w, scale, s.b, hb, config.exec);
            double grad_b = 0.0;
            for (std::size_t k = 0; k < count; ++k) {
                const double out = sigmoid(hb[k]);
                const double diff = out - data.labels[idx[k]];
                loss_sum += diff * diff;
                // d/dh of the batch-mean squared loss
                const double dh = 2.0 * diff * out * (1.0 - out) / static_cast<double>(count);
                grad_b += dh;
                cb[k] = -lr * dh * scale;
            }
            kernels::accumulate_rows(data.rows, dim, idx, cb, s.w, config.exec);
            s.b -= lr * grad_b;
            if (langevin) {
                for (double& x : s.w) x += noise * normal(rng);
                s.b += noise * normal(rng);
            }
            project_to_sphere(s.w);
        }
        const double epoch_loss = loss_sum / static_cast<double>(order.size());
        result.loss_trajectory.emplace_back(epoch, epoch_loss);
        if (!std::isfinite(epoch_loss) || !std::isfinite(s.b)) {
            std::ostringstream msg;
            msg << "training diverged at epoch " << epoch;
            throw simulation_error(msg.str(), result.loss_trajectory);
        }
        const int window = config.plateau_window;
        if (epoch > window) {
            const double past = result.loss_trajectory[static_cast<std::size_t>(epoch - window)].second;
            if (std::abs(epoch_loss - past) <= config.plateau_tolerance * std::max(past, 1e-300)) break;
        }
    }
    result.epochs_run = std::min(epoch, config.epochs);

    const Pass end = full_pass(data, s, config.threshold, config.exec);
    result.train_loss_final = end.loss;
    result.train_error_final = end.error;
    result.train_error_initial = start.error;
    double overlap = 0.0;
    for (std::size_t j = 0; j < dim; ++j) overlap += s.w[j] * teacher_w0[j];
    result.overlap_R_emp = overlap / static_cast<double>(dim);
    result.bias_emp = s.b;
    return result;
}

std::optional<double> rank_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size()) throw std::invalid_argument("rank_auc: size mismatch");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1..j
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1) {
                rank_sum += mean_rank;
                ++n_pos;
            }
        }
        i = j;
    }
    const std::size_t n_neg = scores.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) return std::nullopt;
    const double np = static_cast<double>(n_pos);
    return (rank_sum - 0.5 * np * (np + 1.0)) / (np * static_cast<double>(n_neg));
}

EmpiricalMetrics empirical_metrics_from_scores(std::span<const double> scores, std::span<const std::uint8_t> labels,
                                               double score_threshold_value) {
    if (scores.size() != labels.size() || scores.empty()) {
        throw std::invalid_argument("empirical_metrics: scores and labels must be non-empty and equal in size");
    }
    EmpiricalMetrics m;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] > score_threshold_value;
        if (labels[i] == 1) {
            predicted ? ++m.true_pos : ++m.false_neg;
        } else {
            predicted ? ++m.false_pos : ++m.true_neg;
        }
    }
    const double tp = static_cast<double>(m.true_pos);
    const double fp = static_cast<double>(m.false_pos);
    const double tn = static_cast<double>(m.true_neg);
    const double fn = static_cast<double>(m.false_neg);
    const double n = tp + fp + tn + fn;
    auto ratio = [](double num, double den) -> std::optional<double> {
        if (den == 0.0) return std::nullopt;
        return num / den;
    };
    m.rho_test = (tp + fn) / n;
    m.recall = ratio(tp, tp + fn);
    m.specificity = ratio(tn, tn + fp);
    m.accuracy = (tp + tn) / n;
    m.generalization_error = 1.0 - *m.accuracy;
    if (m.recall && m.specificity) m.balanced_accuracy = 0.5 * (*m.recall + *m.specificity);
    m.precision = ratio(tp, tp + fp);
    m.f1 = ratio(2.0 * tp, 2.0 * tp + fp + fn);
    m.precision_neg = ratio(tn, tn + fn);
    m.f1_neg = ratio(2.0 * tn, 2.0 * tn + fn + fp);
    m.auc = rank_auc(scores, labels);
    return m;
}

EmpiricalMetrics empirical_metrics(const StudentState& student, std::span<const double> teacher_w0, double b0,
                                   const LabeledSamples& test_set, double threshold, Execution exec) {
    if (teacher_w0.size() != test_set.dim || student.w.size() != test_set.dim) {
        throw std::invalid_argument("empirical_metrics: dimension mismatch");
    }
    (void)b0;  // labels were fixed by the teacher when the set was drawn
    std::vector<double> scores(test_set.size());
    kernels::affine_scores(test_set.rows, test_set.dim, student.w, 1.0 / std::sqrt(static_cast<double>(test_set.dim)),
                           student.b, scores, exec);
    return empirical_metrics_from_scores(scores, test_set.labels, score_threshold(threshold));
}

SimResult run_simulation(const SimConfig& config) {
    config.validate();
    const std::vector<double> teacher = canonical_teacher(config.dimension_N);
    SimResult result;
    {
        Philox data_rng = make_stream(config.seed, SimStream::train_data);
        const LabeledSamples train = sample_training_set(config, teacher, data_rng);
        Philox dyn_rng = make_stream(config.seed, SimStream::dynamics);
        result = train_student(config, train, teacher, dyn_rng);
    }
    Philox test_rng = make_stream(config.seed, SimStream::test_data);
    const auto test_pos = static_cast<std::size_t>(std::llround(config.test_size * config.rho_test));
    const LabeledSamples test = sample_labeled_set(test_pos, static_cast<std::size_t>(config.test_size) - test_pos,
                                                   config.b0, teacher, test_rng);
    result.metrics_emp = empirical_metrics(result.student, teacher, config.b0, test, config.threshold, config.exec);
    return result;
}

}  // namespace imbalance
