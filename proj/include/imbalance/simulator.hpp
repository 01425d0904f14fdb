#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "imbalance/kernels.hpp"
#include "imbalance/philox.hpp"

namespace imbalance {

enum class Dynamics { sgd_sigmoid, langevin };

struct SimConfig {
    int dimension_N = 5000;
    double alpha = 2.0;
    double b0 = -0.6;
    double rho_train = 0.5;
    double rho_test = 0.5;
    int test_size = 10000;
    double learning_rate = 0.5;
    int batch_size = 20;
    int epochs = 200;
    std::uint64_t seed = 1;
    Dynamics dynamics = Dynamics::sgd_sigmoid;
    double threshold = 0.5;
    /// Langevin temperature; 0 means learning_rate / batch_size.
    double langevin_temperature = 0.0;
    /// Stop once the epoch loss changes by less than this (relative) over plateau_window epochs.
    double plateau_tolerance = 1e-5;
    int plateau_window = 10;
    Execution exec = Execution::parallel;

    /// Throws std::invalid_argument on out-of-range fields.
    void validate() const;
    /// lr / BS, the temperature SGD noise is associated with.
    double effective_temperature() const;
    std::size_t train_size() const;
    std::size_t positive_count() const;
};

/// Row-major float samples with {0, 1} labels and the teacher field y = w0 . S / sqrt(N).
struct LabeledSamples {
    std::size_t dim = 0;
    std::vector<float> rows;
    std::vector<std::uint8_t> labels;
    std::vector<double> teacher_field;

    std::size_t size() const { return labels.size(); }
};

struct StudentState {
    std::vector<double> w;
    double b = 0.0;
};

struct EmpiricalMetrics {
    std::size_t true_pos = 0;
    std::size_t false_pos = 0;
    std::size_t true_neg = 0;
    std::size_t false_neg = 0;
    double rho_test = 0.0;
    std::optional<double> recall;
    std::optional<double> specificity;
    std::optional<double> accuracy;
    std::optional<double> balanced_accuracy;
    std::optional<double> precision;
    std::optional<double> f1;
    std::optional<double> precision_neg;
    std::optional<double> f1_neg;
    std::optional<double> generalization_error;
    std::optional<double> auc;
};

struct SimResult {
    double overlap_R_emp = 0.0;
    double bias_emp = 0.0;
    EmpiricalMetrics metrics_emp;
    double train_loss_final = 0.0;
    double train_error_final = 0.0;
    double train_error_initial = 0.0;
    std::vector<std::pair<int, double>> loss_trajectory;
    int epochs_run = 0;
    double effective_temperature = 0.0;
    StudentState student;
};

class simulation_error : public std::runtime_error {
public:
    simulation_error(const std::string& what, std::vector<std::pair<int, double>> trajectory)
        : std::runtime_error(what), trajectory_(std::move(trajectory)) {}
    const std::vector<std::pair<int, double>>& trajectory() const { return trajectory_; }

private:
    std::vector<std::pair<int, double>> trajectory_;
};

/// Independent random streams derived from one seed.
enum class SimStream : std::uint64_t { teacher = 1, train_data = 2, test_data = 3, init = 4, dynamics = 5 };

Philox make_stream(std::uint64_t seed, SimStream stream);

/// Teacher along the first axis, squared norm N. The student initialisation
/// and the data are isotropic, so the orientation is immaterial.
std::vector<double> canonical_teacher(int N);

/// Inverse of the Gaussian tail, H^-1(p) for p in (0, 1).
double inverse_gauss_tail(double p);

/// Standard normal conditioned on y > -b0 (positive) or y < -b0 (negative),
/// by inverse CDF.
double sample_class_field(bool positive, double b0, Philox& rng);

/// Exactly count_pos positives and count_neg negatives in random order.
/// Each sample is y w0 / sqrt(N) plus an isotropic component orthogonal to w0.
LabeledSamples sample_labeled_set(std::size_t count_pos, std::size_t count_neg, double b0,
                                  std::span<const double> teacher_w0, Philox& rng);

/// round(alpha N rho) positives and round(alpha N (1 - rho)) negatives.
LabeledSamples sample_training_set(const SimConfig& config, std::span<const double> teacher_w0, Philox& rng);

/// Fraction of unconditioned population draws with y > -b0.
double population_positive_fraction(double b0, std::size_t draws, Philox& rng);

/// Mini-batch descent on the squared sigmoid loss with projection onto
/// w . w = N after every step. init overrides the random starting point.
SimResult train_student(const SimConfig& config, const LabeledSamples& data, std::span<const double> teacher_w0,
                        Philox& rng, const StudentState* init = nullptr);

/// Counting metrics at a score threshold plus rank-statistic AUC.
EmpiricalMetrics empirical_metrics_from_scores(std::span<const double> scores, std::span<const std::uint8_t> labels,
                                               double score_threshold);

EmpiricalMetrics empirical_metrics(const StudentState& student, std::span<const double> teacher_w0, double b0,
                                   const LabeledSamples& test_set, double threshold = 0.5,
                                   Execution exec = Execution::parallel);

/// Mann-Whitney AUC with tied scores counted one half; empty when a class is absent.
std::optional<double> rank_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Samples, trains and evaluates one seed end to end.
SimResult run_simulation(const SimConfig& config);

}  // namespace imbalance
