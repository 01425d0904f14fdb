#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "imbalance/metrics.hpp"
#include "imbalance/saddle_solver.hpp"
#include "imbalance/simulator.hpp"

namespace imbalance {

struct SweepRecord {
    ControlParams control;
    SaddleSolution solution;
    /// (rho_test, report); the first two are rho_test = 0.5 and rho_test = rho0(b0).
    std::vector<std::pair<double, MetricsReport>> reports;
    double train_error = 0.0;
};

struct PeakSummary {
    std::optional<double> rho_at_max_R;
    std::optional<double> max_R;
    /// Every rho where b - b0 changes sign, linearly interpolated.
    std::vector<double> rho_at_bias_match;
    /// Keyed "<metric>@<rho_test>", e.g. "a_bal@0.5".
    std::map<std::string, std::optional<double>> rho_at_max;
    std::vector<double> unconverged_rho;
};

struct Peak {
    double location;
    double value;
};

/// Discrete argmax refined by the parabola through it and its two
/// neighbours (kept inside the neighbour interval). Points with an empty
/// value are skipped. Empty if no values.
std::optional<Peak> refine_peak(const std::vector<double>& x, const std::vector<std::optional<double>>& y);

/// Linear interpolation of every sign change of y.
std::vector<double> sign_crossings(const std::vector<double>& x, const std::vector<std::optional<double>>& y);

std::vector<double> canonical_rho_tests(double b0, const std::vector<double>& extra = {});

/// Metrics and train error for a solved point.
SweepRecord make_record(const ControlParams& cp, const SaddleSolution& sol, const std::vector<double>& rho_tests,
                        const IntegrationOptions& opts = {});

struct RhoSweepResult {
    std::vector<SweepRecord> records;
    PeakSummary summary;
};

RhoSweepResult run_rho_sweep(const ControlParams& base, const std::vector<double>& grid,
                             const SolverSettings& settings = {}, const std::vector<double>& extra_rho_tests = {});

PeakSummary summarize_rho_sweep(const std::vector<SweepRecord>& records);

struct TemperatureSweepResult {
    std::vector<SweepRecord> records;
    std::optional<double> T_star;
    std::optional<double> plateau_a_bal;
};

/// T* is where a_bal first falls drop_fraction below its mean over the
/// lowest decade of the grid (log-linear interpolation). Empty when the
/// lowest decade itself varies by more than drop_fraction or a_bal never drops.
std::optional<double> crossover_temperature(const std::vector<double>& T, const std::vector<std::optional<double>>& a_bal,
                                            double drop_fraction, std::optional<double>* plateau = nullptr);

/// Throws std::invalid_argument unless the grid spans at least two decades.
TemperatureSweepResult run_temperature_sweep(const ControlParams& base, const std::vector<double>& grid,
                                             const SolverSettings& settings = {}, double drop_fraction = 0.02,
                                             const std::vector<double>& extra_rho_tests = {});

struct RhoStarCell {
    double b0;
    double alpha;
    double temperature;
    std::optional<double> rho_at_max_R;
    std::optional<double> max_R;
    /// R at rho_train = 0.5 and at rho_train = rho0, linearly interpolated on the grid.
    std::optional<double> R_at_half;
    std::optional<double> R_at_rho0;
    int unconverged = 0;
    std::string error;
};

std::vector<RhoStarCell> run_rhostar_map(const std::vector<double>& b0_grid, const std::vector<double>& alpha_grid,
                                         double temperature, const std::vector<double>& rho_grid,
                                         const SolverSettings& settings = {}, int jobs = 1);

struct MeanStat {
    double mean = 0.0;
    double standard_error = 0.0;
    int count = 0;
};

MeanStat mean_stat(const std::vector<double>& values);

struct ComparisonRecord {
    double rho_train;
    SaddleSolution theory;
    double theory_a_bal;
    MeanStat sim_R;
    MeanStat sim_b;
    MeanStat sim_a_bal;
    /// Theory a_bal at each seed's (R_emp, b_emp), averaged.
    MeanStat theory_a_bal_at_sim;
    MeanStat sim_auc;
    double tolerance;
    bool within_tolerance;
    std::vector<std::string> failed_seeds;
};

/// Theory against the simulator averaged over seeds sim.seed, sim.seed + 1, ...
/// Throws std::invalid_argument if cp and sim disagree on (b0, alpha,
/// rho_train) or lr / BS differs from cp.temperature() by more than
/// 1e-9 relative; std::runtime_error if fewer than 3 seeds succeed.
ComparisonRecord compare_theory_simulation(const ControlParams& cp, const SimConfig& sim, int n_seeds,
                                           const SolverSettings& settings = {}, double tolerance = 0.03, int jobs = 1);

// Serialisation -------------------------------------------------------------

/// %.17g, or the empty string for an empty optional.
std::string format_number(double x);
std::string format_number(const std::optional<double>& x);

std::vector<std::string> sweep_csv_header(std::size_t report_blocks);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records);

/// Parsed data row: one optional per column (empty field -> empty optional).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::optional<double>>> rows;
};
CsvTable read_csv(std::istream& in);

void write_rhostar_csv(std::ostream& out, const std::vector<RhoStarCell>& cells);
void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRecord>& records);
void write_simulation_csv(std::ostream& out, const std::vector<std::pair<SimConfig, SimResult>>& runs);

}  // namespace imbalance
