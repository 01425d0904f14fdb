#include "imbalance/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "imbalance/special_functions.hpp"

namespace imbalance {

namespace {

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::pair<std::string, std::optional<double> (*)(const MetricsReport&)>>& peak_metrics() {
    static const std::vector<std::pair<std::string, std::optional<double> (*)(const MetricsReport&)>> list = {
        {"a", [](const MetricsReport& m) -> std::optional<double> { return m.accuracy; }},
        {"a_bal", [](const MetricsReport& m) -> std::optional<double> { return m.balanced_accuracy; }},
        {"p", [](const MetricsReport& m) { return m.precision; }},
        {"f1", [](const MetricsReport& m) { return m.f1; }},
        {"p_neg", [](const MetricsReport& m) { return m.precision_neg; }},
        {"f1_neg", [](const MetricsReport& m) { return m.f1_neg; }},
    };
    return list;
}

std::string rho_test_key(std::size_t block, double rho_test) {
    if (block == 1) return "rho0";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", rho_test);
    return buf;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << fields[i];
    }
    out << '\n';
}

std::optional<double> interpolate_at(const std::vector<double>& x, const std::vector<std::optional<double>>& y,
                                     double at) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (y[i]) pts.emplace_back(x[i], *y[i]);
    }
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (at >= pts[i].first && at <= pts[i + 1].first) {
            const double t = (at - pts[i].first) / (pts[i + 1].first - pts[i].first);
            return pts[i].second + t * (pts[i + 1].second - pts[i].second);
        }
    }
    return std::nullopt;
}

}  // namespace

std::optional<Peak> refine_peak(const std::vector<double>& x, const std::vector<std::optional<double>>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("refine_peak: size mismatch");
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (y[i] && std::isfinite(*y[i])) {
            xs.push_back(x[i]);
            ys.push_back(*y[i]);
        }
    }
    if (xs.empty()) return std::nullopt;
    const std::size_t k = static_cast<std::size_t>(std::max_element(ys.begin(), ys.end()) - ys.begin());
    if (k == 0 || k + 1 == xs.size()) return Peak{xs[k], ys[k]};
    const double x0 = xs[k - 1], x1 = xs[k], x2 = xs[k + 1];
    const double y0 = ys[k - 1], y1 = ys[k], y2 = ys[k + 1];
    // Parabola through three points in Newton form.
    const double d01 = (y1 - y0) / (x1 - x0);
    const double d12 = (y2 - y1) / (x2 - x1);
    const double curvature = (d12 - d01) / (x2 - x0);
    if (!(curvature < 0.0)) return Peak{x1, y1};
    // y = y0 + d01 (x - x0) + c (x - x0)(x - x1); dy/dx = 0 at:
    const double vertex = std::clamp(0.5 * (x0 + x1) - d01 / (2.0 * curvature), std::min(x0, x2), std::max(x0, x2));
    const double value = y0 + d01 * (vertex - x0) + curvature * (vertex - x0) * (vertex - x1);
    return Peak{vertex, value};
}

std::vector<double> sign_crossings(const std::vector<double>& x, const std::vector<std::optional<double>>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("sign_crossings: size mismatch");
    std::vector<double> out;
    std::optional<std::size_t> prev;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!y[i] || !std::isfinite(*y[i])) continue;
        if (*y[i] == 0.0) {
            out.push_back(x[i]);
        } else if (prev && *y[*prev] != 0.0 && ((*y[*prev] < 0.0) != (*y[i] < 0.0))) {
            const double t = *y[*prev] / (*y[*prev] - *y[i]);
            out.push_back(x[*prev] + t * (x[i] - x[*prev]));
        }
        prev = i;
    }
    return out;
}

std::vector<double> canonical_rho_tests(double b0, const std::vector<double>& extra) {
    std::vector<double> out{0.5, rho_intrinsic(b0)};
    out.insert(out.end(), extra.begin(), extra.end());
    return out;
}

SweepRecord make_record(const ControlParams& cp, const SaddleSolution& sol, const std::vector<double>& rho_tests,
                        const IntegrationOptions& opts) {
    SweepRecord rec{cp, sol, {}, nan_value};
    for (double rt : rho_tests) {
        rec.reports.emplace_back(rt, report(sol.params.R, sol.params.b, cp.b0(), rt, opts.spec));
    }
    try {
        rec.train_error = train_error(cp, sol.params, opts);
    } catch (const std::exception&) {
        rec.train_error = nan_value;
    }
    return rec;
}

PeakSummary summarize_rho_sweep(const std::vector<SweepRecord>& records) {
    PeakSummary s;
    std::vector<double> x;
    std::vector<std::optional<double>> R, bias_gap;
    for (const SweepRecord& r : records) {
        x.push_back(r.control.rho_train());
        const bool ok = r.solution.converged;
        if (!ok) s.unconverged_rho.push_back(r.control.rho_train());
        R.push_back(ok ? std::optional<double>(r.solution.params.R) : std::nullopt);
        bias_gap.push_back(ok ? std::optional<double>(r.solution.params.b - r.control.b0()) : std::nullopt);
    }
    if (const auto peak = refine_peak(x, R)) {
        s.rho_at_max_R = peak->location;
        s.max_R = peak->value;
    }
    s.rho_at_bias_match = sign_crossings(x, bias_gap);
    if (records.empty()) return s;
    for (std::size_t block = 0; block < records.front().reports.size(); ++block) {
        const std::string suffix = "@" + rho_test_key(block, records.front().reports[block].first);
        for (const auto& [name, get] : peak_metrics()) {
            std::vector<std::optional<double>> y;
            for (const SweepRecord& r : records) {
                y.push_back(r.solution.converged ? get(r.reports[block].second) : std::nullopt);
            }
            const auto peak = refine_peak(x, y);
            s.rho_at_max[name + suffix] = peak ? std::optional<double>(peak->location) : std::nullopt;
        }
    }
    return s;
}

RhoSweepResult run_rho_sweep(const ControlParams& base, const std::vector<double>& grid,
                             const SolverSettings& settings, const std::vector<double>& extra_rho_tests) {
    for (double rho : grid) {
        if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("run_rho_sweep: rho outside [0, 1]");
    }
    const auto sols = continuation_sweep(base, SweepAxis::rho_train, grid, settings);
    const auto rho_tests = canonical_rho_tests(base.b0(), extra_rho_tests);
    RhoSweepResult out;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out.records.push_back(make_record(base.with_rho_train(grid[i]), sols[i], rho_tests, settings.integration));
    }
    out.summary = summarize_rho_sweep(out.records);
    return out;
}

std::optional<double> crossover_temperature(const std::vector<double>& T, const std::vector<std::optional<double>>& a_bal,
                                            double drop_fraction, std::optional<double>* plateau_out) {
    if (T.size() != a_bal.size() || T.empty()) throw std::invalid_argument("crossover_temperature: bad input");
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < T.size(); ++i) {
        if (a_bal[i]) pts.emplace_back(T[i], *a_bal[i]);
    }
    std::sort(pts.begin(), pts.end());
    if (pts.empty()) return std::nullopt;
    const double decade_end = pts.front().first * 10.0;
    double sum = 0.0, lo = pts.front().second, hi = lo;
    int n = 0;
    for (const auto& [t, a] : pts) {
        if (t > decade_end * (1.0 + 1e-12)) break;
        sum += a;
        lo = std::min(lo, a);
        hi = std::max(hi, a);
        ++n;
    }
    const double plateau = sum / n;
    if (plateau_out) *plateau_out = plateau;
    if (hi - lo > drop_fraction * plateau) return std::nullopt;
    const double target = plateau * (1.0 - drop_fraction);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].second < target && pts[i - 1].second >= target) {
            const double t = (pts[i - 1].second - target) / (pts[i - 1].second - pts[i].second);
            return std::exp(std::log(pts[i - 1].first) + t * (std::log(pts[i].first) - std::log(pts[i - 1].first)));
        }
    }
    return std::nullopt;
}

TemperatureSweepResult run_temperature_sweep(const ControlParams& base, const std::vector<double>& grid,
                                             const SolverSettings& settings, double drop_fraction,
                                             const std::vector<double>& extra_rho_tests) {
    if (grid.size() < 2) throw std::invalid_argument("run_temperature_sweep: need at least two temperatures");
    const auto [tmin, tmax] = std::minmax_element(grid.begin(), grid.end());
    if (!(*tmin > 0.0) || *tmax / *tmin < 100.0 * (1.0 - 1e-12)) {
        throw std::invalid_argument("run_temperature_sweep: grid must span at least two decades");
    }
    if (!(drop_fraction > 0.0 && drop_fraction < 1.0)) {
        throw std::invalid_argument("run_temperature_sweep: drop_fraction must lie in (0, 1)");
    }
    const auto sols = continuation_sweep(base, SweepAxis::temperature, grid, settings);
    const auto rho_tests = canonical_rho_tests(base.b0(), extra_rho_tests);
    TemperatureSweepResult out;
    std::vector<std::optional<double>> a_bal;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out.records.push_back(make_record(base.with_temperature(grid[i]), sols[i], rho_tests, settings.integration));
        a_bal.push_back(sols[i].converged ? std::optional<double>(out.records.back().reports[0].second.balanced_accuracy)
                                          : std::nullopt);
    }
    out.T_star = crossover_temperature(grid, a_bal, drop_fraction, &out.plateau_a_bal);
    return out;
}

std::vector<RhoStarCell> run_rhostar_map(const std::vector<double>& b0_grid, const std::vector<double>& alpha_grid,
                                         double temperature, const std::vector<double>& rho_grid,
                                         const SolverSettings& settings, int jobs) {
    if (b0_grid.empty() || alpha_grid.empty()) throw std::invalid_argument("run_rhostar_map: empty grid");
    std::vector<RhoStarCell> cells;
    for (double b0 : b0_grid) {
        for (double alpha : alpha_grid) cells.push_back({b0, alpha, temperature, {}, {}, {}, {}, 0, {}});
    }
    const auto n = static_cast<std::ptrdiff_t>(cells.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, jobs))
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        RhoStarCell& cell = cells[i];
        try {
            const ControlParams base(cell.b0, cell.alpha, temperature, rho_grid.front());
            const auto sols = continuation_sweep(base, SweepAxis::rho_train, rho_grid, settings);
            std::vector<std::optional<double>> R;
            for (const auto& s : sols) {
                if (!s.converged) ++cell.unconverged;
                R.push_back(s.converged ? std::optional<double>(s.params.R) : std::nullopt);
            }
            if (const auto peak = refine_peak(rho_grid, R)) {
                cell.rho_at_max_R = peak->location;
                cell.max_R = peak->value;
            }
            cell.R_at_half = interpolate_at(rho_grid, R, 0.5);
            cell.R_at_rho0 = interpolate_at(rho_grid, R, rho_intrinsic(cell.b0));
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    }
    return cells;
}

MeanStat mean_stat(const std::vector<double>& values) {
    MeanStat s;
    s.count = static_cast<int>(values.size());
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / s.count;
    if (s.count > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.standard_error = std::sqrt(ss / (s.count - 1) / s.count);
    }
    return s;
}

ComparisonRecord compare_theory_simulation(const ControlParams& cp, const SimConfig& sim, int n_seeds,
                                           const SolverSettings& settings, double tolerance, int jobs) {
    sim.validate();
    if (n_seeds < 1) throw std::invalid_argument("compare: n_seeds must be positive");
    if (cp.b0() != sim.b0 || cp.alpha() != sim.alpha || cp.rho_train() != sim.rho_train) {
        throw std::invalid_argument("compare: theory and simulation disagree on (b0, alpha, rho_train)");
    }
    const double T_sim = sim.dynamics == Dynamics::langevin && sim.langevin_temperature > 0.0
                             ? sim.langevin_temperature
                             : sim.effective_temperature();
    if (std::abs(T_sim - cp.temperature()) > 1e-9 * cp.temperature()) {
        throw std::invalid_argument("compare: simulation temperature differs from theory temperature");
    }

    ComparisonRecord rec{cp.rho_train(), solve_or_flag(cp, settings), nan_value, {}, {}, {}, {}, {}, tolerance, false, {}};
    if (rec.theory.converged) {
        rec.theory_a_bal = report(rec.theory.params.R, rec.theory.params.b, cp.b0(), 0.5).balanced_accuracy;
    }

    std::vector<std::optional<SimResult>> runs(static_cast<std::size_t>(n_seeds));
    std::vector<std::string> errors(runs.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, jobs))
    for (int k = 0; k < n_seeds; ++k) {
        SimConfig c = sim;
        c.seed = sim.seed + static_cast<std::uint64_t>(k);
        try {
            runs[k] = run_simulation(c);
        } catch (const std::exception& e) {
            errors[k] = e.what();
        }
    }
    std::vector<double> R, b, a_bal, at_sim, auc;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        if (!runs[k] || !runs[k]->metrics_emp.balanced_accuracy) {
            rec.failed_seeds.push_back(std::to_string(sim.seed + k) + ": " +
                                       (errors[k].empty() ? "undefined balanced accuracy" : errors[k]));
            continue;
        }
        const SimResult& r = *runs[k];
        R.push_back(r.overlap_R_emp);
        b.push_back(r.bias_emp);
        a_bal.push_back(*r.metrics_emp.balanced_accuracy);
        const double R_clamped = std::clamp(r.overlap_R_emp, -1.0, 1.0);
        at_sim.push_back(report(R_clamped, r.bias_emp, cp.b0(), 0.5).balanced_accuracy);
        if (r.metrics_emp.auc) auc.push_back(*r.metrics_emp.auc);
    }
    if (R.size() < 3) throw std::runtime_error("compare: fewer than 3 simulation seeds succeeded");
    rec.sim_R = mean_stat(R);
    rec.sim_b = mean_stat(b);
    rec.sim_a_bal = mean_stat(a_bal);
    rec.theory_a_bal_at_sim = mean_stat(at_sim);
    rec.sim_auc = mean_stat(auc);
    rec.within_tolerance = rec.theory.converged && std::abs(rec.sim_a_bal.mean - rec.theory_a_bal) <= tolerance;
    return rec;
}

std::string format_number(double x) {
    if (!std::isfinite(x)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string format_number(const std::optional<double>& x) {
    return x ? format_number(*x) : std::string();
}

std::vector<std::string> sweep_csv_header(std::size_t report_blocks) {
    std::vector<std::string> h{"b0",    "alpha",        "T",           "rho_train", "R",        "q",        "R_hat",
                               "q_hat", "b",            "residual_max", "free_energy", "converged", "eps_train"};
    for (std::size_t k = 0; k < report_blocks; ++k) {
        for (const char* col : {"rho_test", "r", "s", "a", "a_bal", "p", "f1", "p_neg", "f1_neg", "eps_g"}) {
            h.push_back(std::string(col) + "_" + std::to_string(k + 1));
        }
    }
    return h;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records) {
    const std::size_t blocks = records.empty() ? 2 : records.front().reports.size();
    write_row(out, sweep_csv_header(blocks));
    for (const SweepRecord& r : records) {
        if (r.reports.size() != blocks) throw std::invalid_argument("write_sweep_csv: ragged report blocks");
        const OrderParams& p = r.solution.params;
        std::vector<std::string> f{format_number(r.control.b0()),
                                   format_number(r.control.alpha()),
                                   format_number(r.control.temperature()),
                                   format_number(r.control.rho_train()),
                                   format_number(p.R),
                                   format_number(p.q),
                                   format_number(p.R_hat),
                                   format_number(p.q_hat),
                                   format_number(p.b),
                                   format_number(r.solution.residual_max()),
                                   format_number(r.solution.free_energy),
                                   r.solution.converged ? "1" : "0",
                                   format_number(r.train_error)};
        for (const auto& [rt, m] : r.reports) {
            for (const std::optional<double>& v :
                 {std::optional<double>(rt), std::optional<double>(m.recall), std::optional<double>(m.specificity),
                  std::optional<double>(m.accuracy), std::optional<double>(m.balanced_accuracy), m.precision, m.f1,
                  m.precision_neg, m.f1_neg, std::optional<double>(m.generalization_error)}) {
                f.push_back(format_number(v));
            }
        }
        write_row(out, f);
    }
}

CsvTable read_csv(std::istream& in) {
    auto split = [](const std::string& line) {
        std::vector<std::string> out;
        std::string cell;
        std::istringstream s(line);
        while (std::getline(s, cell, ',')) out.push_back(cell);
        if (!line.empty() && line.back() == ',') out.emplace_back();
        return out;
    };
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) return t;
    t.header = split(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::optional<double>> row;
        for (const std::string& cell : split(line)) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (cell.empty() || end != cell.c_str() + cell.size()) {
                row.emplace_back();
            } else {
                row.emplace_back(v);
            }
        }
        row.resize(t.header.size());
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write_rhostar_csv(std::ostream& out, const std::vector<RhoStarCell>& cells) {
    write_row(out, {"b0", "alpha", "T", "rho0", "rho_at_max_R", "max_R", "R_at_half", "R_at_rho0", "unconverged"});
    for (const RhoStarCell& c : cells) {
        write_row(out, {format_number(c.b0), format_number(c.alpha), format_number(c.temperature),
                        format_number(rho_intrinsic(c.b0)), format_number(c.rho_at_max_R), format_number(c.max_R),
                        format_number(c.R_at_half), format_number(c.R_at_rho0), std::to_string(c.unconverged)});
    }
}

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRecord>& records) {
    write_row(out, {"rho_train", "theory_R", "theory_b", "theory_a_bal", "theory_converged", "sim_R_mean", "sim_R_se",
                    "sim_b_mean", "sim_b_se", "sim_a_bal_mean", "sim_a_bal_se", "theory_a_bal_at_sim_mean",
                    "theory_a_bal_at_sim_se", "sim_auc_mean", "sim_auc_se", "seeds", "tolerance",
                    "within_tolerance"});
    for (const ComparisonRecord& r : records) {
        write_row(out, {format_number(r.rho_train), format_number(r.theory.params.R), format_number(r.theory.params.b),
                        format_number(r.theory_a_bal), r.theory.converged ? "1" : "0", format_number(r.sim_R.mean),
                        format_number(r.sim_R.standard_error), format_number(r.sim_b.mean),
                        format_number(r.sim_b.standard_error), format_number(r.sim_a_bal.mean),
                        format_number(r.sim_a_bal.standard_error), format_number(r.theory_a_bal_at_sim.mean),
                        format_number(r.theory_a_bal_at_sim.standard_error), format_number(r.sim_auc.mean),
                        format_number(r.sim_auc.standard_error), std::to_string(r.sim_a_bal.count),
                        format_number(r.tolerance), r.within_tolerance ? "1" : "0"});
    }
}

void write_simulation_csv(std::ostream& out, const std::vector<std::pair<SimConfig, SimResult>>& runs) {
    write_row(out, {"seed", "N", "alpha", "b0", "rho_train", "rho_test", "learning_rate", "batch_size", "T_eff",
                    "langevin", "epochs_run", "R_emp", "b_emp", "train_loss", "train_error", "r", "s", "a", "a_bal",
                    "p", "f1", "p_neg", "f1_neg", "eps_g", "auc"});
    for (const auto& [c, r] : runs) {
        const EmpiricalMetrics& m = r.metrics_emp;
        write_row(out, {std::to_string(c.seed), std::to_string(c.dimension_N), format_number(c.alpha),
                        format_number(c.b0), format_number(c.rho_train), format_number(m.rho_test),
                        format_number(c.learning_rate), std::to_string(c.batch_size),
                        format_number(r.effective_temperature), c.dynamics == Dynamics::langevin ? "1" : "0",
                        std::to_string(r.epochs_run), format_number(r.overlap_R_emp), format_number(r.bias_emp),
                        format_number(r.train_loss_final), format_number(r.train_error_final), format_number(m.recall),
                        format_number(m.specificity), format_number(m.accuracy), format_number(m.balanced_accuracy),
                        format_number(m.precision), format_number(m.f1), format_number(m.precision_neg),
                        format_number(m.f1_neg), format_number(m.generalization_error), format_number(m.auc)});
    }
}

}  // namespace imbalance
