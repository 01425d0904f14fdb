#include "dispatch.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "imbalance/report_json.hpp"
#include "imbalance/special_functions.hpp"

#ifndef IMBALANCE_VERSION
#define IMBALANCE_VERSION "unknown"
#endif

namespace imbalance::cli {

namespace {

using nlohmann::json;

class io_failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Outputs {
    std::string data;
    json summary;
};

json provenance(const ExperimentConfig& cfg) {
    json config = json::object();
    for (const auto& [k, v] : cfg.effective) {
        // the output location does not affect the data
        if (k != "output") config[k] = v;
    }
    return {{"command", command_name(*cfg.command)},
            {"run_id", *cfg.run_id},
            {"code_version", IMBALANCE_VERSION},
            {"config", config}};
}

std::vector<double> grid_or_value(const ExperimentConfig& cfg, const char* axis, const std::optional<double>& value) {
    const auto it = cfg.grids.find(axis);
    if (it != cfg.grids.end()) return it->second;
    return {*value};
}

std::vector<double> extra_rho_tests(const ExperimentConfig& cfg) {
    const auto it = cfg.grids.find("rho_test");
    return it == cfg.grids.end() ? std::vector<double>{} : it->second;
}

std::filesystem::path summary_path(const std::filesystem::path& data) {
    std::filesystem::path p = data;
    return p.extension() == ".json" ? std::filesystem::path(p.string() + ".summary.json") : p.replace_extension(".json");
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_failure("cannot open '" + path.string() + "' for writing");
    out << content;
    out.close();
    if (!out) throw io_failure("write to '" + path.string() + "' failed");
}

void check_output_location(const ExperimentConfig& cfg) {
    if (cfg.output.empty()) return;
    const std::filesystem::path parent = std::filesystem::absolute(cfg.output).parent_path();
    if (!std::filesystem::is_directory(parent)) {
        throw io_failure("output directory '" + parent.string() + "' does not exist");
    }
}

int run_solve(const ExperimentConfig& cfg, Outputs& out, std::ostream& log) {
    const ControlParams cp = control_params(cfg);
    const SaddleSolution sol = solve_or_flag(cp, cfg.solver);
    const SweepRecord rec =
        make_record(cp, sol, canonical_rho_tests(cp.b0(), extra_rho_tests(cfg)), cfg.solver.integration);
    std::ostringstream csv;
    write_sweep_csv(csv, {rec});
    out.data = csv.str();
    out.summary["solution"] = to_json(sol);
    log << "solve: R = " << sol.params.R << ", q = " << sol.params.q << ", b = " << sol.params.b
        << ", residual = " << sol.residual_max() << ", iterations = " << sol.iterations
        << (sol.converged ? "" : " (NOT CONVERGED: " + sol.diagnostics + ")") << '\n';
    return sol.converged ? exit_ok : exit_not_converged;
}

int run_sweep_rho(const ExperimentConfig& cfg, Outputs& out, std::ostream& log) {
    const std::vector<double>& grid = cfg.grids.at("rho_train");
    std::vector<SweepRecord> records;
    json sweeps = json::array();
    std::size_t unconverged = 0;
    for (double b0 : grid_or_value(cfg, "b0", cfg.b0)) {
        for (double alpha : grid_or_value(cfg, "alpha", cfg.alpha)) {
            for (double T : grid_or_value(cfg, "T", cfg.temperature)) {
                const ControlParams base(b0, alpha, T, grid.front());
                const RhoSweepResult res = run_rho_sweep(base, grid, cfg.solver, extra_rho_tests(cfg));
                records.insert(records.end(), res.records.begin(), res.records.end());
                sweeps.push_back({{"b0", b0}, {"alpha", alpha}, {"T", T}, {"peak_summary", to_json(res.summary)}});
                unconverged += res.summary.unconverged_rho.size();
                log << "sweep-rho: b0 = " << b0 << ", alpha = " << alpha << ", T = " << T << ": " << grid.size()
                    << " points, " << res.summary.unconverged_rho.size() << " unconverged";
                if (res.summary.rho_at_max_R) log << ", argmax R at rho_train = " << *res.summary.rho_at_max_R;
                log << '\n';
            }
        }
    }
    std::ostringstream csv;
    write_sweep_csv(csv, records);
    out.data = csv.str();
    out.summary["sweeps"] = sweeps;
    return unconverged == 0 ? exit_ok : exit_not_converged;
}

int run_sweep_temperature(const ExperimentConfig& cfg, Outputs& out, std::ostream& log) {
    const std::vector<double>& grid = cfg.grids.at("T");
    const ControlParams base(*cfg.b0, *cfg.alpha, grid.front(), *cfg.rho_train);
    const TemperatureSweepResult res =
        run_temperature_sweep(base, grid, cfg.solver, cfg.drop_fraction, extra_rho_tests(cfg));
    std::ostringstream csv;
    write_sweep_csv(csv, res.records);
    out.data = csv.str();
    out.summary["T_star"] = number_json(res.T_star);
    out.summary["plateau_a_bal"] = number_json(res.plateau_a_bal);
    out.summary["drop_fraction"] = cfg.drop_fraction;
    int unconverged = 0;
    for (const auto& r : res.records) unconverged += r.solution.converged ? 0 : 1;
    log << "sweep-temperature: " << grid.size() << " points, " << unconverged << " unconverged, T* = ";
    if (res.T_star) {
        log << *res.T_star << '\n';
    } else {
        log << "undefined\n";
    }
    return unconverged == 0 ? exit_ok : exit_not_converged;
}

int run_map(const ExperimentConfig& cfg, Outputs& out, std::ostream& log) {
    const auto cells = run_rhostar_map(cfg.grids.at("b0"), cfg.grids.at("alpha"), *cfg.temperature,
                                       cfg.grids.at("rho_train"), cfg.solver, cfg.jobs);
    std::ostringstream csv;
    write_rhostar_csv(csv, cells);
    out.data = csv.str();
    int bad = 0;
    json errors = json::array();
    for (const auto& c : cells) {
        if (c.unconverged > 0 || !c.error.empty()) ++bad;
        if (!c.error.empty()) errors.push_back({{"b0", c.b0}, {"alpha", c.alpha}, {"error", c.error}});
    }
    out.summary["cells"] = cells.size();
    out.summary["cells_with_failures"] = bad;
    out.summary["errors"] = errors;
    log << "map-rhostar: " << cells.size() << " cells, " << bad << " with unconverged points\n";
    return bad == 0 ? exit_ok : exit_not_converged;
}

int run_simulate(const ExperimentConfig& cfg, Outputs& out, std::ostream& log) {
    const std::vector<double> rhos = grid_or_value(cfg, "rho_train", cfg.rho_train);
    std::vector<std::pair<SimConfig, SimResult>> runs(rhos.size());
    std::vector<std::string> errors(rhos.size());
    const auto n = static_cast<std::ptrdiff_t>(rhos.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, cfg.jobs))
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        SimConfig c = cfg.sim;
        c.rho_train = rhos[i];
        runs[i].first = c;
        try {
            runs[i].second = run_simulation(c);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }
    for (const auto& e : errors) {
        if (!e.empty()) throw std::runtime_error("simulation failed: " + e);
    }
    std::ostringstream csv;
    write_simulation_csv(csv, runs);
    out.data = csv.str();
    json details = json::array();
    for (const auto& [c, r] : runs) details.push_back({{"config", to_json(c)}, {"result", to_json(r, true)}});
    out.summary["runs"] = details;
    log << "simulate: " << runs.size() << " runs\n";
    return exit_ok;
}

int run_compare(const ExperimentConfig& cfg, Outputs& out, std::ostream& log) {
    const std::vector<double> rhos = grid_or_value(cfg, "rho_train", cfg.rho_train);
    std::vector<ComparisonRecord> records;
    bool all_converged = true;
    bool all_within = true;
    for (double rho : rhos) {
        const ControlParams cp(*cfg.b0, *cfg.alpha, *cfg.temperature, rho);
        SimConfig sim = cfg.sim;
        sim.rho_train = rho;
        records.push_back(compare_theory_simulation(cp, sim, cfg.seeds, cfg.solver, cfg.compare_tolerance, cfg.jobs));
        const auto& r = records.back();
        all_converged = all_converged && r.theory.converged;
        all_within = all_within && r.within_tolerance;
        log << "compare: rho_train = " << rho << ", theory a_bal = " << r.theory_a_bal
            << ", simulated a_bal = " << r.sim_a_bal.mean << " +- " << r.sim_a_bal.standard_error << '\n';
    }
    std::ostringstream csv;
    write_comparison_csv(csv, records);
    out.data = csv.str();
    json rec_json = json::array();
    std::vector<double> x;
    std::vector<std::optional<double>> theory, simulated;
    for (const auto& r : records) {
        rec_json.push_back(to_json(r));
        x.push_back(r.rho_train);
        theory.push_back(r.theory_a_bal);
        simulated.push_back(r.sim_a_bal.mean);
    }
    out.summary["records"] = rec_json;
    std::vector<std::uint64_t> seeds;
    for (int k = 0; k < cfg.seeds; ++k) seeds.push_back(cfg.seed + static_cast<std::uint64_t>(k));
    out.summary["seeds"] = seeds;
    if (rhos.size() > 1) {
        const auto tp = refine_peak(x, theory);
        const auto sp = refine_peak(x, simulated);
        out.summary["theory_peak_rho"] = tp ? json(tp->location) : json(nullptr);
        out.summary["simulation_peak_rho"] = sp ? json(sp->location) : json(nullptr);
    }
    out.summary["within_tolerance"] = all_within;
    if (!all_converged) return exit_not_converged;
    return all_within ? exit_ok : exit_out_of_tolerance;
}

int run_boundary(const ExperimentConfig& cfg, Outputs& out, std::ostream& log) {
    const std::vector<double> b0s = grid_or_value(cfg, "b0", cfg.b0);
    std::ostringstream csv;
    csv << "b0,rho0,density_plus,density_minus,ratio\n";
    for (double b0 : b0s) {
        const BoundaryDensity d = boundary_density(b0);
        const double ratio = d.density_plus / d.density_minus;
        csv << format_number(b0) << ',' << format_number(rho_intrinsic(b0)) << ',' << format_number(d.density_plus)
            << ',' << format_number(d.density_minus) << ',' << format_number(ratio) << '\n';
        log << "boundary: b0 = " << b0 << ", density_plus = " << d.density_plus
            << ", density_minus = " << d.density_minus << ", ratio = " << ratio << '\n';
    }
    out.data = csv.str();
    return exit_ok;
}

}  // namespace

int dispatch(const ExperimentConfig& cfg, std::ostream& data_out, std::ostream& log) {
    try {
        check_output_location(cfg);
        Outputs out;
        out.summary = json::object();
        int code = exit_ok;
        switch (*cfg.command) {
            case Command::solve:
                code = run_solve(cfg, out, log);
                break;
            case Command::sweep_rho:
                code = run_sweep_rho(cfg, out, log);
                break;
            case Command::sweep_temperature:
                code = run_sweep_temperature(cfg, out, log);
                break;
            case Command::map_rhostar:
                code = run_map(cfg, out, log);
                break;
            case Command::simulate:
                code = run_simulate(cfg, out, log);
                break;
            case Command::compare:
                code = run_compare(cfg, out, log);
                break;
            case Command::boundary:
                code = run_boundary(cfg, out, log);
                break;
        }
        out.summary["provenance"] = provenance(cfg);
        if (cfg.output.empty()) {
            data_out << out.data;
            data_out.flush();
            if (!data_out) throw io_failure("writing data to standard output failed");
        } else {
            write_file(cfg.output, out.data);
            write_file(summary_path(cfg.output), out.summary.dump(2) + "\n");
        }
        return code;
    } catch (const io_failure& e) {
        log << "error: " << e.what() << '\n';
        return exit_io_error;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return exit_failure;
    }
}

}  // namespace imbalance::cli
