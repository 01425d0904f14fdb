#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "imbalance/saddle_solver.hpp"
#include "imbalance/simulator.hpp"

namespace imbalance::cli {

enum class Command { solve, sweep_rho, sweep_temperature, map_rhostar, simulate, compare, boundary };

std::optional<Command> command_from_name(const std::string& name);
const char* command_name(Command c);

/// Parse failure; message is anchored to "<source>:<line>" or "--set".
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::optional<Command> command;
    std::optional<double> b0;
    std::optional<double> alpha;
    std::optional<double> temperature;
    std::optional<double> rho_train;
    /// Keyed by axis: rho_train, T, b0, alpha, rho_test.
    std::map<std::string, std::vector<double>> grids;
    SolverSettings solver;
    double drop_fraction = 0.02;
    SimConfig sim;
    int seeds = 20;
    double compare_tolerance = 0.03;
    std::uint64_t seed = 1;
    std::string output;
    std::optional<std::string> run_id;
    int jobs = 1;
    bool quiet = false;
    /// Every schema key with its effective value, defaults included.
    std::map<std::string, std::string> effective;
};

struct KeyDoc {
    std::string key;
    std::string default_value;
    std::string description;
};

/// The full key schema in documentation order.
const std::vector<KeyDoc>& key_schema();

/// Assignments "key = value", one per line; '#' starts a comment.
/// source names the document in error messages.
void apply_document(ExperimentConfig& cfg, const std::string& text, const std::string& source);

/// A single "key=value" override.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

ExperimentConfig default_config();

/// Checks the keys the command needs and the cross-field invariants.
void finalize(ExperimentConfig& cfg);

/// Grid syntax: "v1, v2, ...", "linspace a b n" or "logspace a b n".
std::vector<double> parse_grid(const std::string& text);

ControlParams control_params(const ExperimentConfig& cfg);

}  // namespace imbalance::cli
