#include "config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <sstream>

namespace imbalance::cli {

namespace {

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

struct KeyEntry {
    KeyDoc doc;
    Setter set;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_real(const std::string& text) {
    const std::string t = trim(text);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v)) {
        throw std::invalid_argument("expected a finite real number, got '" + t + "'");
    }
    return v;
}

long long parse_integer(const std::string& text) {
    const std::string t = trim(text);
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) {
        throw std::invalid_argument("expected an integer, got '" + t + "'");
    }
    return v;
}

std::uint64_t parse_unsigned(const std::string& text) {
    const std::string t = trim(text);
    char* end = nullptr;
    errno = 0;
    if (t.empty() || t[0] == '-') throw std::invalid_argument("expected a non-negative integer, got '" + t + "'");
    const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
    if (end != t.c_str() + t.size() || errno == ERANGE) {
        throw std::invalid_argument("expected a non-negative integer, got '" + t + "'");
    }
    return v;
}

struct Range {
    double lo;
    double hi;
    bool lo_open;
    bool hi_open;

    bool contains(double v) const {
        const bool above = lo_open ? v > lo : v >= lo;
        const bool below = hi_open ? v < hi : v <= hi;
        return above && below;
    }
    std::string describe() const {
        std::ostringstream out;
        out << (lo_open ? "(" : "[") << lo << ", ";
        if (std::isinf(hi)) {
            out << "inf)";
        } else {
            out << hi << (hi_open ? ")" : "]");
        }
        return out.str();
    }
};

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr Range any_real{-inf, inf, true, true};
constexpr Range positive{0.0, inf, true, true};
constexpr Range non_negative{0.0, inf, false, true};
constexpr Range unit_closed{0.0, 1.0, false, false};
constexpr Range unit_open{0.0, 1.0, true, true};

double checked(double v, Range r) {
    if (!r.contains(v)) {
        std::ostringstream out;
        out << "value " << v << " outside accepted range " << r.describe();
        throw std::invalid_argument(out.str());
    }
    return v;
}

int checked_int(const std::string& text, long long lo) {
    const long long v = parse_integer(text);
    if (v < lo || v > std::numeric_limits<int>::max()) {
        throw std::invalid_argument("value " + std::to_string(v) + " outside accepted range [" + std::to_string(lo) +
                                    ", " + std::to_string(std::numeric_limits<int>::max()) + "]");
    }
    return static_cast<int>(v);
}

std::string checked_choice(const std::string& text, std::initializer_list<const char*> choices) {
    const std::string t = trim(text);
    std::string all;
    for (const char* c : choices) {
        if (t == c) return t;
        all += all.empty() ? c : std::string(", ") + c;
    }
    throw std::invalid_argument("value '" + t + "' not one of {" + all + "}");
}

Setter real_key(std::optional<double> ExperimentConfig::*field, Range r) {
    return [=](ExperimentConfig& c, const std::string& v) { c.*field = checked(parse_real(v), r); };
}

Setter grid_key(const std::string& axis, Range r) {
    return [=](ExperimentConfig& c, const std::string& v) {
        std::vector<double> g = parse_grid(v);
        for (double x : g) checked(x, r);
        c.grids[axis] = std::move(g);
    };
}

const std::vector<KeyEntry>& entries() {
    static const std::vector<KeyEntry> list = {
        {{"command", "", "solve | sweep-rho | sweep-temperature | map-rhostar | simulate | compare | boundary"},
         [](ExperimentConfig& c, const std::string& v) {
             const auto cmd = command_from_name(trim(v));
             if (!cmd) throw std::invalid_argument("unknown command '" + trim(v) + "'");
             c.command = cmd;
         }},
        {{"b0", "", "teacher bias, finite real"}, real_key(&ExperimentConfig::b0, any_real)},
        {{"alpha", "", "data abundance P/N, > 0"}, real_key(&ExperimentConfig::alpha, positive)},
        {{"T", "", "temperature, > 0"}, real_key(&ExperimentConfig::temperature, positive)},
        {{"rho_train", "", "fraction of anomalies in the training measure, [0, 1]"},
         real_key(&ExperimentConfig::rho_train, unit_closed)},
        {{"grid.rho_train", "", "rho_train grid, values in [0, 1]"}, grid_key("rho_train", unit_closed)},
        {{"grid.T", "", "temperature grid, values > 0"}, grid_key("T", positive)},
        {{"grid.b0", "", "teacher bias grid"}, grid_key("b0", any_real)},
        {{"grid.alpha", "", "alpha grid, values > 0"}, grid_key("alpha", positive)},
        {{"grid.rho_test", "", "extra test imbalances besides 0.5 and rho0, values in (0, 1)"},
         grid_key("rho_test", unit_open)},
        {{"solver.damping", "0.3", "fixed-point damping, (0, 1]"},
         [](ExperimentConfig& c, const std::string& v) {
             c.solver.damping = checked(parse_real(v), {0.0, 1.0, true, false});
         }},
        {{"solver.min_damping", "0.05", "lower limit for automatic damping reduction, (0, 1]"},
         [](ExperimentConfig& c, const std::string& v) {
             c.solver.min_damping = checked(parse_real(v), {0.0, 1.0, true, false});
         }},
        {{"solver.tolerance", "1e-09", "max-norm update tolerance, >= 1e-12"},
         [](ExperimentConfig& c, const std::string& v) {
             c.solver.tolerance = checked(parse_real(v), {1e-12, inf, false, true});
         }},
        {{"solver.max_iterations", "20000", "iteration cap, >= 1"},
         [](ExperimentConfig& c, const std::string& v) { c.solver.max_iterations = checked_int(v, 1); }},
        {{"solver.bias_bracket_halfwidth", "auto", "bias root bracket half-width, > 0, or auto = max(5, 3|b0|)"},
         [](ExperimentConfig& c, const std::string& v) {
             if (trim(v) == "auto") {
                 c.solver.bias_bracket_halfwidth.reset();
             } else {
                 c.solver.bias_bracket_halfwidth = checked(parse_real(v), positive);
             }
         }},
        {{"solver.floor_epsilon", "1e-12", "floor for 1 - q, (0, 1e-3)"},
         [](ExperimentConfig& c, const std::string& v) {
             c.solver.floor_epsilon = checked(parse_real(v), {0.0, 1e-3, true, true});
         }},
        {{"solver.mode", "learned_bias", "learned_bias | fixed_bias"},
         [](ExperimentConfig& c, const std::string& v) {
             c.solver.mode = checked_choice(v, {"learned_bias", "fixed_bias"}) == "fixed_bias" ? BiasMode::fixed_bias
                                                                                               : BiasMode::learned_bias;
         }},
        {{"quadrature.node_count_t", "200", "Dt nodes per 16 standard deviations, >= 8"},
         [](ExperimentConfig& c, const std::string& v) { c.solver.integration.spec.node_count_t = checked_int(v, 8); }},
        {{"quadrature.node_count_y", "200", "Dy nodes per 16 standard deviations, >= 8"},
         [](ExperimentConfig& c, const std::string& v) { c.solver.integration.spec.node_count_y = checked_int(v, 8); }},
        {{"quadrature.truncation_radius", "8", "truncation radius in standard deviations, >= 6"},
         [](ExperimentConfig& c, const std::string& v) {
             c.solver.integration.spec.truncation_radius = checked(parse_real(v), {6.0, inf, false, true});
         }},
        {{"quadrature.scheme", "gauss_legendre_mapped", "gauss_legendre_mapped | gauss_hermite"},
         [](ExperimentConfig& c, const std::string& v) {
             c.solver.integration.spec.scheme =
                 checked_choice(v, {"gauss_legendre_mapped", "gauss_hermite"}) == "gauss_hermite"
                     ? QuadratureScheme::gauss_hermite
                     : QuadratureScheme::gauss_legendre_mapped;
         }},
        {{"quadrature.route", "reduced", "reduced | tensor"},
         [](ExperimentConfig& c, const std::string& v) {
             c.solver.integration.route =
                 checked_choice(v, {"reduced", "tensor"}) == "tensor" ? IntegrationRoute::tensor : IntegrationRoute::reduced;
         }},
        {{"sweep.drop_fraction", "0.02", "relative a_bal drop defining T*, (0, 1)"},
         [](ExperimentConfig& c, const std::string& v) { c.drop_fraction = checked(parse_real(v), unit_open); }},
        {{"sim.N", "5000", "input dimension, >= 1"},
         [](ExperimentConfig& c, const std::string& v) { c.sim.dimension_N = checked_int(v, 1); }},
        {{"sim.rho_test", "0.5", "test imbalance of the simulated test set, (0, 1)"},
         [](ExperimentConfig& c, const std::string& v) { c.sim.rho_test = checked(parse_real(v), unit_open); }},
        {{"sim.test_size", "10000", "test samples, >= 1"},
         [](ExperimentConfig& c, const std::string& v) { c.sim.test_size = checked_int(v, 1); }},
        {{"sim.learning_rate", "0.5", "learning rate, > 0"},
         [](ExperimentConfig& c, const std::string& v) { c.sim.learning_rate = checked(parse_real(v), positive); }},
        {{"sim.batch_size", "20", "mini-batch size, >= 1"},
         [](ExperimentConfig& c, const std::string& v) { c.sim.batch_size = checked_int(v, 1); }},
        {{"sim.epochs", "200", "epoch cap, >= 1"},
         [](ExperimentConfig& c, const std::string& v) { c.sim.epochs = checked_int(v, 1); }},
        {{"sim.dynamics", "sgd_sigmoid", "sgd_sigmoid | langevin"},
         [](ExperimentConfig& c, const std::string& v) {
             c.sim.dynamics =
                 checked_choice(v, {"sgd_sigmoid", "langevin"}) == "langevin" ? Dynamics::langevin : Dynamics::sgd_sigmoid;
         }},
        {{"sim.threshold", "0.5", "sigmoid readout threshold, (0, 1)"},
         [](ExperimentConfig& c, const std::string& v) { c.sim.threshold = checked(parse_real(v), unit_open); }},
        {{"sim.langevin_temperature", "0", "Langevin temperature, >= 0; 0 means learning_rate / batch_size"},
         [](ExperimentConfig& c, const std::string& v) {
             c.sim.langevin_temperature = checked(parse_real(v), non_negative);
         }},
        {{"sim.plateau_tolerance", "1e-05", "relative loss change ending training, >= 0"},
         [](ExperimentConfig& c, const std::string& v) {
             c.sim.plateau_tolerance = checked(parse_real(v), non_negative);
         }},
        {{"sim.plateau_window", "10", "epochs over which the plateau is measured, >= 1"},
         [](ExperimentConfig& c, const std::string& v) { c.sim.plateau_window = checked_int(v, 1); }},
        {{"compare.seeds", "20", "simulation seeds per point, >= 3"},
         [](ExperimentConfig& c, const std::string& v) { c.seeds = checked_int(v, 3); }},
        {{"compare.tolerance", "0.03", "allowed |a_bal difference|, > 0"},
         [](ExperimentConfig& c, const std::string& v) { c.compare_tolerance = checked(parse_real(v), positive); }},
        {{"seed", "1", "base random seed, unsigned 64-bit"},
         [](ExperimentConfig& c, const std::string& v) { c.seed = parse_unsigned(v); }},
        {{"output", "", "data file path; summary JSON goes next to it"},
         [](ExperimentConfig& c, const std::string& v) { c.output = trim(v); }},
        {{"run_id", "", "identifier recorded in the provenance block; default seed-<seed>"},
         [](ExperimentConfig& c, const std::string& v) { c.run_id = trim(v); }},
    };
    return list;
}

void apply_assignment(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                      const std::string& where) {
    for (const KeyEntry& e : entries()) {
        if (e.doc.key != key) continue;
        try {
            e.set(cfg, value);
        } catch (const std::invalid_argument& err) {
            throw config_error(where + ": key '" + key + "': " + err.what());
        }
        cfg.effective[key] = trim(value);
        return;
    }
    throw config_error(where + ": unknown key '" + key + "'");
}

void require(const ExperimentConfig& cfg, bool present, const char* key) {
    if (!present) {
        throw config_error(std::string("missing required key '") + key + "' for command '" +
                           command_name(*cfg.command) + "'");
    }
}

}  // namespace

std::optional<Command> command_from_name(const std::string& name) {
    static const std::map<std::string, Command> names = {
        {"solve", Command::solve},         {"sweep-rho", Command::sweep_rho},
        {"sweep-temperature", Command::sweep_temperature}, {"map-rhostar", Command::map_rhostar},
        {"simulate", Command::simulate},   {"compare", Command::compare},
        {"boundary", Command::boundary}};
    const auto it = names.find(name);
    if (it == names.end()) return std::nullopt;
    return it->second;
}

const char* command_name(Command c) {
    switch (c) {
        case Command::solve:
            return "solve";
        case Command::sweep_rho:
            return "sweep-rho";
        case Command::sweep_temperature:
            return "sweep-temperature";
        case Command::map_rhostar:
            return "map-rhostar";
        case Command::simulate:
            return "simulate";
        case Command::compare:
            return "compare";
        case Command::boundary:
            return "boundary";
    }
    return "";
}

const std::vector<KeyDoc>& key_schema() {
    static const std::vector<KeyDoc> docs = [] {
        std::vector<KeyDoc> out;
        for (const KeyEntry& e : entries()) out.push_back(e.doc);
        return out;
    }();
    return docs;
}

std::vector<double> parse_grid(const std::string& text) {
    const std::string t = trim(text);
    std::istringstream words(t);
    std::string head;
    words >> head;
    if (head == "linspace" || head == "logspace") {
        std::string a, b, n, extra;
        if (!(words >> a >> b >> n) || (words >> extra)) {
            throw std::invalid_argument("expected '" + head + " start stop count'");
        }
        const double lo = parse_real(a);
        const double hi = parse_real(b);
        const long long count = parse_integer(n);
        if (count < 1) throw std::invalid_argument("grid count must be >= 1");
        if (head == "logspace" && !(lo > 0.0 && hi > 0.0)) {
            throw std::invalid_argument("logspace endpoints must be > 0");
        }
        std::vector<double> out;
        for (long long i = 0; i < count; ++i) {
            const double f = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
            out.push_back(head == "linspace" ? lo + f * (hi - lo)
                                             : std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))));
        }
        out.back() = count == 1 ? lo : hi;
        return out;
    }
    std::vector<double> out;
    std::istringstream items(t);
    std::string item;
    while (std::getline(items, item, ',')) out.push_back(parse_real(item));
    if (out.empty()) throw std::invalid_argument("empty grid");
    return out;
}

ExperimentConfig default_config() {
    ExperimentConfig cfg;
    for (const KeyDoc& d : key_schema()) cfg.effective[d.key] = d.default_value;
    return cfg;
}

void apply_document(ExperimentConfig& cfg, const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const std::string where = source + ":" + std::to_string(number);
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw config_error(where + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw config_error(where + ": empty key");
        apply_assignment(cfg, key, line.substr(eq + 1), where);
    }
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw config_error("--set " + assignment + ": expected key=value");
    apply_assignment(cfg, trim(assignment.substr(0, eq)), assignment.substr(eq + 1), "--set " + assignment);
}

void finalize(ExperimentConfig& cfg) {
    if (!cfg.command) throw config_error("no command given (positional argument or 'command' key)");
    cfg.effective["command"] = command_name(*cfg.command);
    const auto has_grid = [&](const char* axis) { return cfg.grids.count(axis) > 0; };
    switch (*cfg.command) {
        case Command::solve:
            require(cfg, cfg.b0.has_value(), "b0");
            require(cfg, cfg.alpha.has_value(), "alpha");
            require(cfg, cfg.temperature.has_value(), "T");
            require(cfg, cfg.rho_train.has_value(), "rho_train");
            break;
        case Command::sweep_rho:
            // b0, alpha and T may each be a list: one rho sweep per combination.
            require(cfg, cfg.b0.has_value() || has_grid("b0"), "b0");
            require(cfg, cfg.alpha.has_value() || has_grid("alpha"), "alpha");
            require(cfg, cfg.temperature.has_value() || has_grid("T"), "T");
            require(cfg, has_grid("rho_train"), "grid.rho_train");
            break;
        case Command::sweep_temperature: {
            require(cfg, cfg.b0.has_value(), "b0");
            require(cfg, cfg.alpha.has_value(), "alpha");
            require(cfg, cfg.rho_train.has_value(), "rho_train");
            require(cfg, has_grid("T"), "grid.T");
            const auto& g = cfg.grids["T"];
            const auto [lo, hi] = std::minmax_element(g.begin(), g.end());
            if (*hi / *lo < 100.0 * (1.0 - 1e-12)) {
                throw config_error("key 'grid.T': grid must span at least two decades");
            }
            break;
        }
        case Command::map_rhostar:
            require(cfg, has_grid("b0"), "grid.b0");
            require(cfg, has_grid("alpha"), "grid.alpha");
            require(cfg, cfg.temperature.has_value(), "T");
            if (!has_grid("rho_train")) {
                cfg.grids["rho_train"] = parse_grid("linspace 0.125 0.875 31");
                cfg.effective["grid.rho_train"] = "linspace 0.125 0.875 31";
            }
            break;
        case Command::simulate:
            require(cfg, cfg.b0.has_value(), "b0");
            require(cfg, cfg.alpha.has_value(), "alpha");
            require(cfg, cfg.rho_train.has_value() || has_grid("rho_train"), "rho_train");
            break;
        case Command::compare: {
            require(cfg, cfg.b0.has_value(), "b0");
            require(cfg, cfg.alpha.has_value(), "alpha");
            require(cfg, cfg.rho_train.has_value() || has_grid("rho_train"), "rho_train");
            const double T_sim = cfg.sim.dynamics == Dynamics::langevin && cfg.sim.langevin_temperature > 0.0
                                     ? cfg.sim.langevin_temperature
                                     : cfg.sim.learning_rate / cfg.sim.batch_size;
            if (cfg.temperature && std::abs(*cfg.temperature - T_sim) > 1e-9 * T_sim) {
                std::ostringstream msg;
                msg << "key 'T': " << *cfg.temperature << " does not match the simulation temperature " << T_sim;
                throw config_error(msg.str());
            }
            cfg.temperature = T_sim;
            break;
        }
        case Command::boundary:
            require(cfg, cfg.b0.has_value() || has_grid("b0"), "b0");
            break;
    }
    if (cfg.solver.min_damping > cfg.solver.damping) {
        throw config_error("key 'solver.min_damping': must not exceed solver.damping");
    }
    cfg.sim.seed = cfg.seed;
    if (cfg.b0) cfg.sim.b0 = *cfg.b0;
    if (cfg.alpha) cfg.sim.alpha = *cfg.alpha;
    if (cfg.rho_train) cfg.sim.rho_train = *cfg.rho_train;
    if (*cfg.command == Command::simulate || *cfg.command == Command::compare) {
        try {
            cfg.sim.validate();
        } catch (const std::invalid_argument& e) {
            throw config_error(std::string("simulation settings: ") + e.what());
        }
    }
    if (!cfg.run_id) cfg.run_id = "seed-" + std::to_string(cfg.seed);
    cfg.effective["run_id"] = *cfg.run_id;
}

ControlParams control_params(const ExperimentConfig& cfg) {
    const auto first = [&](const char* axis, const std::optional<double>& v, double fallback) {
        if (v) return *v;
        const auto it = cfg.grids.find(axis);
        return it != cfg.grids.end() && !it->second.empty() ? it->second.front() : fallback;
    };
    return ControlParams(first("b0", cfg.b0, 0.0), first("alpha", cfg.alpha, 1.0), first("T", cfg.temperature, 1.0),
                         first("rho_train", cfg.rho_train, 0.5));
}

}  // namespace imbalance::cli
