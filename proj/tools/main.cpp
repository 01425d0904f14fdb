#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "config.hpp"
#include "dispatch.hpp"

namespace {

// Discards everything; used for --quiet.
class NullBuffer : public std::streambuf {
protected:
    int overflow(int c) override { return c; }
};

}  // namespace

int main(int argc, char** argv) {
    using namespace imbalance::cli;
    CLI::App app{"Replica-symmetric teacher-student perceptron under class imbalance"};
    std::vector<std::string> positionals;
    std::vector<std::string> sets;
    std::string output;
    int jobs = 1;
    bool quiet = false;
    bool list_keys = false;
    app.add_option("args", positionals, "[command] [config-file]")->expected(0, 2);
    app.add_option("--output,-o", output, "data file path (summary JSON is written next to it)");
    app.add_option("--jobs,-j", jobs, "worker threads for independent cells and seeds")->check(CLI::PositiveNumber);
    app.add_flag("--quiet,-q", quiet, "suppress progress output");
    app.add_option("--set", sets, "override one key: --set key=value (repeatable)");
    app.add_flag("--list-keys", list_keys, "print the configuration schema and exit");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_parse_error;
    }

    if (list_keys) {
        for (const KeyDoc& d : key_schema()) {
            std::cout << d.key << " = " << d.default_value << "    # " << d.description << '\n';
        }
        return exit_ok;
    }

    ExperimentConfig cfg = default_config();
    try {
        std::size_t next = 0;
        if (!positionals.empty()) {
            if (const auto cmd = command_from_name(positionals[0])) {
                cfg.command = cmd;
                next = 1;
            }
        }
        if (next < positionals.size()) {
            const std::string& path = positionals[next];
            std::ifstream in(path);
            if (!in) {
                std::cerr << "error: cannot read config file '" << path << "'\n";
                return exit_io_error;
            }
            std::ostringstream text;
            text << in.rdbuf();
            const auto given = cfg.command;
            apply_document(cfg, text.str(), path);
            if (given) cfg.command = given;
            if (next + 1 < positionals.size()) throw config_error("unexpected argument '" + positionals[next + 1] + "'");
        }
        for (const std::string& s : sets) apply_override(cfg, s);
        if (!output.empty()) {
            cfg.output = output;
            cfg.effective["output"] = output;
        }
        cfg.jobs = jobs;
        cfg.quiet = quiet;
        finalize(cfg);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_parse_error;
    }

    NullBuffer null_buffer;
    std::ostream null_stream(&null_buffer);
    return dispatch(cfg, std::cout, cfg.quiet ? null_stream : std::cerr);
}
