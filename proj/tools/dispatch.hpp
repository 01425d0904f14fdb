#pragma once

#include <iosfwd>

#include "config.hpp"

namespace imbalance::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_failure = 1,
    exit_parse_error = 2,
    exit_not_converged = 3,
    exit_io_error = 4,
    exit_out_of_tolerance = 5,
};

/// Runs the configured command. Data goes to cfg.output (stdout when
/// empty); progress goes to log.
int dispatch(const ExperimentConfig& cfg, std::ostream& data_out, std::ostream& log);

}  // namespace imbalance::cli
