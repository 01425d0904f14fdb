#pragma once

#include <json.hpp>

#include "imbalance/experiments.hpp"

namespace imbalance {

/// Non-finite numbers and empty optionals serialise as null.
nlohmann::json number_json(double x);
nlohmann::json number_json(const std::optional<double>& x);

nlohmann::json to_json(const OrderParams& op);
nlohmann::json to_json(const SaddleSolution& sol);
nlohmann::json to_json(const MetricsReport& m);
nlohmann::json to_json(const PeakSummary& s);
nlohmann::json to_json(const SolverSettings& s);
nlohmann::json to_json(const SimConfig& c);
nlohmann::json to_json(const EmpiricalMetrics& m);
/// The loss trajectory is included only when with_trajectory is set.
nlohmann::json to_json(const SimResult& r, bool with_trajectory);
nlohmann::json to_json(const ComparisonRecord& r);

}  // namespace imbalance
