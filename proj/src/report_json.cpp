#include "imbalance/report_json.hpp"

#include <cmath>

namespace imbalance {

using nlohmann::json;

json number_json(double x) {
    return std::isfinite(x) ? json(x) : json(nullptr);
}

json number_json(const std::optional<double>& x) {
    return x ? number_json(*x) : json(nullptr);
}

json to_json(const OrderParams& op) {
    return {{"R", op.R}, {"q", op.q}, {"R_hat", op.R_hat}, {"q_hat", op.q_hat}, {"b", op.b}};
}

json to_json(const SaddleSolution& sol) {
    json residuals = json::array();
    for (double r : sol.residuals) residuals.push_back(number_json(r));
    return {{"params", to_json(sol.params)},
            {"initial", to_json(sol.initial)},
            {"residuals", residuals},
            {"free_energy", number_json(sol.free_energy)},
            {"iterations", sol.iterations},
            {"converged", sol.converged},
            {"diagnostics", sol.diagnostics}};
}

json to_json(const MetricsReport& m) {
    return {{"rho_test", m.rho_test},
            {"r", m.recall},
            {"s", m.specificity},
            {"a", m.accuracy},
            {"a_bal", m.balanced_accuracy},
            {"p", number_json(m.precision)},
            {"f1", number_json(m.f1)},
            {"p_neg", number_json(m.precision_neg)},
            {"f1_neg", number_json(m.f1_neg)},
            {"eps_g", m.generalization_error}};
}

json to_json(const PeakSummary& s) {
    json per_metric = json::object();
    for (const auto& [k, v] : s.rho_at_max) per_metric[k] = number_json(v);
    return {{"rho_at_max_R", number_json(s.rho_at_max_R)},
            {"max_R", number_json(s.max_R)},
            {"rho_at_bias_match", s.rho_at_bias_match},
            {"rho_at_max", per_metric},
            {"unconverged_rho", s.unconverged_rho}};
}

json to_json(const SolverSettings& s) {
    const QuadratureSpec& q = s.integration.spec;
    return {{"damping", s.damping},
            {"min_damping", s.min_damping},
            {"tolerance", s.tolerance},
            {"max_iterations", s.max_iterations},
            {"bias_bracket_halfwidth", number_json(s.bias_bracket_halfwidth)},
            {"floor_epsilon", s.floor_epsilon},
            {"mode", s.mode == BiasMode::fixed_bias ? "fixed_bias" : "learned_bias"},
            {"node_count_t", q.node_count_t},
            {"node_count_y", q.node_count_y},
            {"truncation_radius", q.truncation_radius},
            {"scheme", q.scheme == QuadratureScheme::gauss_hermite ? "gauss_hermite" : "gauss_legendre_mapped"},
            {"route", s.integration.route == IntegrationRoute::tensor ? "tensor" : "reduced"}};
}

json to_json(const SimConfig& c) {
    return {{"N", c.dimension_N},
            {"alpha", c.alpha},
            {"b0", c.b0},
            {"rho_train", c.rho_train},
            {"rho_test", c.rho_test},
            {"test_size", c.test_size},
            {"learning_rate", c.learning_rate},
            {"batch_size", c.batch_size},
            {"epochs", c.epochs},
            {"seed", c.seed},
            {"dynamics", c.dynamics == Dynamics::langevin ? "langevin" : "sgd_sigmoid"},
            {"threshold", c.threshold},
            {"langevin_temperature", c.langevin_temperature},
            {"effective_temperature", c.effective_temperature()},
            {"plateau_tolerance", c.plateau_tolerance},
            {"plateau_window", c.plateau_window}};
}

json to_json(const EmpiricalMetrics& m) {
    return {{"tp", m.true_pos},
            {"fp", m.false_pos},
            {"tn", m.true_neg},
            {"fn", m.false_neg},
            {"rho_test", m.rho_test},
            {"r", number_json(m.recall)},
            {"s", number_json(m.specificity)},
            {"a", number_json(m.accuracy)},
            {"a_bal", number_json(m.balanced_accuracy)},
            {"p", number_json(m.precision)},
            {"f1", number_json(m.f1)},
            {"p_neg", number_json(m.precision_neg)},
            {"f1_neg", number_json(m.f1_neg)},
            {"eps_g", number_json(m.generalization_error)},
            {"auc", number_json(m.auc)}};
}

json to_json(const SimResult& r, bool with_trajectory) {
    json out = {{"R_emp", r.overlap_R_emp},
                {"b_emp", r.bias_emp},
                {"metrics", to_json(r.metrics_emp)},
                {"train_loss_final", r.train_loss_final},
                {"train_error_final", r.train_error_final},
                {"epochs_run", r.epochs_run},
                {"effective_temperature", r.effective_temperature}};
    if (with_trajectory) {
        json traj = json::array();
        for (const auto& [epoch, loss] : r.loss_trajectory) traj.push_back({epoch, number_json(loss)});
        out["loss_trajectory"] = traj;
    }
    return out;
}

namespace {

json stat_json(const MeanStat& s) {
    return {{"mean", number_json(s.mean)}, {"standard_error", number_json(s.standard_error)}, {"count", s.count}};
}

}  // namespace

json to_json(const ComparisonRecord& r) {
    return {{"rho_train", r.rho_train},
            {"theory", to_json(r.theory)},
            {"theory_a_bal", r.theory_a_bal},
            {"sim_R", stat_json(r.sim_R)},
            {"sim_b", stat_json(r.sim_b)},
            {"sim_a_bal", stat_json(r.sim_a_bal)},
            {"theory_a_bal_at_sim", stat_json(r.theory_a_bal_at_sim)},
            {"sim_auc", stat_json(r.sim_auc)},
            {"tolerance", r.tolerance},
            {"within_tolerance", r.within_tolerance},
            {"failed_seeds", r.failed_seeds}};
}

}  // namespace imbalance
