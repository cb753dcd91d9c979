#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>

#include <json.hpp>

#include "trustshape/experiment.hpp"
#include "trustshape/game.hpp"
#include "trustshape/lp_design.hpp"
#include "trustshape/sar.hpp"
#include "trustshape/shaping.hpp"
#include "trustshape/trust.hpp"
#include "trustshape/version.hpp"

namespace py = pybind11;
using namespace trustshape;

namespace {

ExperimentConfig config_from_string(const std::string& text) {
    ExperimentConfig cfg;
    if (!text.empty()) cfg = config_from_json(nlohmann::json::parse(text));
    cfg.validate();
    return cfg;
}

std::string repr_state(const TrustState& s) {
    std::ostringstream out;
    out << "TrustState(alpha=" << s.alpha << ", beta=" << s.beta << ")";
    return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "finite-horizon trust games with certified reward shaping";
    m.attr("__version__") = kVersion;

    py::register_exception<ConfigError>(m, "ConfigError");

    py::class_<TrustParams>(m, "TrustParams")
        .def(py::init<double, double>(), py::arg("w_s") = 1.0, py::arg("w_f") = 1.0)
        .def_readwrite("w_s", &TrustParams::w_s)
        .def_readwrite("w_f", &TrustParams::w_f)
        .def("__eq__", [](const TrustParams& a, const TrustParams& b) { return a == b; })
        .def("__repr__", [](const TrustParams& p) {
            std::ostringstream out;
            out << "TrustParams(w_s=" << p.w_s << ", w_f=" << p.w_f << ")";
            return out.str();
        });

    py::class_<TrustState>(m, "TrustState")
        .def(py::init<double, double>(), py::arg("alpha") = 1.0, py::arg("beta") = 1.0)
        .def_readwrite("alpha", &TrustState::alpha)
        .def_readwrite("beta", &TrustState::beta)
        .def("__eq__", [](const TrustState& a, const TrustState& b) { return a == b; })
        .def("__repr__", &repr_state);

    m.def("update_trust", &update_trust, py::arg("state"), py::arg("performance"),
          py::arg("params"), "Posterior update after observing a performance in [0, 1].");
    m.def("expected_trust", &expected_trust, py::arg("state"));
    m.def(
        "reachable_states",
        [](const TrustState& initial, const TrustParams& params, int stage) {
            return reachable_lattice(initial, params, stage).points;
        },
        py::arg("initial"), py::arg("params"), py::arg("stage"),
        "States reachable at a 1-based stage, ordered by success count.");

    py::class_<StageOutcome>(m, "StageOutcome")
        .def_readonly("reward", &StageOutcome::reward)
        .def_readonly("success_prob", &StageOutcome::success_prob);

    py::class_<LinearPotential>(m, "LinearPotential")
        .def(py::init<double, double>(), py::arg("a") = 0.0, py::arg("b") = 0.0)
        .def_readwrite("a", &LinearPotential::a)
        .def_readwrite("b", &LinearPotential::b)
        .def("__call__", &LinearPotential::operator(), py::arg("state"));

    m.def("shaping_reward", &shaping_reward, py::arg("potential"), py::arg("gamma"),
          py::arg("state"), py::arg("next"),
          "Potential-based stage bonus gamma * phi(next) - phi(state).");
    m.def("sar_shaping_coefficient", &sar_shaping_coefficient, py::arg("gamma"),
          py::arg("horizon"), py::arg("epsilon"), py::arg("w_s"));
    m.def(
        "design_potential",
        [](const TrustParams& params, double gamma, int horizon, double epsilon) {
            return solve_closed_form(build_lp(params, gamma, horizon, ShapingBudget(epsilon)));
        },
        py::arg("params"), py::arg("gamma"), py::arg("horizon"), py::arg("epsilon"),
        "Budget-constrained trust-seeking potential (the closed-form program optimum).");

    py::class_<BoundReport>(m, "BoundReport")
        .def_readonly("lhs", &BoundReport::lhs)
        .def_readonly("rhs", &BoundReport::rhs)
        .def_readonly("satisfied", &BoundReport::satisfied)
        .def_readonly("slack", &BoundReport::slack)
        .def("__repr__", [](const BoundReport& r) {
            std::ostringstream out;
            out << "BoundReport(lhs=" << r.lhs << ", rhs=" << r.rhs
                << ", satisfied=" << (r.satisfied ? "True" : "False") << ")";
            return out.str();
        });

    py::class_<LossBoundReport>(m, "LossBoundReport")
        .def_readonly("potential_gap", &LossBoundReport::potential_gap)
        .def_readonly("loss", &LossBoundReport::loss)
        .def_readonly("shaped_expected_potential", &LossBoundReport::shaped_expected_potential)
        .def_readonly("original_expected_potential",
                      &LossBoundReport::original_expected_potential);

    py::enum_<ThreatMode>(m, "ThreatMode")
        .value("PLUGIN", ThreatMode::kPlugin)
        .value("BAYES_POSTERIOR", ThreatMode::kBayesPosterior);

    py::class_<SarConfig>(m, "SarConfig")
        .def(py::init<>())
        .def_readwrite("kappa_h", &SarConfig::kappa_h)
        .def_readwrite("kappa_r", &SarConfig::kappa_r)
        .def_readwrite("w_health", &SarConfig::w_health)
        .def_readwrite("w_time", &SarConfig::w_time)
        .def_readwrite("gamma", &SarConfig::gamma)
        .def_readwrite("horizon", &SarConfig::horizon)
        .def_readwrite("trust", &SarConfig::trust)
        .def_readwrite("initial", &SarConfig::initial)
        .def_readwrite("mode", &SarConfig::mode)
        .def_readwrite("danger_nodes", &SarConfig::danger_nodes)
        .def_readwrite("estimate_nodes", &SarConfig::estimate_nodes)
        .def_readwrite("d_r_1", &SarConfig::d_r_1)
        .def("validate", &SarConfig::validate);

    m.def("expected_stage_outcome", &expected_stage_outcome, py::arg("state"), py::arg("d_r"),
          py::arg("a_r"), py::arg("config"),
          "Expected site reward and success probability of a recommendation.");
    m.def("compliance_probability", &compliance_probability, py::arg("state"));
    m.def("myopic_indifference_threshold", &myopic_indifference_threshold, py::arg("config"),
          py::arg("compliance"));

    py::class_<GameSpec>(m, "GameSpec")
        .def_readonly("horizon", &GameSpec::horizon)
        .def_readonly("discount", &GameSpec::discount)
        .def_readwrite("initial", &GameSpec::initial)
        .def_readonly("trust", &GameSpec::trust);

    m.def("build_sar_game", &build_sar_game, py::arg("config"),
          "Complete scenario game: estimate law, stage model, trust gains and sampler.");
    m.def("shape_game", &shape_game, py::arg("spec"), py::arg("potential"),
          "Reward-shaped copy of a game; transitions stay untouched.");

    py::class_<ValueTable>(m, "ValueTable")
        .def("at", &ValueTable::at, py::arg("stage"), py::arg("k"))
        .def_property_readonly("horizon", &ValueTable::horizon)
        .def_readonly("stages", &ValueTable::stages);

    py::class_<PolicyRule>(m, "PolicyRule")
        .def("action", &PolicyRule::action, py::arg("stage"), py::arg("k"), py::arg("obs_index"))
        .def_static("constant", &PolicyRule::constant, py::arg("spec"), py::arg("action"))
        .def("__eq__", [](const PolicyRule& a, const PolicyRule& b) { return a == b; });

    py::class_<SolveResult>(m, "SolveResult")
        .def_readonly("values", &SolveResult::values)
        .def_readonly("policy", &SolveResult::policy);

    m.def("solve_optimal", &solve_optimal, py::arg("spec"),
          "Exact finite-horizon solve by backward induction.");
    m.def("evaluate_policy", &evaluate_policy, py::arg("spec"), py::arg("policy"));
    m.def("stage_q_values", &stage_q_values, py::arg("spec"), py::arg("cont"), py::arg("stage"),
          py::arg("k"), py::arg("obs"));
    m.def("final_state_distribution", &final_state_distribution, py::arg("spec"),
          py::arg("policy"));

    py::class_<McEstimate>(m, "McEstimate")
        .def_readonly("mean", &McEstimate::mean)
        .def_readonly("std_error", &McEstimate::std_error)
        .def_readonly("samples", &McEstimate::samples)
        .def_readonly("seed", &McEstimate::seed);

    py::class_<RolloutStats>(m, "RolloutStats")
        .def_readonly("value", &RolloutStats::value)
        .def_readonly("final_trust", &RolloutStats::final_trust);

    m.def("mc_rollout_stats", &mc_rollout_stats, py::arg("spec"), py::arg("policy"),
          py::arg("samples"), py::arg("seed"),
          "Monte-Carlo value and final-trust estimates over independent episodes.");

    m.def("telescoping_check", &telescoping_check, py::arg("spec"), py::arg("potential"),
          py::arg("policy"), "Certifies the exact shaped-minus-plain payoff decomposition.");
    m.def(
        "performance_loss_check",
        [](const GameSpec& spec, const LinearPotential& phi, double epsilon) {
            return performance_loss_check(spec, phi, ShapingBudget(epsilon));
        },
        py::arg("spec"), py::arg("potential"), py::arg("epsilon"),
        "Certifies both halves of the performance-loss guarantee.");

    // Config-driven pipeline, mirroring the command-line tool. Configs are
    // JSON strings; empty string means the defaults.
    m.def(
        "sweep_csv",
        [](const std::string& config_json) {
            const ExperimentConfig cfg = config_from_string(config_json);
            return sweep_csv(run_sweep(cfg), cfg);
        },
        py::arg("config_json") = std::string(),
        py::call_guard<py::gil_scoped_release>());
    m.def(
        "verify_report",
        [](const std::string& config_json) {
            const ExperimentConfig cfg = config_from_string(config_json);
            VerifyResult res;
            {
                py::gil_scoped_release release;
                res = run_verify(cfg);
            }
            return py::make_tuple(res.all_passed, res.report.dump());
        },
        py::arg("config_json") = std::string());
    m.def(
        "simulate_jsonl",
        [](const std::string& config_json, const std::string& policy) {
            const ExperimentConfig cfg = config_from_string(config_json);
            const PolicyChoice choice = policy_choice_from_string(policy);
            return rollouts_jsonl(run_simulate(cfg, choice), cfg);
        },
        py::arg("config_json") = std::string(), py::arg("policy") = std::string("optimal"),
        py::call_guard<py::gil_scoped_release>());
    m.def("config_schema_json", []() { return config_schema().dump(); });
    m.def("default_config_json", []() {
        ExperimentConfig cfg;
        return config_to_json(cfg).dump();
    });
}
