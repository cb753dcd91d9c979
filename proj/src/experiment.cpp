#include "trustshape/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

#include "trustshape/lp_design.hpp"
#include "trustshape/version.hpp"

namespace trustshape {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
                return item.key() == k;
            }) == allowed.end())
            fail("unknown config key: " + (path.empty() ? item.key() : path + "." + item.key()));
    }
}

template <typename T>
void read_field(const json& j, const std::string& path, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        fail("config key " + (path.empty() ? std::string(key) : path + "." + key) +
             " has the wrong type");
    }
}

void read_cost_cell(const json& j, const std::string& path, const char* key, CostCell& out) {
    if (!j.contains(key)) return;
    const json& cell = j.at(key);
    if (!cell.is_array() || cell.size() != 2)
        fail("config key " + path + "." + key + " must be a [health, time] pair");
    try {
        out.health = cell.at(0).get<double>();
        out.time = cell.at(1).get<double>();
    } catch (const json::exception&) {
        fail("config key " + path + "." + key + " must hold two numbers");
    }
}

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf, 16);
}

json mc_to_json(const McEstimate& e) {
    return json{{"mean", e.mean}, {"std_error", e.std_error}, {"samples", e.samples}, {"seed", e.seed}};
}

struct TaskStats {
    McEstimate task_value;
    McEstimate final_trust;
    McEstimate total_value;
};

// Rollout statistics splitting the task payoff from the shaping bonus.
TaskStats rollout_task_stats(const GameSpec& spec, const PolicyRule& policy, long samples,
                             std::uint64_t seed, int keep, std::vector<Trajectory>* logged) {
    double mean_task = 0.0, m2_task = 0.0;
    double mean_total = 0.0, m2_total = 0.0;
    double mean_ft = 0.0, m2_ft = 0.0;
    for (long i = 0; i < samples; ++i) {
        RngStream rng(seed, static_cast<std::uint64_t>(i));
        Trajectory traj = simulate_rollout(spec, policy, rng);
        double task = 0.0, total = 0.0, disc = 1.0;
        for (const auto& step : traj.steps) {
            task += disc * step.task_reward;
            total += disc * (step.task_reward + step.shaping_reward);
            disc *= spec.discount;
        }
        const double ft = expected_trust(traj.steps.back().next_state);
        const double n = static_cast<double>(i + 1);
        auto push = [n](double x, double& mean, double& m2) {
            const double d = x - mean;
            mean += d / n;
            m2 += d * (x - mean);
        };
        push(task, mean_task, m2_task);
        push(total, mean_total, m2_total);
        push(ft, mean_ft, m2_ft);
        if (logged && i < keep) logged->push_back(std::move(traj));
    }
    auto finish = [samples, seed](double mean, double m2) {
        McEstimate e;
        e.mean = mean;
        e.samples = samples;
        e.seed = seed;
        e.std_error = samples > 1 ? std::sqrt(m2 / (samples - 1) / samples) : 0.0;
        return e;
    };
    return {finish(mean_task, m2_task), finish(mean_ft, m2_ft), finish(mean_total, m2_total)};
}

}  // namespace

std::vector<double> GridSpec::alphas() const {
    std::vector<double> out;
    const int count = static_cast<int>(std::floor((alpha_max - alpha_min) / step + 1e-9)) + 1;
    out.reserve(count);
    for (int i = 0; i < count; ++i) out.push_back(alpha_min + i * step);
    return out;
}

std::vector<double> GridSpec::betas() const {
    std::vector<double> out;
    const int count = static_cast<int>(std::floor((beta_max - beta_min) / step + 1e-9)) + 1;
    out.reserve(count);
    for (int i = 0; i < count; ++i) out.push_back(beta_min + i * step);
    return out;
}

void ExperimentConfig::validate() const {
    sar.validate();
    if (epsilons.empty()) fail("epsilons must list at least one budget");
    for (double e : epsilons)
        if (!(e >= 0.0)) fail("epsilons entries must be nonnegative");
    if (!(grid.alpha_min >= 1.0))
        fail("grid.alpha_min must be >= 1 (trust states require alpha >= 1)");
    if (!(grid.beta_min >= 1.0))
        fail("grid.beta_min must be >= 1 (trust states require beta >= 1)");
    if (!(grid.alpha_max >= grid.alpha_min)) fail("grid.alpha_max must be >= grid.alpha_min");
    if (!(grid.beta_max >= grid.beta_min)) fail("grid.beta_max must be >= grid.beta_min");
    if (!(grid.step > 0.0)) fail("grid.step must be positive");
    if (samples < 1) fail("samples must be >= 1");
    if (!(potential_scale > 0.0)) fail("potential_scale must be positive");
    if (log_rollouts < 0) fail("log_rollouts must be >= 0");
    for (const auto& s : verify_states)
        if (!(s[0] >= 1.0) || !(s[1] >= 1.0))
            fail("verify_states entries must satisfy alpha >= 1 and beta >= 1");
}

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) fail("config root must be a JSON object");
    check_keys(j, "",
               {"sar", "epsilons", "grid", "out_dir", "seed", "samples", "stage1",
                "potential_scale", "log_rollouts", "verify_states"});
    ExperimentConfig cfg;

    if (j.contains("sar")) {
        const json& s = j.at("sar");
        if (!s.is_object()) fail("config key sar must be an object");
        check_keys(s, "sar",
                   {"kappa_h", "kappa_r", "w_health", "w_time", "gamma", "horizon", "w_s", "w_f",
                    "alpha_1", "beta_1", "threat_mode", "danger_nodes", "estimate_nodes", "d_r_1",
                    "cost_table"});
        read_field(s, "sar", "kappa_h", cfg.sar.kappa_h);
        read_field(s, "sar", "kappa_r", cfg.sar.kappa_r);
        read_field(s, "sar", "w_health", cfg.sar.w_health);
        read_field(s, "sar", "w_time", cfg.sar.w_time);
        read_field(s, "sar", "gamma", cfg.sar.gamma);
        read_field(s, "sar", "horizon", cfg.sar.horizon);
        double ws = cfg.sar.trust.w_s, wf = cfg.sar.trust.w_f;
        read_field(s, "sar", "w_s", ws);
        read_field(s, "sar", "w_f", wf);
        try {
            cfg.sar.trust = TrustParams(ws, wf);
        } catch (const std::invalid_argument& e) {
            fail(std::string("sar.w_s/sar.w_f invalid: ") + e.what());
        }
        double a1 = cfg.sar.initial.alpha, b1 = cfg.sar.initial.beta;
        read_field(s, "sar", "alpha_1", a1);
        read_field(s, "sar", "beta_1", b1);
        try {
            cfg.sar.initial = TrustState(a1, b1);
        } catch (const std::invalid_argument& e) {
            fail(std::string("sar.alpha_1/sar.beta_1 invalid: ") + e.what());
        }
        if (s.contains("threat_mode")) {
            std::string mode;
            read_field(s, "sar", "threat_mode", mode);
            if (mode == "plugin")
                cfg.sar.mode = ThreatMode::kPlugin;
            else if (mode == "bayes")
                cfg.sar.mode = ThreatMode::kBayesPosterior;
            else
                fail("sar.threat_mode must be \"plugin\" or \"bayes\"");
        }
        read_field(s, "sar", "danger_nodes", cfg.sar.danger_nodes);
        read_field(s, "sar", "estimate_nodes", cfg.sar.estimate_nodes);
        read_field(s, "sar", "d_r_1", cfg.sar.d_r_1);
        if (s.contains("cost_table")) {
            const json& t = s.at("cost_table");
            if (!t.is_object()) fail("config key sar.cost_table must be an object");
            check_keys(t, "sar.cost_table",
                       {"threat_gear", "threat_nogear", "clear_gear", "clear_nogear"});
            read_cost_cell(t, "sar.cost_table", "threat_gear", cfg.sar.costs.threat_gear);
            read_cost_cell(t, "sar.cost_table", "threat_nogear", cfg.sar.costs.threat_nogear);
            read_cost_cell(t, "sar.cost_table", "clear_gear", cfg.sar.costs.clear_gear);
            read_cost_cell(t, "sar.cost_table", "clear_nogear", cfg.sar.costs.clear_nogear);
        }
    }

    read_field(j, "", "epsilons", cfg.epsilons);
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        if (!g.is_object()) fail("config key grid must be an object");
        check_keys(g, "grid", {"alpha_min", "alpha_max", "beta_min", "beta_max", "step"});
        read_field(g, "grid", "alpha_min", cfg.grid.alpha_min);
        read_field(g, "grid", "alpha_max", cfg.grid.alpha_max);
        read_field(g, "grid", "beta_min", cfg.grid.beta_min);
        read_field(g, "grid", "beta_max", cfg.grid.beta_max);
        read_field(g, "grid", "step", cfg.grid.step);
    }
    read_field(j, "", "out_dir", cfg.out_dir);
    read_field(j, "", "seed", cfg.seed);
    read_field(j, "", "samples", cfg.samples);
    if (j.contains("stage1")) {
        std::string mode;
        read_field(j, "", "stage1", mode);
        if (mode == "conditioned")
            cfg.stage1 = Stage1Mode::kConditioned;
        else if (mode == "expected")
            cfg.stage1 = Stage1Mode::kExpected;
        else
            fail("stage1 must be \"conditioned\" or \"expected\"");
    }
    read_field(j, "", "potential_scale", cfg.potential_scale);
    read_field(j, "", "log_rollouts", cfg.log_rollouts);
    if (j.contains("verify_states")) {
        cfg.verify_states.clear();
        const json& v = j.at("verify_states");
        if (!v.is_array()) fail("verify_states must be an array of [alpha, beta] pairs");
        for (const auto& entry : v) {
            if (!entry.is_array() || entry.size() != 2)
                fail("verify_states entries must be [alpha, beta] pairs");
            try {
                cfg.verify_states.push_back({entry.at(0).get<double>(), entry.at(1).get<double>()});
            } catch (const json::exception&) {
                fail("verify_states entries must hold two numbers");
            }
        }
    }

    try {
        cfg.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        fail(e.what());
    }
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        ExperimentConfig cfg;
        cfg.validate();
        return cfg;
    }
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail("config parse error in " + path + ": " + e.what());
    }
    return config_from_json(j);
}

json config_to_json(const ExperimentConfig& config) {
    json costs{{"threat_gear", {config.sar.costs.threat_gear.health, config.sar.costs.threat_gear.time}},
               {"threat_nogear",
                {config.sar.costs.threat_nogear.health, config.sar.costs.threat_nogear.time}},
               {"clear_gear", {config.sar.costs.clear_gear.health, config.sar.costs.clear_gear.time}},
               {"clear_nogear",
                {config.sar.costs.clear_nogear.health, config.sar.costs.clear_nogear.time}}};
    json sar{{"kappa_h", config.sar.kappa_h},
             {"kappa_r", config.sar.kappa_r},
             {"w_health", config.sar.w_health},
             {"w_time", config.sar.w_time},
             {"gamma", config.sar.gamma},
             {"horizon", config.sar.horizon},
             {"w_s", config.sar.trust.w_s},
             {"w_f", config.sar.trust.w_f},
             {"alpha_1", config.sar.initial.alpha},
             {"beta_1", config.sar.initial.beta},
             {"threat_mode", config.sar.mode == ThreatMode::kPlugin ? "plugin" : "bayes"},
             {"danger_nodes", config.sar.danger_nodes},
             {"estimate_nodes", config.sar.estimate_nodes},
             {"d_r_1", config.sar.d_r_1},
             {"cost_table", costs}};
    json grid{{"alpha_min", config.grid.alpha_min},
              {"alpha_max", config.grid.alpha_max},
              {"beta_min", config.grid.beta_min},
              {"beta_max", config.grid.beta_max},
              {"step", config.grid.step}};
    json states = json::array();
    for (const auto& s : config.verify_states) states.push_back({s[0], s[1]});
    // out_dir is deliberately omitted: it changes where results land, not what
    // they contain, and the hash should match across output locations.
    return json{{"sar", sar},
                {"epsilons", config.epsilons},
                {"grid", grid},
                {"seed", config.seed},
                {"samples", config.samples},
                {"stage1", config.stage1 == Stage1Mode::kConditioned ? "conditioned" : "expected"},
                {"potential_scale", config.potential_scale},
                {"log_rollouts", config.log_rollouts},
                {"verify_states", states}};
}

json config_schema() {
    auto entry = [](const char* type, json def, const char* doc) {
        return json{{"type", type}, {"default", std::move(def)}, {"description", doc}};
    };
    ExperimentConfig d;
    json schema;
    schema["sar.kappa_h"] = entry("number", d.sar.kappa_h, "human danger-estimate concentration, >= 1");
    schema["sar.kappa_r"] =
        entry("number", d.sar.kappa_r, "robot danger-estimate concentration, > kappa_h");
    schema["sar.w_health"] = entry("number", d.sar.w_health, "weight of the health cost");
    schema["sar.w_time"] = entry("number", d.sar.w_time, "weight of the time cost");
    schema["sar.gamma"] = entry("number", d.sar.gamma, "discount factor in (0,1]");
    schema["sar.horizon"] = entry("integer", d.sar.horizon, "number of sites visited per mission");
    schema["sar.w_s"] = entry("number", d.sar.trust.w_s, "trust gain per success");
    schema["sar.w_f"] = entry("number", d.sar.trust.w_f, "failure-count gain per failure");
    schema["sar.alpha_1"] = entry("number", d.sar.initial.alpha, "initial trust pseudo-successes, >= 1");
    schema["sar.beta_1"] = entry("number", d.sar.initial.beta, "initial trust pseudo-failures, >= 1");
    schema["sar.threat_mode"] = entry("string", "plugin",
                                      "threat probability from the robot estimate: \"plugin\" uses "
                                      "the estimate directly, \"bayes\" its posterior mean");
    schema["sar.danger_nodes"] =
        entry("integer", d.sar.danger_nodes, "quadrature size over the latent danger level");
    schema["sar.estimate_nodes"] =
        entry("integer", d.sar.estimate_nodes, "quadrature size over the robot danger estimate");
    schema["sar.d_r_1"] = entry("number", d.sar.d_r_1, "fixed first-site danger estimate, in (0,1)");
    schema["sar.cost_table"] = entry(
        "object", config_to_json(d)["sar"]["cost_table"],
        "[health, time] costs for threat_gear, threat_nogear, clear_gear and clear_nogear outcomes");
    schema["epsilons"] = entry("array<number>", d.epsilons,
                               "performance-loss budgets; one sweep column block per entry");
    schema["grid.alpha_min"] = entry("number", d.grid.alpha_min, "initial-state grid, alpha start (>= 1)");
    schema["grid.alpha_max"] = entry("number", d.grid.alpha_max, "initial-state grid, alpha end");
    schema["grid.beta_min"] = entry("number", d.grid.beta_min, "initial-state grid, beta start (>= 1)");
    schema["grid.beta_max"] = entry("number", d.grid.beta_max, "initial-state grid, beta end");
    schema["grid.step"] = entry("number", d.grid.step, "initial-state grid spacing");
    schema["out_dir"] = entry("string", d.out_dir, "output directory");
    schema["seed"] = entry("integer", d.seed, "master seed for all rollout substreams");
    schema["samples"] = entry("integer", d.samples, "Monte-Carlo rollout count");
    schema["stage1"] = entry("string", "conditioned",
                             "first-site value convention: \"conditioned\" fixes the first "
                             "observation to d_r_1, \"expected\" marginalizes it");
    schema["potential_scale"] =
        entry("number", d.potential_scale,
              "multiplier on the designed potential; values above 1 break the certificate on "
              "purpose (verification testing)");
    schema["log_rollouts"] =
        entry("integer", d.log_rollouts, "number of trajectories written to rollouts.jsonl");
    schema["verify_states"] = entry("array<[number,number]>", config_to_json(d)["verify_states"],
                                    "initial states certified by the verify command");
    return schema;
}

std::string config_hash(const ExperimentConfig& config) {
    return fnv1a_hex(config_to_json(config).dump());
}

json output_metadata(const ExperimentConfig& config) {
    return json{{"config_hash", config_hash(config)},
                {"seed", config.seed},
                {"version", kVersion},
                {"config", config_to_json(config)}};
}

LinearPotential designed_potential(const ExperimentConfig& config, double epsilon) {
    LinearPotential phi = solve_closed_form(
        build_lp(config.sar.trust, config.sar.gamma, config.sar.horizon, ShapingBudget(epsilon)));
    phi.a *= config.potential_scale;
    phi.b *= config.potential_scale;
    return phi;
}

SweepResult run_sweep(const ExperimentConfig& config) {
    config.validate();
    GameSpec base = build_sar_game(config.sar);
    const double obs1 = config.sar.d_r_1;

    std::vector<double> epsilons = config.epsilons;
    std::sort(epsilons.begin(), epsilons.end());
    epsilons.erase(std::unique(epsilons.begin(), epsilons.end()), epsilons.end());

    SweepResult result;
    std::map<double, long> zero_counts;
    long grid_points = 0;

    for (double alpha : config.grid.alphas()) {
        for (double beta : config.grid.betas()) {
            ++grid_points;
            GameSpec game = base;
            game.initial = TrustState(alpha, beta);
            const SolveResult opt = solve_optimal(game);

            for (double eps : epsilons) {
                const LinearPotential phi = designed_potential(config, eps);
                const GameSpec shaped = shape_game(game, phi);
                const SolveResult shaped_opt = solve_optimal(shaped);
                const ValueTable in_original = evaluate_policy(game, shaped_opt.policy);

                const auto q_shaped = stage_q_values(shaped, shaped_opt.values, 1, 0, obs1);
                const int action_1 = q_shaped[1] > q_shaped[0] ? 1 : 0;

                SweepRow row;
                row.alpha_1 = alpha;
                row.beta_1 = beta;
                row.epsilon = eps;
                row.action_1 = action_1;
                if (config.stage1 == Stage1Mode::kConditioned) {
                    row.v_shaped = q_shaped[action_1];
                    row.v_original = stage_q_values(game, in_original, 1, 0, obs1)[action_1];
                    const auto q_opt = stage_q_values(game, opt.values, 1, 0, obs1);
                    row.v_opt = std::max(q_opt[0], q_opt[1]);
                } else {
                    row.v_shaped = shaped_opt.values.at(1, 0);
                    row.v_original = in_original.at(1, 0);
                    row.v_opt = opt.values.at(1, 0);
                }
                row.loss = row.v_opt - row.v_original;
                if (row.loss > eps + 1e-6)
                    throw std::logic_error("sweep row exceeds its loss budget at alpha_1=" +
                                           std::to_string(alpha) + ", beta_1=" + std::to_string(beta) +
                                           ", epsilon=" + std::to_string(eps));
                if (action_1 == 0) ++zero_counts[eps];
                result.rows.push_back(row);
            }
        }
    }

    std::sort(result.rows.begin(), result.rows.end(), [](const SweepRow& x, const SweepRow& y) {
        return std::tie(x.epsilon, x.alpha_1, x.beta_1) < std::tie(y.epsilon, y.alpha_1, y.beta_1);
    });
    for (double eps : epsilons)
        result.fraction_action0[eps] =
            static_cast<double>(zero_counts[eps]) / static_cast<double>(grid_points);
    return result;
}

std::string sweep_csv(const SweepResult& result, const ExperimentConfig& config) {
    std::string out = "# " + output_metadata(config).dump() + "\n";
    out += "alpha_1,beta_1,epsilon,action_1,v_shaped,v_original,v_opt,loss\n";
    for (const SweepRow& r : result.rows) {
        out += format_double(r.alpha_1) + ",";
        out += format_double(r.beta_1) + ",";
        out += format_double(r.epsilon) + ",";
        out += std::to_string(r.action_1) + ",";
        out += format_double(r.v_shaped) + ",";
        out += format_double(r.v_original) + ",";
        out += format_double(r.v_opt) + ",";
        out += format_double(r.loss) + "\n";
    }
    return out;
}

VerifyResult run_verify(const ExperimentConfig& config) {
    config.validate();
    GameSpec base = build_sar_game(config.sar);
    bool all_passed = true;
    auto note = [&all_passed](bool ok) {
        all_passed = all_passed && ok;
        return ok;
    };

    json budgets = json::array();
    for (double eps : config.epsilons) {
        const LinearPotential phi = designed_potential(config, eps);
        json budget;
        budget["epsilon"] = eps;
        budget["potential"] = {{"a", phi.a}, {"b", phi.b}};

        json states = json::array();
        for (const auto& init : config.verify_states) {
            GameSpec game = base;
            game.initial = TrustState(init[0], init[1]);

            json entry;
            entry["alpha_1"] = init[0];
            entry["beta_1"] = init[1];

            const FinalTrustLine line =
                final_trust_line(game.initial, game.trust, game.horizon);
            const BoundReport feasible =
                verify_loss_constraint(phi, line, game.discount, game.horizon, ShapingBudget(eps));
            note(feasible.satisfied);
            entry["loss_constraint"] = feasible;

            const TrustLattice lattice =
                reachable_lattice(game.initial, game.trust, game.horizon + 1);
            const BoundReport range = potential_range_check(phi, lattice, lattice, game.discount,
                                                            game.horizon, ShapingBudget(eps));
            note(range.satisfied);
            entry["potential_range"] = range;

            const LossBoundReport loss = performance_loss_check(game, phi, ShapingBudget(eps));
            note(loss.potential_gap.satisfied);
            note(loss.loss.satisfied);
            entry["performance_loss"] = loss;

            const bool implication_ok = !range.satisfied || loss.loss.satisfied;
            note(implication_ok);
            entry["implication_ok"] = implication_ok;

            const GameSpec shaped = shape_game(game, phi);
            const PolicyRule opt_rule = solve_optimal(game).policy;
            const PolicyRule shaped_rule = solve_optimal(shaped).policy;
            const PolicyRule zero_rule = PolicyRule::constant(game, 0);
            RngStream rng(config.seed, 0xfeed);
            const PolicyRule random_rule = PolicyRule::random(game, rng);
            const std::vector<std::pair<const char*, const PolicyRule*>> tele_rules{
                {"optimal", &opt_rule},
                {"shaped_optimal", &shaped_rule},
                {"always_0", &zero_rule},
                {"random", &random_rule}};
            json tele = json::array();
            for (const auto& [name, rule] : tele_rules) {
                const BoundReport t = telescoping_check(game, phi, *rule);
                note(t.satisfied);
                json jt = t;
                jt["policy"] = name;
                tele.push_back(jt);
            }
            entry["telescoping"] = tele;
            states.push_back(entry);
        }
        budget["states"] = states;

        // Recursion-vs-sampling agreement on the shaped game at the
        // config's own initial state.
        {
            const GameSpec shaped = shape_game(base, phi);
            const SolveResult sol = solve_optimal(shaped);
            const McEstimate mc =
                mc_estimate_value(shaped, sol.policy, config.samples, config.seed);
            const double dp = sol.values.at(1, 0);
            const bool ok = std::abs(dp - mc.mean) <= 3.0 * mc.std_error + 1e-12;
            note(ok);
            budget["monte_carlo"] = {{"policy", "shaped_optimal"},
                                     {"dp_value", dp},
                                     {"estimate", mc_to_json(mc)},
                                     {"within_3se", ok}};
        }
        budgets.push_back(budget);
    }

    // Plain-game agreement for a trio of fixed rules.
    json mc_block = json::array();
    {
        const SolveResult sol = solve_optimal(base);
        const std::vector<std::pair<const char*, PolicyRule>> mc_rules{
            {"optimal", sol.policy},
            {"always_0", PolicyRule::constant(base, 0)},
            {"always_1", PolicyRule::constant(base, 1)}};
        for (const auto& [name, rule] : mc_rules) {
            const double dp = evaluate_policy(base, rule).at(1, 0);
            const McEstimate mc = mc_estimate_value(base, rule, config.samples, config.seed);
            const bool ok = std::abs(dp - mc.mean) <= 3.0 * mc.std_error + 1e-12;
            note(ok);
            mc_block.push_back({{"policy", name},
                                {"dp_value", dp},
                                {"estimate", mc_to_json(mc)},
                                {"within_3se", ok}});
        }
    }

    VerifyResult out;
    out.report = json{{"metadata", output_metadata(config)},
                      {"budgets", budgets},
                      {"monte_carlo", mc_block},
                      {"all_passed", all_passed}};
    out.all_passed = all_passed;
    return out;
}

PolicyChoice policy_choice_from_string(const std::string& name) {
    if (name == "optimal") return PolicyChoice::kOptimal;
    if (name == "shaped-optimal" || name == "shaped_optimal") return PolicyChoice::kShapedOptimal;
    if (name == "always-0" || name == "always_0") return PolicyChoice::kAlways0;
    if (name == "always-1" || name == "always_1") return PolicyChoice::kAlways1;
    fail("unknown policy choice: " + name +
         " (expected optimal, shaped-optimal, always-0 or always-1)");
}

SimulateResult run_simulate(const ExperimentConfig& config, PolicyChoice choice) {
    config.validate();
    const GameSpec game = build_sar_game(config.sar);

    GameSpec rollout_spec = game;
    PolicyRule rule;
    std::string name;
    json eps_used;
    switch (choice) {
        case PolicyChoice::kOptimal:
            rule = solve_optimal(game).policy;
            name = "optimal";
            break;
        case PolicyChoice::kShapedOptimal: {
            const double eps = config.epsilons.front();
            const LinearPotential phi = designed_potential(config, eps);
            rollout_spec = shape_game(game, phi);
            rule = solve_optimal(rollout_spec).policy;
            name = "shaped_optimal";
            eps_used = eps;
            break;
        }
        case PolicyChoice::kAlways0:
            rule = PolicyRule::constant(game, 0);
            name = "always_0";
            break;
        case PolicyChoice::kAlways1:
            rule = PolicyRule::constant(game, 1);
            name = "always_1";
            break;
    }

    SimulateResult result;
    TaskStats stats = rollout_task_stats(rollout_spec, rule, config.samples, config.seed,
                                         config.log_rollouts, &result.logged);
    result.stats = {stats.task_value, stats.final_trust};

    result.summary = json{{"policy", name},
                          {"epsilon", eps_used},
                          {"samples", config.samples},
                          {"seed", config.seed},
                          {"task_value", mc_to_json(stats.task_value)},
                          {"total_value", mc_to_json(stats.total_value)},
                          {"final_trust", mc_to_json(stats.final_trust)},
                          {"dp_task_value", evaluate_policy(game, rule).at(1, 0)},
                          {"dp_total_value", evaluate_policy(rollout_spec, rule).at(1, 0)}};
    return result;
}

std::string rollouts_jsonl(const SimulateResult& result, const ExperimentConfig& config) {
    std::string out = json{{"metadata", output_metadata(config)}}.dump() + "\n";
    for (std::size_t i = 0; i < result.logged.size(); ++i) {
        json steps = json::array();
        for (const auto& s : result.logged[i].steps) {
            steps.push_back({{"alpha", s.state.alpha},
                             {"beta", s.state.beta},
                             {"observation", s.observation},
                             {"a_r", s.robot_action},
                             {"a_h", s.human_action},
                             {"threat", s.threat},
                             {"performance", s.performance},
                             {"task_reward", s.task_reward},
                             {"shaping_reward", s.shaping_reward},
                             {"alpha_next", s.next_state.alpha},
                             {"beta_next", s.next_state.beta}});
        }
        out += json{{"rollout", i}, {"steps", steps}}.dump() + "\n";
    }
    out += json{{"summary", result.summary}}.dump() + "\n";
    return out;
}

}
