#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "trustshape/experiment.hpp"
#include "trustshape/lp_design.hpp"
#include "trustshape/version.hpp"

namespace {

using trustshape::ConfigError;
using trustshape::ExperimentConfig;

constexpr int kExitOk = 0;
constexpr int kExitCertificateFailed = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitIoError = 3;

struct CommonFlags {
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::vector<double> epsilons;
    std::vector<double> grid;
    std::optional<std::string> mode;
    std::optional<long> samples;
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file (empty file = defaults)");
    cmd->add_option("--out", flags.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", flags.seed, "master seed (overrides config)");
    cmd->add_option("--epsilon", flags.epsilons, "loss budgets (overrides config)")->delimiter(',');
    cmd->add_option("--grid", flags.grid,
                    "initial-state grid a_min,a_max,b_min,b_max,step (overrides config)")
        ->delimiter(',')
        ->expected(0, 5);
    cmd->add_option("--mode", flags.mode, "threat mode: plugin or bayes (overrides config)");
    cmd->add_option("--samples", flags.samples, "Monte-Carlo rollout count (overrides config)");
    cmd->add_flag("--quiet", flags.quiet, "suppress progress output");
}

ExperimentConfig load_config(const CommonFlags& flags) {
    ExperimentConfig cfg;
    if (!flags.config_path.empty()) {
        cfg = trustshape::parse_config(flags.config_path);
    } else {
        cfg.validate();
    }
    if (flags.out_dir) cfg.out_dir = *flags.out_dir;
    if (flags.seed) cfg.seed = *flags.seed;
    if (!flags.epsilons.empty()) cfg.epsilons = flags.epsilons;
    if (!flags.grid.empty()) {
        if (flags.grid.size() != 5)
            throw ConfigError("--grid expects exactly 5 values: a_min,a_max,b_min,b_max,step");
        cfg.grid = trustshape::GridSpec{flags.grid[0], flags.grid[1], flags.grid[2], flags.grid[3],
                                        flags.grid[4]};
    }
    if (flags.mode) {
        if (*flags.mode == "plugin")
            cfg.sar.mode = trustshape::ThreatMode::kPlugin;
        else if (*flags.mode == "bayes")
            cfg.sar.mode = trustshape::ThreatMode::kBayesPosterior;
        else
            throw ConfigError("--mode must be plugin or bayes");
    }
    if (flags.samples) cfg.samples = *flags.samples;
    cfg.validate();
    return cfg;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open output file: " + path.string());
    out << content;
    if (!out) throw std::ios_base::failure("failed writing output file: " + path.string());
}

int cmd_sweep(const CommonFlags& flags) {
    const ExperimentConfig cfg = load_config(flags);
    const trustshape::SweepResult result = trustshape::run_sweep(cfg);
    const auto path = std::filesystem::path(cfg.out_dir) / "sweep.csv";
    write_file(path, trustshape::sweep_csv(result, cfg));
    if (!flags.quiet) {
        std::cout << "wrote " << result.rows.size() << " rows to " << path.string() << "\n";
        for (const auto& [eps, frac] : result.fraction_action0)
            std::cout << "epsilon " << eps << ": action-0 fraction " << frac << "\n";
    }
    return kExitOk;
}

int cmd_verify(const CommonFlags& flags) {
    const ExperimentConfig cfg = load_config(flags);
    const trustshape::VerifyResult result = trustshape::run_verify(cfg);
    const auto path = std::filesystem::path(cfg.out_dir) / "verify.json";
    write_file(path, result.report.dump(2) + "\n");
    if (!flags.quiet) {
        for (const auto& budget : result.report.at("budgets")) {
            std::cout << "epsilon " << budget.at("epsilon") << ":";
            for (const auto& st : budget.at("states")) {
                const bool ok = st.at("loss_constraint").at("satisfied").get<bool>() &&
                                st.at("potential_range").at("satisfied").get<bool>() &&
                                st.at("performance_loss").at("loss").at("satisfied").get<bool>();
                std::cout << " " << (ok ? "ok" : "FAIL");
            }
            std::cout << "\n";
        }
        std::cout << (result.all_passed ? "all certificates passed" : "certificate failure") << "\n";
    }
    return result.all_passed ? kExitOk : kExitCertificateFailed;
}

int cmd_simulate(const CommonFlags& flags, const std::string& policy) {
    const ExperimentConfig cfg = load_config(flags);
    const trustshape::PolicyChoice choice = trustshape::policy_choice_from_string(policy);
    const trustshape::SimulateResult result = trustshape::run_simulate(cfg, choice);
    const auto path = std::filesystem::path(cfg.out_dir) / "rollouts.jsonl";
    write_file(path, trustshape::rollouts_jsonl(result, cfg));
    if (!flags.quiet) {
        std::cout << "policy " << result.summary.at("policy").get<std::string>() << ": task value "
                  << result.stats.value.mean << " +/- " << result.stats.value.std_error
                  << ", final trust " << result.stats.final_trust.mean << " +/- "
                  << result.stats.final_trust.std_error << "\n";
        std::cout << "wrote " << result.logged.size() << " trajectories to " << path.string()
                  << "\n";
    }
    return kExitOk;
}

int cmd_lp(const CommonFlags& flags) {
    const ExperimentConfig cfg = load_config(flags);
    nlohmann::json out = nlohmann::json::array();
    for (double eps : cfg.epsilons) {
        const trustshape::LpSpec lp = trustshape::build_lp(cfg.sar.trust, cfg.sar.gamma,
                                                           cfg.sar.horizon, trustshape::ShapingBudget(eps));
        const trustshape::LinearPotential phi = trustshape::designed_potential(cfg, eps);
        const trustshape::FinalTrustLine line =
            trustshape::final_trust_line(cfg.sar.initial, cfg.sar.trust, cfg.sar.horizon);
        const trustshape::BoundReport check = trustshape::verify_loss_constraint(
            phi, line, cfg.sar.gamma, cfg.sar.horizon, trustshape::ShapingBudget(eps));
        out.push_back({{"epsilon", eps},
                       {"bound", lp.bound()},
                       {"potential", {{"a", phi.a}, {"b", phi.b}}},
                       {"loss_constraint", check}});
    }
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-horizon trust games with certified reward shaping"};
    app.set_version_flag("--version", trustshape::kVersion);
    app.require_subcommand(1);

    CommonFlags flags;
    std::string policy = "optimal";

    CLI::App* sweep = app.add_subcommand(
        "sweep", "solve the scenario over the initial-state grid and write sweep.csv");
    add_common(sweep, flags);

    CLI::App* verify =
        app.add_subcommand("verify", "run the certificate battery and write verify.json");
    add_common(verify, flags);

    CLI::App* simulate =
        app.add_subcommand("simulate", "Monte-Carlo rollouts of one policy; writes rollouts.jsonl");
    add_common(simulate, flags);
    simulate->add_option("--policy", policy,
                         "optimal, shaped-optimal (first epsilon), always-0 or always-1");

    CLI::App* lp = app.add_subcommand("lp", "print the designed potential per budget as JSON");
    add_common(lp, flags);

    app.add_subcommand("config-schema", "print the config schema with defaults as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (sweep->parsed()) return cmd_sweep(flags);
        if (verify->parsed()) return cmd_verify(flags);
        if (simulate->parsed()) return cmd_simulate(flags, policy);
        if (lp->parsed()) return cmd_lp(flags);
        std::cout << trustshape::config_schema().dump(2) << "\n";
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIoError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCertificateFailed;
    }
}
