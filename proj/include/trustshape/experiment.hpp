#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "trustshape/game.hpp"
#include "trustshape/sar.hpp"
#include "trustshape/shaping.hpp"

namespace trustshape {

/// Configuration or input error carrying a field/key diagnosis.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Inclusive initial-state grid over (alpha_1, beta_1).
struct GridSpec {
    double alpha_min = 1.0;
    double alpha_max = 11.0;
    double beta_min = 1.0;
    double beta_max = 11.0;
    double step = 0.25;

    std::vector<double> alphas() const;
    std::vector<double> betas() const;
};

/// Which stage-1 value convention sweep rows report: conditioned on the
/// fixed first-site estimate d_r_1, or marginalized over the estimate law.
enum class Stage1Mode { kConditioned, kExpected };

struct ExperimentConfig {
    SarConfig sar;
    std::vector<double> epsilons{0.0, 30.0, 100.0, 300.0};
    GridSpec grid;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    long samples = 200000;
    Stage1Mode stage1 = Stage1Mode::kConditioned;
    /// Multiplies the designed potential; values other than 1 exist to
    /// exercise certificate failure paths.
    double potential_scale = 1.0;
    int log_rollouts = 10;
    std::vector<std::array<double, 2>> verify_states{
        {1.0, 1.0}, {1.0, 11.0}, {11.0, 1.0}, {11.0, 11.0}, {6.0, 6.0}};

    void validate() const;
};

/// Strict parse: unknown keys are ConfigError with the offending key path;
/// an empty or whitespace-only file yields the full defaults.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Machine-readable schema of every config key with type, default and
/// description.
nlohmann::json config_schema();

/// FNV-1a hash of the canonical config serialization, as fixed-width hex.
std::string config_hash(const ExperimentConfig& config);

/// Metadata object embedded in every output file.
nlohmann::json output_metadata(const ExperimentConfig& config);

struct SweepRow {
    double alpha_1 = 0.0;
    double beta_1 = 0.0;
    double epsilon = 0.0;
    int action_1 = 0;
    double v_shaped = 0.0;
    double v_original = 0.0;
    double v_opt = 0.0;
    double loss = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;  ///< sorted by (epsilon, alpha_1, beta_1)
    std::map<double, double> fraction_action0;
};

/// Solves the scenario game and its shaped copies over the whole initial
/// grid. Every row satisfies loss <= epsilon + 1e-6; a violation raises
/// std::logic_error since it would contradict the designed certificate.
SweepResult run_sweep(const ExperimentConfig& config);

/// CSV with one metadata comment line, a header, '.' decimals and LF line
/// endings.
std::string sweep_csv(const SweepResult& result, const ExperimentConfig& config);

struct VerifyResult {
    nlohmann::json report;
    bool all_passed = false;
};

/// Certificate battery per epsilon and verify state: designed-potential
/// budget feasibility, the reachable-set certificate, both halves of the
/// performance-loss certificate, telescoping residuals for a set of fixed
/// rules, and recursion-vs-Monte-Carlo agreement at 3 standard errors.
VerifyResult run_verify(const ExperimentConfig& config);

enum class PolicyChoice { kOptimal, kShapedOptimal, kAlways0, kAlways1 };

PolicyChoice policy_choice_from_string(const std::string& name);

struct SimulateResult {
    RolloutStats stats;
    std::vector<Trajectory> logged;
    nlohmann::json summary;
};

/// Rollout study of one policy at the config's initial state. Shaped-optimal
/// uses the first epsilon in the config list; `stats.value` estimates the
/// discounted task payoff.
SimulateResult run_simulate(const ExperimentConfig& config, PolicyChoice choice);

/// JSON-lines serialization: metadata line, one line per logged trajectory,
/// summary line.
std::string rollouts_jsonl(const SimulateResult& result, const ExperimentConfig& config);

/// Designed potential for one budget, including the config's fault-injection
/// scale.
LinearPotential designed_potential(const ExperimentConfig& config, double epsilon);

}
