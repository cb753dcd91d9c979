#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <tuple>
#include <unistd.h>

#include "trustshape/experiment.hpp"

using namespace trustshape;
namespace fs = std::filesystem;

namespace {

struct TempFile {
    fs::path path;

    explicit TempFile(const std::string& contents) {
        static int counter = 0;
        path = fs::temp_directory_path() / ("trustshape_test_" + std::to_string(counter++) +
                                            "_" + std::to_string(::getpid()) + ".json");
        std::ofstream out(path);
        out << contents;
    }
    ~TempFile() { std::error_code ec; fs::remove(path, ec); }
};

ExperimentConfig tiny_config() {
    ExperimentConfig config;
    config.grid = GridSpec{1.0, 3.0, 1.0, 3.0, 1.0};
    config.epsilons = {0.0, 30.0, 300.0};
    config.sar.horizon = 6;
    config.samples = 20000;
    config.verify_states = {{1.0, 1.0}};
    return config;
}

}  // namespace

TEST_CASE("empty config file falls back to the defaults") {
    TempFile file("  \n\t\n");
    auto config = parse_config(file.path.string());
    ExperimentConfig defaults;
    CHECK(config_to_json(config) == config_to_json(defaults));
    CHECK(config.sar.gamma == 0.9);
    CHECK(config.sar.d_r_1 == 0.06);
    CHECK(config.sar.horizon == 10);
    CHECK(config.epsilons == std::vector<double>{0.0, 30.0, 100.0, 300.0});
}

TEST_CASE("unknown keys are rejected with their dotted path") {
    TempFile top(R"({"zeed": 1})");
    CHECK_THROWS_WITH_AS(parse_config(top.path.string()), doctest::Contains("zeed"), ConfigError);

    TempFile nested(R"({"sar": {"kappa_rr": 3.0}})");
    CHECK_THROWS_WITH_AS(parse_config(nested.path.string()), doctest::Contains("sar.kappa_rr"),
                         ConfigError);
}

TEST_CASE("type mismatches name the key") {
    TempFile file(R"({"seed": "not-a-number"})");
    CHECK_THROWS_WITH_AS(parse_config(file.path.string()), doctest::Contains("seed"), ConfigError);
}

TEST_CASE("malformed json is reported as a config error") {
    TempFile file("{ not json");
    CHECK_THROWS_AS(parse_config(file.path.string()), ConfigError);
    CHECK_THROWS_AS(parse_config("/nonexistent/path/config.json"), ConfigError);
}

TEST_CASE("overrides survive a round trip through json") {
    ExperimentConfig config;
    config.seed = 7;
    config.sar.kappa_r = 25.0;
    config.sar.mode = ThreatMode::kBayesPosterior;
    config.epsilons = {5.0};
    config.grid.step = 0.5;
    config.stage1 = Stage1Mode::kExpected;
    auto j = config_to_json(config);
    auto back = config_from_json(j);
    CHECK(config_to_json(back) == j);
    CHECK(back.seed == 7);
    CHECK(back.sar.kappa_r == 25.0);
    CHECK(back.sar.mode == ThreatMode::kBayesPosterior);
    CHECK(back.stage1 == Stage1Mode::kExpected);
}

TEST_CASE("grid bounds below the trust floor are rejected") {
    auto config = tiny_config();
    config.grid.alpha_min = 0.5;
    CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("alpha"), ConfigError);
    config = tiny_config();
    config.grid.step = 0.0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config = tiny_config();
    config.epsilons = {-1.0};
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config = tiny_config();
    config.samples = 0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("grid expansion is inclusive of both endpoints") {
    GridSpec grid{1.0, 2.0, 1.0, 11.0, 0.25};
    auto alphas = grid.alphas();
    REQUIRE(alphas.size() == 5);
    CHECK(alphas.front() == 1.0);
    CHECK(alphas.back() == 2.0);
    CHECK(grid.betas().size() == 41);
}

TEST_CASE("config hash ignores the output directory but tracks the seed") {
    ExperimentConfig a, b;
    a.out_dir = "left";
    b.out_dir = "right";
    CHECK(config_hash(a) == config_hash(b));
    b.seed = 999;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("schema documents every serialized key") {
    auto schema = config_schema();
    for (const char* key : {"sar.gamma", "sar.kappa_r", "sar.d_r_1", "sar.threat_mode",
                            "epsilons", "grid.step", "out_dir", "seed", "samples", "stage1",
                            "potential_scale"}) {
        CAPTURE(key);
        REQUIRE(schema.contains(key));
        CHECK(schema[key].contains("type"));
        CHECK(schema[key].contains("default"));
        CHECK(schema[key].contains("description"));
    }
    CHECK(schema["sar.gamma"]["default"] == 0.9);
}

TEST_CASE("sweep rows stay within budget and are canonically ordered") {
    auto config = tiny_config();
    auto result = run_sweep(config);
    REQUIRE(result.rows.size() == 3 * 3 * 3);
    for (std::size_t i = 1; i < result.rows.size(); ++i) {
        const auto& a = result.rows[i - 1];
        const auto& b = result.rows[i];
        bool ordered = std::tie(a.epsilon, a.alpha_1, a.beta_1) <
                       std::tie(b.epsilon, b.alpha_1, b.beta_1);
        CHECK(ordered);
    }
    for (const auto& row : result.rows) {
        CHECK(row.loss <= row.epsilon + 1e-6);
        CHECK(row.loss >= -1e-9);
        CHECK(row.v_opt >= row.v_original - 1e-9);
        CHECK((row.action_1 == 0 || row.action_1 == 1));
        if (row.epsilon == 0.0) CHECK(row.loss == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    }
    REQUIRE(result.fraction_action0.size() == 3);
    double prev = -1.0;
    for (const auto& [eps, frac] : result.fraction_action0) {
        CHECK(frac >= prev);
        prev = frac;
    }
}

TEST_CASE("expected stage-one mode keeps the budget guarantee") {
    auto config = tiny_config();
    config.stage1 = Stage1Mode::kExpected;
    config.epsilons = {0.0, 30.0};
    auto result = run_sweep(config);
    for (const auto& row : result.rows) {
        CHECK(row.loss <= row.epsilon + 1e-6);
        CHECK(row.loss >= -1e-9);
    }
}

TEST_CASE("sweep csv is deterministic and carries the run metadata") {
    auto config = tiny_config();
    config.epsilons = {0.0, 30.0};
    auto csv1 = sweep_csv(run_sweep(config), config);
    auto csv2 = sweep_csv(run_sweep(config), config);
    CHECK(csv1 == csv2);
    CHECK(csv1.rfind("# ", 0) == 0);
    CHECK(csv1.find("alpha_1,beta_1,epsilon,action_1,v_shaped,v_original,v_opt,loss\n") !=
          std::string::npos);
    CHECK(csv1.find(config_hash(config)) != std::string::npos);
    CHECK(csv1.find("\r") == std::string::npos);
}

TEST_CASE("verification battery passes for the shipped design") {
    auto config = tiny_config();
    config.epsilons = {0.0, 30.0};
    auto result = run_verify(config);
    CHECK(result.all_passed);
    CHECK(result.report.contains("budgets"));
    CHECK(result.report.contains("monte_carlo"));
    CHECK(result.report["all_passed"] == true);
}

TEST_CASE("verification battery fails once the potential overshoots the budget") {
    auto config = tiny_config();
    config.epsilons = {30.0};
    config.potential_scale = 2.0;
    auto result = run_verify(config);
    CHECK_FALSE(result.all_passed);
}

TEST_CASE("rollout study is reproducible and labels its policy") {
    auto config = tiny_config();
    config.samples = 5000;
    config.log_rollouts = 3;
    auto a = run_simulate(config, PolicyChoice::kShapedOptimal);
    auto b = run_simulate(config, PolicyChoice::kShapedOptimal);
    CHECK(a.summary == b.summary);
    CHECK(rollouts_jsonl(a, config) == rollouts_jsonl(b, config));
    REQUIRE(a.logged.size() == 3);
    CHECK(a.summary["policy"] == "shaped_optimal");
    CHECK(a.stats.value.samples == 5000);

    auto opt = run_simulate(config, PolicyChoice::kOptimal);
    double dp = opt.summary["dp_task_value"].get<double>();
    CHECK(std::abs(opt.stats.value.mean - dp) <= 3.0 * opt.stats.value.std_error + 1e-9);
}

TEST_CASE("policy names parse with either separator") {
    CHECK(policy_choice_from_string("optimal") == PolicyChoice::kOptimal);
    CHECK(policy_choice_from_string("shaped-optimal") == PolicyChoice::kShapedOptimal);
    CHECK(policy_choice_from_string("shaped_optimal") == PolicyChoice::kShapedOptimal);
    CHECK(policy_choice_from_string("always-0") == PolicyChoice::kAlways0);
    CHECK(policy_choice_from_string("always_1") == PolicyChoice::kAlways1);
    CHECK_THROWS_AS(policy_choice_from_string("bogus"), ConfigError);
}

TEST_CASE("designed potential scales with the fault-injection knob") {
    ExperimentConfig config;
    auto phi = designed_potential(config, 30.0);
    config.potential_scale = 2.0;
    auto doubled = designed_potential(config, 30.0);
    CHECK(doubled.a == doctest::Approx(2.0 * phi.a));
    CHECK(phi.b == 0.0);
}
