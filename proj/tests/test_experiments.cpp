#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "invdp/experiments.hpp"

using namespace invdp;
namespace ex = invdp::experiments;
namespace fs = std::filesystem;

namespace {

json running_config() {
    return json::parse(R"({
        "schema": 1, "kind": "running_example", "seed": 3,
        "figure": {"preimage_state_nodes": 11, "preimage_action_nodes": 21, "c0_nodes": 11, "oracle_nodes": 101},
        "certification": {"nonemptiness_samples": 200, "invariance_samples": 50, "invariance_steps": 20},
        "solver": {"state_nodes": 41, "action_nodes": 41, "tol": 1e-8}
    })");
}

json custom_double_integrator_config() {
    return json::parse(R"({
        "schema": 1, "kind": "custom", "seed": 5,
        "system": {"model": "double_integrator", "params": {"dof": 1}, "sample_period": 0.01, "substeps": 2,
                   "input_limit": 20.0},
        "stabilizer": {"gain": [[2.0, 3.0]]},
        "restriction": {"closure_steps": 300, "closure_samples": 20, "margin": 0.05, "hull_samples": 200},
        "certification": {"invariance_samples": 50, "invariance_steps": 50, "nonemptiness_samples": 100},
        "trajectories": {"steps": 20},
        "solver": {"state_nodes": 11, "action_nodes": 7, "tol": 1e-6}
    })");
}

json linear_config() {
    return json::parse(R"({
        "schema": 1, "kind": "linear", "seed": 9,
        "system": {"dynamics": {"A": [[-1.0]], "B": [[1.0]]}, "sample_period": 0.1},
        "policy": {"gain": [[1.0]]},
        "restriction": {"s0": {"type": "box", "lo": [-1.0], "hi": [1.0]}},
        "certification": {"invariance_samples": 50, "invariance_steps": 50, "nonemptiness_samples": 100},
        "solver": {"state_nodes": 21, "action_nodes": 21, "tol": 1e-8}
    })");
}

class TempDir {
public:
    explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / ("invdp_" + name)) {
        fs::remove_all(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string config_error(const json& j) {
    try {
        ex::parse_config(j);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(ParseConfig, AcceptsShippedConfigs) {
    for (const char* name : {"running_example.json", "pendulum.json"}) {
        const auto cfg = ex::load_config(fs::path(INVDP_SOURCE_DIR) / "configs" / name);
        EXPECT_FALSE(cfg.kind.empty());
    }
}

TEST(ParseConfig, AppliesRunningExampleDefaults) {
    const auto cfg = ex::parse_config(json{{"schema", 1}, {"kind", "running_example"}, {"seed", 1}});
    const auto& p = std::get<ex::RunningExampleConfig>(cfg.params);
    EXPECT_EQ(cfg.output_dir, "results");
    EXPECT_EQ(p.oracle_nodes, 401u);
    EXPECT_EQ(p.solver.discount, 0.9);
    EXPECT_EQ(p.solver.state_nodes, std::vector<std::size_t>{201});
    EXPECT_EQ(p.reward, running::Reward::Quadratic);
}

TEST(ParseConfig, AppliesPendulumDefaults) {
    const auto cfg = ex::parse_config(json{{"schema", 1}, {"kind", "pendulum"}, {"seed", 1}});
    const auto& p = std::get<ex::RoboticConfig>(cfg.params);
    EXPECT_EQ(p.zoh.sample_period, 0.005);
    EXPECT_EQ(p.margin, 0.02);
    EXPECT_EQ(p.gain(0, 0), 4.0);
    EXPECT_EQ(p.gain(0, 1), 4.0);
    EXPECT_EQ(p.solver.state_nodes, (std::vector<std::size_t>{31, 31}));
}

TEST(ParseConfig, RejectsSchemaProblems) {
    EXPECT_NE(config_error(json{{"kind", "running_example"}, {"seed", 1}}).find("schema"), std::string::npos);
    EXPECT_NE(config_error(json{{"schema", 2}, {"kind", "running_example"}, {"seed", 1}}).find("not supported"),
              std::string::npos);
    EXPECT_NE(config_error(json{{"schema", 1}, {"kind", "running_example"}}).find("seed"), std::string::npos);
    EXPECT_NE(config_error(json{{"schema", 1}, {"kind", "mystery"}, {"seed", 1}}).find("kind"), std::string::npos);
    EXPECT_NE(config_error(json::array()).find("object"), std::string::npos);
}

TEST(ParseConfig, RejectsUnknownKeysWithPath) {
    auto j = running_config();
    j["solver"]["tolerance"] = 1e-3;
    EXPECT_NE(config_error(j).find("solver.tolerance"), std::string::npos);
    j = running_config();
    j["extra"] = 1;
    EXPECT_NE(config_error(j).find("extra"), std::string::npos);
}

TEST(ParseConfig, RejectsOutOfRangeValues) {
    auto j = running_config();
    j["solver"]["discount"] = 1.0;
    EXPECT_NE(config_error(j).find("solver.discount"), std::string::npos);
    j = running_config();
    j["solver"]["state_nodes"] = 1;
    EXPECT_NE(config_error(j).find("solver.state_nodes"), std::string::npos);
    j = running_config();
    j["seed"] = -4;
    EXPECT_NE(config_error(j).find("seed"), std::string::npos);
    j = running_config();
    j["system"] = {{"reward", "cubic"}};
    EXPECT_NE(config_error(j).find("system.reward"), std::string::npos);
    j = running_config();
    j["solver"]["tol"] = "small";
    EXPECT_NE(config_error(j).find("must be a number"), std::string::npos);
}

TEST(ParseConfig, RejectsBadGains) {
    auto j = custom_double_integrator_config();
    j["stabilizer"]["gain"] = json::parse("[[1.0, 2.0, 3.0]]");
    EXPECT_NE(config_error(j).find("stabilizer.gain"), std::string::npos);
    j["stabilizer"]["gain"] = json::parse("[[-1.0, 2.0]]");
    EXPECT_NE(config_error(j).find("Hurwitz"), std::string::npos);
    j = custom_double_integrator_config();
    j["system"]["model"] = "quadrotor";
    EXPECT_NE(config_error(j).find("system.model"), std::string::npos);
    j = linear_config();
    j["policy"]["gain"] = json::parse("[[1.0, 1.0]]");
    EXPECT_NE(config_error(j).find("policy.gain"), std::string::npos);
}

TEST(ParseConfig, LoadConfigReportsFileProblems) {
    EXPECT_THROW(ex::load_config("/nonexistent/config.json"), ConfigError);
    TempDir dir("bad_json");
    fs::create_directories(dir.path());
    std::ofstream(dir.path() / "broken.json") << "{ \"schema\": ";
    EXPECT_THROW(ex::load_config(dir.path() / "broken.json"), ConfigError);
}

TEST(DeriveSeed, StreamsAreDistinctAndStable) {
    EXPECT_EQ(ex::derive_seed(42, 1), ex::derive_seed(42, 1));
    EXPECT_NE(ex::derive_seed(42, 1), ex::derive_seed(42, 2));
    EXPECT_NE(ex::derive_seed(42, 1), ex::derive_seed(43, 1));
}

TEST(C0Row, EndpointsMatchClosedForm) {
    const ex::RunningExampleConfig cfg;
    const auto r = ex::build_running_restriction(cfg, 1);
    // At s the section over [-1, 1] is {a : -1 - s <= tanh a <= 1 - s}.
    const auto expected = [](double s) {
        const double lo = -1.0 - s <= std::tanh(-1.0) ? -1.0 : std::atanh(-1.0 - s);
        const double hi = 1.0 - s >= std::tanh(1.0) ? 1.0 : std::atanh(1.0 - s);
        return std::pair{lo, hi};
    };
    for (double s : {-0.9, 0.0, 0.9}) {
        const auto row = ex::c0_row(r, s);
        const auto [lo, hi] = expected(s);
        EXPECT_NEAR(row.constructed_lo, lo, 1e-12) << "s = " << s;
        EXPECT_NEAR(row.constructed_hi, hi, 1e-12) << "s = " << s;
        EXPECT_NEAR(row.oracle_lo, lo, 1e-12);
        EXPECT_NEAR(row.oracle_hi, hi, 1e-12);
        EXPECT_LE(row.section_lo, row.constructed_lo);
        EXPECT_GE(row.section_hi, row.constructed_hi);
    }
}

TEST(OracleComparison, NoMismatchesOnCoarseGrid) {
    const auto r = ex::build_running_restriction(ex::RunningExampleConfig{}, 2);
    const auto cmp = ex::compare_with_oracle(r, 101, 1e-9);
    EXPECT_EQ(cmp.mismatches, 0u);
    EXPECT_EQ(cmp.compared + cmp.boundary_excluded, 101u * 101u);
}

TEST(RunExample, WritesOutputsAndCertifies) {
    TempDir dir("run_example");
    const auto cfg = ex::parse_config(running_config());
    const auto result = ex::run(cfg, dir.path());
    EXPECT_TRUE(result.certified);
    for (const char* f : {"preimage.csv", "c0_graph.csv", "vi_convergence.csv", "value_function.csv", "rollouts.csv",
                          "summary.json"}) {
        EXPECT_TRUE(fs::exists(dir.path() / f)) << f;
    }
    const auto summary = json::parse(slurp(dir.path() / "summary.json"));
    EXPECT_EQ(summary["oracle"]["mismatches"], 0);
    EXPECT_TRUE(summary["nonemptiness"]["passed"].get<bool>());
    EXPECT_TRUE(summary["invariance"]["passed"].get<bool>());
    EXPECT_TRUE(summary["value_iteration"]["rollouts"]["within_tolerance"].get<bool>());
    EXPECT_NEAR(summary["value_at_origin"].get<double>(), 0.0, 1e-6);

    std::istringstream preimage(slurp(dir.path() / "preimage.csv"));
    std::string line;
    std::getline(preimage, line);
    EXPECT_EQ(line, "s,a,in_preimage");
    std::size_t rows = 0;
    while (std::getline(preimage, line)) {
        double s = 0, a = 0;
        int inside = 0;
        char c1 = 0, c2 = 0;
        std::istringstream(line) >> s >> c1 >> a >> c2 >> inside;
        EXPECT_EQ(inside == 1, std::abs(s + std::tanh(a)) <= 1.0) << line;
        ++rows;
    }
    EXPECT_EQ(rows, 11u * 21u);
}

TEST(RunExample, IsByteDeterministic) {
    TempDir a("det_a"), b("det_b");
    const auto cfg = ex::parse_config(running_config());
    const auto ra = ex::run(cfg, a.path());
    const auto rb = ex::run(cfg, b.path());
    ASSERT_EQ(ra.files, rb.files);
    for (const auto& f : ra.files) EXPECT_EQ(slurp(a.path() / f), slurp(b.path() / f)) << f;
}

TEST(RunExample, GaussianRewardValueIsPositive) {
    TempDir dir("gaussian");
    auto j = running_config();
    j["system"] = {{"reward", "gaussian"}};
    const auto result = ex::run(ex::parse_config(j), dir.path());
    EXPECT_TRUE(result.certified);
    EXPECT_GT(result.summary["value_at_origin"].get<double>(), 0.0);
}

TEST(RunRobotic, DoubleIntegratorCertifies) {
    TempDir dir("double_integrator");
    const auto result = ex::run(ex::parse_config(custom_double_integrator_config()), dir.path());
    EXPECT_TRUE(result.certified) << result.summary.dump(2);
    for (const char* f : {"trajectories.csv", "certification.json", "rollouts.csv", "summary.json"}) {
        EXPECT_TRUE(fs::exists(dir.path() / f)) << f;
    }
    const auto cert = json::parse(slurp(dir.path() / "certification.json"));
    EXPECT_EQ(cert["invariance"]["violations"], 0);
    // 4 corner trajectories of 21 states each, plus the header.
    std::istringstream traj(slurp(dir.path() / "trajectories.csv"));
    std::size_t lines = 0;
    for (std::string line; std::getline(traj, line);) ++lines;
    EXPECT_EQ(lines, 1u + 4u * 21u);
}

TEST(RunRobotic, EnergyBoundViolationFailsCertification) {
    TempDir dir("energy");
    auto j = custom_double_integrator_config();
    j["system"]["model"] = "pendulum";
    j["system"]["params"] = json::object();
    j["energy_bound"] = json::parse(R"({"start": [0.5, 0.0], "c0": 0.0, "c1": 0.01, "duration": 1.0})");
    const auto result = ex::run(ex::parse_config(j), dir.path());
    // Released from rest with c0 = 0 the bound is identically zero, but gravity speeds it up.
    EXPECT_FALSE(result.certified);
    EXPECT_FALSE(result.summary["certification"]["energy_bound"]["passed"].get<bool>());
}

TEST(RunLinear, ContractingScalarSystemCertifies) {
    TempDir dir("linear");
    const auto result = ex::run(ex::parse_config(linear_config()), dir.path());
    EXPECT_TRUE(result.certified) << result.summary.dump(2);
    EXPECT_TRUE(fs::exists(dir.path() / "certification.json"));
}

TEST(RunLinear, ExpandingPolicyFailsInvariance) {
    TempDir dir("linear_bad");
    auto j = linear_config();
    j["policy"]["gain"] = json::parse("[[-5.0]]");
    const auto result = ex::run(ex::parse_config(j), dir.path());
    EXPECT_FALSE(result.certified);
    EXPECT_GT(result.summary["certification"]["invariance"]["violations"].get<int>(), 0);
}

TEST(RunTabular, MatchesEnumeration) {
    TempDir dir("tabular");
    const auto cfg = ex::parse_config(
        json::parse(R"({"schema": 1, "kind": "tabular_oracle", "seed": 4, "system": {"states": 4, "actions": 3}})"));
    const auto result = ex::run(cfg, dir.path());
    EXPECT_TRUE(result.certified);
    EXPECT_EQ(result.summary["policies_enumerated"], 81);
    EXPECT_LE(result.summary["max_abs_difference"].get<double>(), 1e-8);
}
