#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "invdp/experiments.hpp"

namespace ex = invdp::experiments;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kNotCertified = 2;

int run_command(const std::string& path, const std::optional<std::string>& out_dir,
                const std::optional<std::uint64_t>& seed) {
    ex::ExperimentConfig cfg = ex::load_config(path);
    if (seed) cfg.seed = *seed;
    const std::filesystem::path dir = out_dir ? *out_dir : cfg.output_dir;
    const ex::RunResult result = ex::run(cfg, dir);
    std::cout << "kind: " << cfg.kind << "\nseed: " << cfg.seed << "\noutput: " << dir.string() << '\n';
    for (const auto& f : result.files) std::cout << "  wrote " << f << '\n';
    std::cout << (result.certified ? "certified" : "certification FAILED") << '\n';
    return result.certified ? kOk : kNotCertified;
}

int validate_command(const std::string& path) {
    const ex::ExperimentConfig cfg = ex::load_config(path);
    std::cout << path << ": valid " << cfg.kind << " config (schema " << ex::kSchemaVersion << ")\n";
    return kOk;
}

int oracle_command(std::size_t states, std::size_t actions, std::uint64_t seed, double discount) {
    if (states < 2 || states > 8) throw invdp::ConfigError("--states must lie in [2, 8]");
    if (actions < 1 || actions > 6) throw invdp::ConfigError("--actions must lie in [1, 6]");
    if (!(discount >= 0.0 && discount < 1.0)) throw invdp::ConfigError("--discount must lie in [0, 1)");
    ex::TabularConfig cfg;
    cfg.states = states;
    cfg.actions = actions;
    cfg.discount = discount;
    const auto t = ex::tabular_oracle(cfg, seed);
    std::cout << "state,vi_value,enumeration_value,greedy_action\n";
    for (std::size_t s = 0; s < states; ++s) {
        std::cout << s << ',' << invdp::format_number(t.vi_values[s]) << ','
                  << invdp::format_number(t.enumeration.optimal_values[s]) << ',' << t.greedy_policy[s] << '\n';
    }
    std::cout << "policies enumerated: " << t.enumeration.policies_checked
              << "\nmax |V_vi - V_enum|: " << invdp::format_number(t.max_abs_difference)
              << "\ngreedy policy optimal: " << (t.greedy_optimal ? "yes" : "no") << '\n'
              << (t.passed() ? "PASS" : "FAIL") << '\n';
    return t.passed() ? kOk : kNotCertified;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamic programming on invariant subsets of deterministic control problems"};
    app.require_subcommand(1);

    std::string run_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
    run->add_option("config", run_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
    run->add_option("--seed", seed, "Random seed (overrides seed)");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Check a config file without running it");
    validate->add_option("config", validate_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

    std::size_t states = 0, actions = 0;
    std::uint64_t oracle_seed = 0;
    double discount = 0.9;
    auto* oracle = app.add_subcommand("oracle-tabular", "Compare value iteration with policy enumeration");
    oracle->add_option("--states", states, "Number of states (2 to 8)")->required();
    oracle->add_option("--actions", actions, "Number of actions (1 to 6)")->required();
    oracle->add_option("--seed", oracle_seed, "Random seed")->required();
    oracle->add_option("--discount", discount, "Discount factor")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kError;
    }

    try {
        if (*run) return run_command(run_path, out_dir, seed);
        if (*validate) return validate_command(validate_path);
        return oracle_command(states, actions, oracle_seed, discount);
    } catch (const invdp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
    }
    return kError;
}
