#pragma once

// Experiment configurations and runners behind the invariant-dp command line tool.
//
// Every run reads one JSON config, writes plot-ready CSV files plus summary.json
// into an output directory, and reports whether its certification checks passed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <limits>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "invdp/approx.hpp"
#include "invdp/errors.hpp"
#include "invdp/grid.hpp"
#include "invdp/mdp_core.hpp"
#include "invdp/models.hpp"
#include "invdp/restriction.hpp"
#include "invdp/robotics.hpp"
#include "invdp/running_example.hpp"
#include "invdp/sampled_data.hpp"
#include "invdp/serialization.hpp"
#include "invdp/tabular.hpp"

namespace invdp::experiments {

inline constexpr int kSchemaVersion = 1;

/// Independent stream seed for a named stage of a run (splitmix64 of seed + stream).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Stream numbers passed to derive_seed.
enum Stream : std::uint64_t {
    kHullStream = 1,
    kClosureStream = 2,
    kInvarianceStream = 3,
    kNonemptinessStream = 4,
    kTabularStream = 5,
};

// ---------------------------------------------------------------- config reading

namespace detail {

/// A JSON object being consumed, with its dotted path for error messages.
/// finish() rejects keys that were never read, which catches typos.
class Section {
public:
    Section(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
        if (!j.is_object()) throw ConfigError(where() + " must be an object");
    }

    bool has(const std::string& key) const { return j_->contains(key); }

    template <typename T>
    T require(const std::string& key) {
        if (!has(key)) throw ConfigError(where(key) + " is required");
        return read<T>(key);
    }

    template <typename T>
    T get(const std::string& key, T fallback) {
        if (!has(key)) return fallback;
        return read<T>(key);
    }

    const json& raw(const std::string& key) {
        if (!has(key)) throw ConfigError(where(key) + " is required");
        seen_.insert(key);
        return j_->at(key);
    }

    Section child(const std::string& key) {
        seen_.insert(key);
        if (!has(key)) return Section(empty(), where(key));
        return Section(j_->at(key), where(key));
    }

    void finish() const {
        for (const auto& item : j_->items()) {
            if (!seen_.count(item.key())) throw ConfigError(where(item.key()) + " is not a recognized option");
        }
    }

    std::string where(const std::string& key = "") const {
        if (key.empty()) return path_.empty() ? "config" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

private:
    static const json& empty() {
        static const json e = json::object();
        return e;
    }

    template <typename T>
    T read(const std::string& key) {
        seen_.insert(key);
        const json& v = j_->at(key);
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) throw ConfigError(where(key) + " must be a number");
            } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
                if (!v.is_number_integer()) throw ConfigError(where(key) + " must be an integer");
                if constexpr (std::is_unsigned_v<T>) {
                    if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) {
                        throw ConfigError(where(key) + " must be non-negative");
                    }
                }
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw ConfigError(where(key) + " must be a string");
            }
            return v.get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(where(key) + ": " + e.what());
        }
    }

    const json* j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline void require_range(bool ok, const std::string& what, const std::string& rule) {
    if (!ok) throw ConfigError(what + " " + rule);
}

/// Accepts a single count (repeated per dimension) or one count per dimension.
inline std::vector<std::size_t> node_counts(Section& s, const std::string& key, std::size_t fallback, int dims) {
    std::vector<std::size_t> out;
    if (!s.has(key)) {
        out.assign(static_cast<std::size_t>(dims), fallback);
    } else {
        const json& v = s.raw(key);
        try {
            if (v.is_array()) {
                for (const auto& x : v) {
                    if (!x.is_number_unsigned()) throw ConfigError(s.where(key) + " entries must be positive integers");
                    out.push_back(x.get<std::size_t>());
                }
            } else if (v.is_number_unsigned()) {
                out.assign(static_cast<std::size_t>(dims), v.get<std::size_t>());
            } else {
                throw ConfigError(s.where(key) + " must be a positive integer or a list of them");
            }
        } catch (const json::exception& e) {
            throw ConfigError(s.where(key) + ": " + e.what());
        }
    }
    require_range(out.size() == static_cast<std::size_t>(dims), s.where(key),
                  "must have " + std::to_string(dims) + " entries");
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------- config types

struct SolverConfig {
    double discount = 0.9;
    std::vector<std::size_t> state_nodes;
    std::vector<std::size_t> action_nodes;
    double tol = 1e-8;
    std::size_t max_sweeps = 10000;
    /// Initial value at every node; empty means the pessimistic bound -M / (1 - discount).
    std::optional<double> initial_value;
    std::size_t rollout_starts = 10;
    std::size_t rollout_horizon = 200;
};

struct RunningExampleConfig {
    running::Reward reward = running::Reward::Quadratic;
    std::size_t hull_samples = 2000;
    double hull_slack = 0.01;
    std::size_t preimage_state_nodes = 201;
    std::size_t preimage_action_nodes = 401;
    std::size_t c0_nodes = 201;
    std::size_t oracle_nodes = 401;
    double boundary_band = 1e-9;
    std::size_t nonemptiness_samples = 2000;
    std::size_t invariance_samples = 500;
    std::size_t invariance_steps = 100;
    SolverConfig solver;
};

struct CertificationConfig {
    std::size_t invariance_samples = 500;
    std::size_t invariance_steps = 200;
    /// Re-rollouts may leave the reachable closure by this many extra margins.
    double invariance_margins = 2.0;
    std::size_t nonemptiness_samples = 2000;
};

struct EnergyBoundConfig {
    Vector start;
    double c0 = 0.0;
    double c1 = 0.01;
    double duration = 10.0;
};

struct RoboticConfig {
    std::string model = "pendulum";
    models::PendulumParams pendulum;
    models::TwoLinkParams two_link;
    int dof = 1;  // double_integrator only
    ZohConfig zoh{0.005, 20};
    double input_limit = 50.0;
    double state_weight = 1.0;
    double input_weight = 0.01;
    Matrix gain;
    Box initial_box{Vector::Constant(2, -0.3), Vector::Constant(2, 0.3)};
    std::size_t closure_steps = 1000;
    std::size_t closure_samples = 200;
    double margin = 0.02;
    std::size_t hull_samples = 2000;
    double hull_slack = 0.01;
    std::size_t trajectory_steps = 400;
    CertificationConfig certification;
    std::optional<EnergyBoundConfig> energy_bound;
    SolverConfig solver;
};

struct LinearConfig {
    LinearSystem system;
    double sample_period = 0.1;
    double input_limit = 10.0;
    double state_weight = 1.0;
    double input_weight = 0.1;
    Matrix gain;
    CompactSet s0{Box(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0))};
    std::size_t hull_samples = 2000;
    double hull_slack = 0.01;
    CertificationConfig certification;
    SolverConfig solver;
};

struct TabularConfig {
    std::size_t states = 4;
    std::size_t actions = 3;
    double discount = 0.9;
    double tol = 1e-10;
    std::size_t max_sweeps = 100000;
};

struct ExperimentConfig {
    std::string kind;
    std::uint64_t seed = 0;
    std::string output_dir = "results";
    std::variant<RunningExampleConfig, RoboticConfig, LinearConfig, TabularConfig> params;
};

// ---------------------------------------------------------------- config parsing

namespace detail {

inline SolverConfig parse_solver(Section s, int state_dim, int action_dim, SolverConfig defaults) {
    SolverConfig c = defaults;
    c.discount = s.get("discount", c.discount);
    require_range(c.discount >= 0.0 && c.discount < 1.0, s.where("discount"), "must lie in [0, 1)");
    const std::size_t state_default = c.state_nodes.empty() ? 31 : c.state_nodes.front();
    const std::size_t action_default = c.action_nodes.empty() ? 21 : c.action_nodes.front();
    c.state_nodes = node_counts(s, "state_nodes", state_default, state_dim);
    for (auto n : c.state_nodes) require_range(n >= 2, s.where("state_nodes"), "entries must be >= 2");
    c.action_nodes = node_counts(s, "action_nodes", action_default, action_dim);
    for (auto n : c.action_nodes) require_range(n >= 1, s.where("action_nodes"), "entries must be >= 1");
    c.tol = s.get("tol", c.tol);
    require_range(c.tol > 0.0 && std::isfinite(c.tol), s.where("tol"), "must be positive");
    c.max_sweeps = s.get("max_sweeps", c.max_sweeps);
    require_range(c.max_sweeps >= 1, s.where("max_sweeps"), "must be >= 1");
    if (s.has("initial_value")) {
        const json& v = s.raw("initial_value");
        if (v.is_string() && v.get<std::string>() == "lower_bound") {
            c.initial_value.reset();
        } else if (v.is_number()) {
            c.initial_value = v.get<double>();
        } else {
            throw ConfigError(s.where("initial_value") + " must be a number or \"lower_bound\"");
        }
    }
    c.rollout_starts = s.get("rollout_starts", c.rollout_starts);
    c.rollout_horizon = s.get("rollout_horizon", c.rollout_horizon);
    require_range(c.rollout_horizon >= 1, s.where("rollout_horizon"), "must be >= 1");
    s.finish();
    return c;
}

inline CertificationConfig parse_certification(Section s) {
    CertificationConfig c;
    c.invariance_samples = s.get("invariance_samples", c.invariance_samples);
    c.invariance_steps = s.get("invariance_steps", c.invariance_steps);
    c.invariance_margins = s.get("invariance_margins", c.invariance_margins);
    c.nonemptiness_samples = s.get("nonemptiness_samples", c.nonemptiness_samples);
    require_range(c.invariance_samples >= 1, s.where("invariance_samples"), "must be >= 1");
    require_range(c.invariance_steps >= 1, s.where("invariance_steps"), "must be >= 1");
    require_range(c.invariance_margins >= 0.0, s.where("invariance_margins"), "must be >= 0");
    require_range(c.nonemptiness_samples >= 1, s.where("nonemptiness_samples"), "must be >= 1");
    s.finish();
    return c;
}

inline void parse_hull(Section& s, std::size_t& samples, double& slack) {
    samples = s.get("hull_samples", samples);
    slack = s.get("hull_slack", slack);
    require_range(samples >= 1, s.where("hull_samples"), "must be >= 1");
    require_range(slack >= 0.0 && std::isfinite(slack), s.where("hull_slack"), "must be >= 0");
}

inline void parse_reward_weights(Section s, double& state_weight, double& input_weight) {
    state_weight = s.get("state_weight", state_weight);
    input_weight = s.get("input_weight", input_weight);
    require_range(state_weight >= 0.0, s.where("state_weight"), "must be >= 0");
    require_range(input_weight >= 0.0, s.where("input_weight"), "must be >= 0");
    s.finish();
}

inline RunningExampleConfig parse_running_example(Section& root) {
    RunningExampleConfig c;
    {
        Section s = root.child("system");
        const auto reward = s.get<std::string>("reward", "quadratic");
        if (reward == "quadratic") {
            c.reward = running::Reward::Quadratic;
        } else if (reward == "gaussian") {
            c.reward = running::Reward::Gaussian;
        } else {
            throw ConfigError(s.where("reward") + " must be \"quadratic\" or \"gaussian\"");
        }
        s.finish();
    }
    {
        Section s = root.child("restriction");
        parse_hull(s, c.hull_samples, c.hull_slack);
        s.finish();
    }
    {
        Section s = root.child("certification");
        c.nonemptiness_samples = s.get("nonemptiness_samples", c.nonemptiness_samples);
        c.invariance_samples = s.get("invariance_samples", c.invariance_samples);
        c.invariance_steps = s.get("invariance_steps", c.invariance_steps);
        require_range(c.nonemptiness_samples >= 1, s.where("nonemptiness_samples"), "must be >= 1");
        require_range(c.invariance_samples >= 1, s.where("invariance_samples"), "must be >= 1");
        require_range(c.invariance_steps >= 1, s.where("invariance_steps"), "must be >= 1");
        s.finish();
    }
    {
        Section s = root.child("figure");
        c.preimage_state_nodes = s.get("preimage_state_nodes", c.preimage_state_nodes);
        c.preimage_action_nodes = s.get("preimage_action_nodes", c.preimage_action_nodes);
        c.c0_nodes = s.get("c0_nodes", c.c0_nodes);
        c.oracle_nodes = s.get("oracle_nodes", c.oracle_nodes);
        c.boundary_band = s.get("boundary_band", c.boundary_band);
        require_range(c.preimage_state_nodes >= 2, s.where("preimage_state_nodes"), "must be >= 2");
        require_range(c.preimage_action_nodes >= 2, s.where("preimage_action_nodes"), "must be >= 2");
        require_range(c.c0_nodes >= 2, s.where("c0_nodes"), "must be >= 2");
        require_range(c.oracle_nodes >= 2, s.where("oracle_nodes"), "must be >= 2");
        require_range(c.boundary_band >= 0.0, s.where("boundary_band"), "must be >= 0");
        s.finish();
    }
    SolverConfig defaults;
    defaults.state_nodes = {201};
    defaults.action_nodes = {201};
    defaults.tol = 1e-8;
    c.solver = parse_solver(root.child("solver"), 1, 1, defaults);
    return c;
}

inline Matrix parse_gain(Section& s, const std::string& key, int rows, int cols) {
    const Matrix k = matrix_from_json(s.raw(key), s.where(key));
    require_range(k.rows() == rows && k.cols() == cols, s.where(key),
                  "must be " + std::to_string(rows) + "x" + std::to_string(cols));
    return k;
}

inline RoboticConfig parse_robotic(Section& root, bool pendulum_only) {
    RoboticConfig c;
    {
        Section s = root.child("system");
        c.model = pendulum_only ? std::string("pendulum") : s.require<std::string>("model");
        if (pendulum_only && s.has("model")) {
            if (s.require<std::string>("model") != "pendulum") throw ConfigError(s.where("model") + " must be \"pendulum\"");
        }
        Section p = s.child("params");
        if (c.model == "pendulum") {
            c.pendulum.mass = p.get("mass", c.pendulum.mass);
            c.pendulum.length = p.get("length", c.pendulum.length);
            c.pendulum.gravity = p.get("gravity", c.pendulum.gravity);
            c.pendulum.damping = p.get("damping", c.pendulum.damping);
            require_range(c.pendulum.mass > 0.0, p.where("mass"), "must be > 0");
            require_range(c.pendulum.length > 0.0, p.where("length"), "must be > 0");
            require_range(c.pendulum.damping >= 0.0, p.where("damping"), "must be >= 0");
            c.dof = 1;
        } else if (c.model == "double_integrator") {
            c.dof = p.get("dof", 1);
            require_range(c.dof >= 1 && c.dof <= 3, p.where("dof"), "must lie in [1, 3]");
        } else if (c.model == "two_link_arm") {
            auto& t = c.two_link;
            const std::initializer_list<std::pair<const char*, double*>> fields{
                {"m1", &t.m1}, {"m2", &t.m2}, {"l1", &t.l1}, {"l2", &t.l2},
                {"lc1", &t.lc1}, {"lc2", &t.lc2}, {"i1", &t.i1}, {"i2", &t.i2}};
            for (auto [key, field] : fields) {
                *field = p.get(key, *field);
                require_range(*field > 0.0, p.where(key), "must be > 0");
            }
            t.gravity = p.get("gravity", t.gravity);
            c.dof = 2;
        } else {
            throw ConfigError(s.where("model") + " must be one of pendulum, double_integrator, two_link_arm");
        }
        p.finish();
        c.zoh.sample_period = s.get("sample_period", c.zoh.sample_period);
        c.zoh.substeps = s.get("substeps", c.zoh.substeps);
        require_range(c.zoh.sample_period > 0.0, s.where("sample_period"), "must be > 0");
        require_range(c.zoh.substeps >= 1, s.where("substeps"), "must be >= 1");
        c.input_limit = s.get("input_limit", c.input_limit);
        require_range(c.input_limit > 0.0, s.where("input_limit"), "must be > 0");
        s.finish();
    }
    const int d = 2 * c.dof;
    parse_reward_weights(root.child("reward"), c.state_weight, c.input_weight);
    {
        Section s = root.child("stabilizer");
        if (s.has("gain")) {
            c.gain = parse_gain(s, "gain", c.dof, d);
        } else {
            c.gain.resize(c.dof, d);
            c.gain << 4.0 * Matrix::Identity(c.dof, c.dof), 4.0 * Matrix::Identity(c.dof, c.dof);
        }
        if (!is_hurwitz(StabilizerSpec::double_integrator(c.dof, c.gain).closed_loop())) {
            throw ConfigError(s.where("gain") + " does not give a Hurwitz closed loop");
        }
        s.finish();
    }
    {
        Section s = root.child("restriction");
        if (s.has("initial_box")) {
            c.initial_box = box_from_json(s.raw("initial_box"), s.where("initial_box"));
        } else {
            c.initial_box = Box(Vector::Constant(d, -0.3), Vector::Constant(d, 0.3));
        }
        require_range(c.initial_box.dim() == d, s.where("initial_box"), "must have dimension " + std::to_string(d));
        c.closure_steps = s.get("closure_steps", c.closure_steps);
        c.closure_samples = s.get("closure_samples", c.closure_samples);
        c.margin = s.get("margin", c.margin);
        require_range(c.closure_steps >= 1, s.where("closure_steps"), "must be >= 1");
        require_range(c.closure_samples >= 1, s.where("closure_samples"), "must be >= 1");
        require_range(c.margin > 0.0 && std::isfinite(c.margin), s.where("margin"), "must be > 0");
        parse_hull(s, c.hull_samples, c.hull_slack);
        s.finish();
    }
    c.certification = parse_certification(root.child("certification"));
    {
        Section s = root.child("trajectories");
        c.trajectory_steps = s.get("steps", c.trajectory_steps);
        require_range(c.trajectory_steps >= 1, s.where("steps"), "must be >= 1");
        s.finish();
    }
    if (root.has("energy_bound")) {
        Section s = root.child("energy_bound");
        EnergyBoundConfig e;
        e.start = vector_from_json(s.raw("start"), s.where("start"));
        require_range(e.start.size() == d, s.where("start"), "must have dimension " + std::to_string(d));
        e.c0 = s.require<double>("c0");
        e.c1 = s.require<double>("c1");
        e.duration = s.get("duration", e.duration);
        require_range(e.c0 >= 0.0, s.where("c0"), "must be >= 0");
        require_range(e.c1 > 0.0, s.where("c1"), "must be > 0");
        require_range(e.duration > 0.0, s.where("duration"), "must be > 0");
        s.finish();
        c.energy_bound = e;
    }
    SolverConfig defaults;
    defaults.state_nodes = {31};
    defaults.action_nodes = {21};
    defaults.tol = 1e-6;
    c.solver = parse_solver(root.child("solver"), d, c.dof, defaults);
    return c;
}

inline LinearConfig parse_linear(Section& root) {
    LinearConfig c;
    {
        Section s = root.child("system");
        c.system = linear_system_from_json(s.raw("dynamics"), s.where("dynamics"));
        c.sample_period = s.get("sample_period", c.sample_period);
        require_range(c.sample_period > 0.0, s.where("sample_period"), "must be > 0");
        c.input_limit = s.get("input_limit", c.input_limit);
        require_range(c.input_limit > 0.0, s.where("input_limit"), "must be > 0");
        s.finish();
    }
    const int d = static_cast<int>(c.system.A.rows());
    const int m = static_cast<int>(c.system.B.cols());
    parse_reward_weights(root.child("reward"), c.state_weight, c.input_weight);
    {
        Section s = root.child("policy");
        c.gain = parse_gain(s, "gain", m, d);
        s.finish();
    }
    {
        Section s = root.child("restriction");
        c.s0 = compact_set_from_json(s.raw("s0"), s.where("s0"));
        require_range(c.s0.dim() == d, s.where("s0"), "must have dimension " + std::to_string(d));
        parse_hull(s, c.hull_samples, c.hull_slack);
        s.finish();
    }
    c.certification = parse_certification(root.child("certification"));
    SolverConfig defaults;
    defaults.state_nodes = {31};
    defaults.action_nodes = {21};
    defaults.tol = 1e-6;
    c.solver = parse_solver(root.child("solver"), d, m, defaults);
    return c;
}

inline TabularConfig parse_tabular(Section& root) {
    TabularConfig c;
    {
        Section s = root.child("system");
        c.states = s.get("states", c.states);
        c.actions = s.get("actions", c.actions);
        require_range(c.states >= 2 && c.states <= 8, s.where("states"), "must lie in [2, 8]");
        require_range(c.actions >= 1 && c.actions <= 6, s.where("actions"), "must lie in [1, 6]");
        s.finish();
    }
    {
        Section s = root.child("solver");
        c.discount = s.get("discount", c.discount);
        c.tol = s.get("tol", c.tol);
        c.max_sweeps = s.get("max_sweeps", c.max_sweeps);
        require_range(c.discount >= 0.0 && c.discount < 1.0, s.where("discount"), "must lie in [0, 1)");
        require_range(c.tol > 0.0, s.where("tol"), "must be positive");
        require_range(c.max_sweeps >= 1, s.where("max_sweeps"), "must be >= 1");
        s.finish();
    }
    return c;
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& j) {
    detail::Section root(j, "");
    const int schema = root.require<int>("schema");
    if (schema != kSchemaVersion) {
        throw ConfigError("schema " + std::to_string(schema) + " is not supported (expected " +
                          std::to_string(kSchemaVersion) + ")");
    }
    ExperimentConfig c;
    c.kind = root.require<std::string>("kind");
    c.seed = root.require<std::uint64_t>("seed");
    c.output_dir = root.get<std::string>("output_dir", c.output_dir);
    if (c.kind == "running_example") {
        c.params = detail::parse_running_example(root);
    } else if (c.kind == "pendulum") {
        c.params = detail::parse_robotic(root, true);
    } else if (c.kind == "custom") {
        c.params = detail::parse_robotic(root, false);
    } else if (c.kind == "linear") {
        c.params = detail::parse_linear(root);
    } else if (c.kind == "tabular_oracle") {
        c.params = detail::parse_tabular(root);
    } else {
        throw ConfigError("kind must be one of running_example, tabular_oracle, linear, pendulum, custom");
    }
    root.finish();
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    try {
        return parse_config(j);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------- outputs

struct RunResult {
    /// False when a certification check failed; all outputs are still written.
    bool certified = true;
    json summary;
    std::vector<std::string> files;
};

namespace detail {

class OutputDir {
public:
    explicit OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw Error("cannot create output directory " + dir_.string() + ": " + ec.message());
    }

    /// Writes a file atomically enough for our purposes: build in memory, then write once.
    void write(const std::string& name, const std::string& contents, std::vector<std::string>& files) const {
        const auto path = dir_ / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + path.string() + " for writing");
        out << contents;
        out.close();
        if (!out) throw Error("failed writing " + path.string());
        files.push_back(name);
    }

private:
    std::filesystem::path dir_;
};

inline std::string num(double x) { return format_number(x); }

inline json vector_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

inline std::string convergence_csv(const ViDiagnostics& diag) {
    std::ostringstream out;
    out << "sweep,residual\n";
    for (std::size_t n = 0; n < diag.residual_history.size(); ++n) {
        out << n + 1 << ',' << num(diag.residual_history[n]) << '\n';
    }
    return out.str();
}

inline std::string value_csv(const GridValueFn& v) {
    std::ostringstream out;
    write_grid_csv(out, v);
    return out.str();
}

inline json invariance_json(const InvarianceReport& r) {
    json j{{"samples", r.samples},     {"steps", r.steps},
           {"violations", r.violations}, {"pass_rate", r.pass_rate()},
           {"passed", r.passed()}};
    if (!r.passed()) {
        j["worst_distance"] = r.worst_distance;
        j["worst_state"] = vector_json(r.worst_state);
        j["worst_origin"] = vector_json(r.worst_origin);
        j["worst_step"] = r.worst_step;
    }
    return j;
}

inline json nonemptiness_json(const NonemptinessReport& r) {
    json j{{"samples", r.samples},
           {"failures", r.failures.size()},
           {"pass_rate", r.pass_rate()},
           {"passed", r.passed()}};
    if (!r.failures.empty()) {
        j["first_failure"] = {{"state", vector_json(r.failures.front().state)},
                              {"policy", r.failures.front().policy_index},
                              {"action", vector_json(r.failures.front().action)}};
    }
    return j;
}

inline json diagnostics_json(const ViDiagnostics& diag) {
    double max_ratio = 0.0;
    for (std::size_t n = 1; n < diag.residual_history.size(); ++n) {
        if (diag.residual_history[n - 1] > 0.0) {
            max_ratio = std::max(max_ratio, diag.residual_history[n] / diag.residual_history[n - 1]);
        }
    }
    return json{{"sweeps", diag.sweeps},
                {"final_residual", diag.final_residual},
                {"error_bound", diag.error_bound},
                {"inactive_nodes", diag.inactive_nodes},
                {"max_residual_ratio", max_ratio}};
}

/// Largest spread of values over grid cells whose corners are all active.
inline double cell_oscillation(const GridValueFn& v, const BellmanSweep& sweep) {
    const int dims = v.dim();
    std::vector<std::size_t> strides(static_cast<std::size_t>(dims), 1);
    for (int d = dims - 2; d >= 0; --d) strides[d] = strides[d + 1] * v.axes()[d + 1].size();
    double worst = 0.0;
    for (std::size_t n = 0; n < v.size(); ++n) {
        // n is the lowest corner of a cell unless it sits on a top face.
        bool lowest = true;
        std::size_t rest = n;
        for (int d = 0; d < dims; ++d) {
            const std::size_t idx = rest / strides[d];
            rest %= strides[d];
            if (idx + 1 >= v.axes()[d].size()) lowest = false;
        }
        if (!lowest) continue;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        bool active = true;
        for (std::size_t corner = 0; corner < (std::size_t{1} << dims); ++corner) {
            std::size_t k = n;
            for (int d = 0; d < dims; ++d) {
                if (corner & (std::size_t{1} << d)) k += strides[d];
            }
            active = active && sweep.active(k);
            lo = std::min(lo, v[k]);
            hi = std::max(hi, v[k]);
        }
        if (active) worst = std::max(worst, hi - lo);
    }
    return worst;
}

/// Value iteration on a restricted problem plus greedy rollouts from active nodes.
///
/// A greedy rollout of horizon H from a node is expected to return within
///   gamma^H M / (1 - gamma) + (1 + gamma) / (1 - gamma) * (residual + oscillation)
/// of the node value, where M bounds |r| on the tabulated pairs and oscillation is
/// the largest value spread over fully active grid cells.
struct SolveOutputs {
    GridValueFn value;
    ViDiagnostics diagnostics;
    json summary;
    std::string rollouts_csv;
    bool rollouts_within_tolerance = true;
};

inline SolveOutputs solve_restricted(const RestrictedMpop& restricted, const Box& state_box, const SolverConfig& cfg) {
    MpopSpec mdp = restricted.mdp();
    mdp.discount = cfg.discount;
    const ActionGrid actions(restricted.action_hull, cfg.action_nodes);
    const auto policies = restricted.policies;
    SweepOptions options;
    options.extra_candidates = [policies](const Vector& s) {
        std::vector<Vector> out;
        for (const auto& p : policies) out.push_back(p(s));
        return out;
    };
    options.skip_nodes_without_actions = true;

    GridValueFn grid = GridValueFn::uniform(state_box, cfg.state_nodes);
    const BellmanSweep sweep(mdp, grid, actions.actions(), options);
    const double m = sweep.reward_bound();
    const double fill = cfg.initial_value.value_or(-m / (1.0 - cfg.discount));
    for (std::size_t n = 0; n < grid.size(); ++n) grid[n] = fill;
    auto [value, diag] = value_iterate(sweep, grid, cfg.tol, cfg.max_sweeps);

    SolveOutputs out{value, diag, json::object(), "", true};
    const double oscillation = cell_oscillation(value, sweep);
    const double gamma = cfg.discount;
    const double tolerance = std::pow(gamma, static_cast<double>(cfg.rollout_horizon)) * m / (1.0 - gamma) +
                             (1.0 + gamma) / (1.0 - gamma) * (diag.final_residual + oscillation);

    std::vector<std::size_t> active;
    for (std::size_t n = 0; n < value.size(); ++n) {
        if (sweep.active(n)) active.push_back(n);
    }
    std::ostringstream csv;
    csv << "node";
    for (int d = 0; d < value.dim(); ++d) csv << ",x" << d;
    csv << ",grid_value,rollout_return,difference,tolerance\n";
    double worst = 0.0;
    std::size_t failed = 0;
    const std::size_t starts = std::min(cfg.rollout_starts, active.size());
    if (starts > 0) {
        const PolicyFn greedy = extract_greedy(mdp, value, actions.actions(), options.extra_candidates);
        for (std::size_t i = 0; i < starts; ++i) {
            // Evenly spaced through the active nodes, deterministic.
            const std::size_t n = active[(i * active.size()) / starts + (active.size() / starts) / 2];
            const Vector s = value.node(n);
            double ret = std::numeric_limits<double>::quiet_NaN();
            try {
                ret = rollout_return(mdp, greedy, s, cfg.rollout_horizon);
            } catch (const Error&) {
                ++failed;
            }
            const double diff = ret - value[n];
            if (std::isfinite(diff)) worst = std::max(worst, std::abs(diff));
            csv << n;
            for (int d = 0; d < value.dim(); ++d) csv << ',' << num(s[d]);
            csv << ',' << num(value[n]) << ',' << num(ret) << ',' << num(diff) << ',' << num(tolerance) << '\n';
        }
    }
    out.rollouts_within_tolerance = failed == 0 && worst <= tolerance;
    out.rollouts_csv = csv.str();
    out.summary = diagnostics_json(diag);
    out.summary["reward_bound"] = m;
    out.summary["initial_value"] = fill;
    out.summary["nodes"] = value.size();
    out.summary["action_grid_size"] = actions.size();
    out.summary["rollouts"] = {{"starts", starts},
                               {"horizon", cfg.rollout_horizon},
                               {"cell_oscillation", oscillation},
                               {"tolerance", tolerance},
                               {"max_abs_difference", worst},
                               {"failed", failed},
                               {"within_tolerance", out.rollouts_within_tolerance}};
    return out;
}

/// Endpoint of the admissible action section at s, found by bisection between an
/// admissible action and a range end. Returns the range end when it is admissible.
inline double section_endpoint(const std::function<bool(double)>& admissible, double inside, double end) {
    if (admissible(end)) return end;
    double in = inside, out = end;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (in + out);
        if (mid == in || mid == out) break;
        (admissible(mid) ? in : out) = mid;
    }
    return in;
}

}  // namespace detail

/// Constructed and closed-form admissible sections of the running example at one state.
struct C0Row {
    double s;
    double section_lo, section_hi;        // over the constructed action hull
    double constructed_lo, constructed_hi;  // over the policy image [-1, 1]
    double oracle_lo, oracle_hi;
};

inline C0Row c0_row(const RestrictedMpop& restricted, double s) {
    const Vector state = scalar(s);
    auto admissible = [&](double a) { return restricted.admissible(state, scalar(a)); };
    // pi_0(s) = -s is admissible on S0 and lies in both ranges.
    const double inside = restricted.policies.front()(state)[0];
    C0Row row{s, 0, 0, 0, 0, 0, 0};
    row.section_lo = detail::section_endpoint(admissible, inside, restricted.action_hull.lo[0]);
    row.section_hi = detail::section_endpoint(admissible, inside, restricted.action_hull.hi[0]);
    row.constructed_lo = detail::section_endpoint(admissible, inside, -1.0);
    row.constructed_hi = detail::section_endpoint(admissible, inside, 1.0);
    std::tie(row.oracle_lo, row.oracle_hi) = running::example_c0_interval(s);
    return row;
}

struct OracleComparison {
    std::size_t compared = 0;
    std::size_t mismatches = 0;
    std::size_t boundary_excluded = 0;
};

/// Constructed admissibility against the closed form on an n x n grid over [-1, 1]^2.
inline OracleComparison compare_with_oracle(const RestrictedMpop& restricted, std::size_t nodes, double band) {
    OracleComparison out;
    const auto axis = linspace(-1.0, 1.0, nodes);
    for (double s : axis) {
        for (double a : axis) {
            if (std::abs(std::abs(running::transition(s, a)) - 1.0) <= band) {
                ++out.boundary_excluded;
                continue;
            }
            ++out.compared;
            if (restricted.admissible(scalar(s), scalar(a)) != running::example_admissible(s, a)) ++out.mismatches;
        }
    }
    return out;
}

inline RestrictedMpop build_running_restriction(const RunningExampleConfig& cfg, std::uint64_t seed) {
    const CompactSet s0(Box(scalar(-1.0), scalar(1.0)));
    std::vector<PolicyFn> policies{running::negation_policy()};
    const Box hull = build_action_hull(policies, s0, cfg.hull_samples, derive_seed(seed, kHullStream), cfg.hull_slack);
    return restrict(running::make_mdp(cfg.solver.discount, cfg.reward), s0, std::move(policies), hull);
}

inline RunResult run_example(const RunningExampleConfig& cfg, std::uint64_t seed, const std::filesystem::path& dir) {
    const detail::OutputDir out(dir);
    RunResult result;
    const RestrictedMpop r = build_running_restriction(cfg, seed);

    {
        std::ostringstream csv;
        csv << "s,a,in_preimage\n";
        for (double s : linspace(-1.0, 1.0, cfg.preimage_state_nodes)) {
            for (double a : linspace(-4.0, 4.0, cfg.preimage_action_nodes)) {
                const bool inside = r.s0.contains(r.base.transition(scalar(s), scalar(a)));
                csv << detail::num(s) << ',' << detail::num(a) << ',' << (inside ? 1 : 0) << '\n';
            }
        }
        out.write("preimage.csv", csv.str(), result.files);
    }
    {
        std::ostringstream csv;
        csv << "s,section_lo,section_hi,constructed_lo,constructed_hi,oracle_lo,oracle_hi\n";
        for (double s : linspace(-1.0, 1.0, cfg.c0_nodes)) {
            const C0Row row = c0_row(r, s);
            csv << detail::num(row.s) << ',' << detail::num(row.section_lo) << ',' << detail::num(row.section_hi) << ','
                << detail::num(row.constructed_lo) << ',' << detail::num(row.constructed_hi) << ','
                << detail::num(row.oracle_lo) << ',' << detail::num(row.oracle_hi) << '\n';
        }
        out.write("c0_graph.csv", csv.str(), result.files);
    }
    const OracleComparison cmp = compare_with_oracle(r, cfg.oracle_nodes, cfg.boundary_band);
    const auto nonempty = check_nonemptiness(r, cfg.nonemptiness_samples, derive_seed(seed, kNonemptinessStream));
    const auto invariance = check_forward_invariance(r.base, r.policies.front(), r.s0, cfg.invariance_samples,
                                                     cfg.invariance_steps, derive_seed(seed, kInvarianceStream));

    const auto solved = detail::solve_restricted(r, Box(scalar(-1.0), scalar(1.0)), cfg.solver);
    out.write("vi_convergence.csv", detail::convergence_csv(solved.diagnostics), result.files);
    out.write("value_function.csv", detail::value_csv(solved.value), result.files);
    out.write("rollouts.csv", solved.rollouts_csv, result.files);

    result.certified = cmp.mismatches == 0 && nonempty.passed() && invariance.passed();
    result.summary = json{
        {"kind", "running_example"},
        {"seed", seed},
        {"reward", cfg.reward == running::Reward::Quadratic ? "quadratic" : "gaussian"},
        {"action_hull", {r.action_hull.lo[0], r.action_hull.hi[0]}},
        {"oracle", {{"grid_nodes", cfg.oracle_nodes},
                    {"boundary_band", cfg.boundary_band},
                    {"compared", cmp.compared},
                    {"boundary_excluded", cmp.boundary_excluded},
                    {"mismatches", cmp.mismatches}}},
        {"nonemptiness", detail::nonemptiness_json(nonempty)},
        {"invariance", detail::invariance_json(invariance)},
        {"value_iteration", solved.summary},
        {"value_at_origin", grid_eval(solved.value, scalar(0.0))},
        {"certified", result.certified},
    };
    return result;
}

namespace detail {

inline RoboticSystem make_robot(const RoboticConfig& cfg) {
    if (cfg.model == "pendulum") return models::pendulum(cfg.pendulum);
    if (cfg.model == "double_integrator") return models::double_integrator(cfg.dof);
    if (cfg.model == "two_link_arm") return models::two_link_arm(cfg.two_link);
    throw ConfigError("unknown model " + cfg.model);
}

/// Uniform draws (with replacement) from the sampled closure points.
inline std::vector<Vector> pick_points(const std::vector<Vector>& points, std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> index(0, points.size() - 1);
    std::vector<Vector> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(points[index(rng)]);
    return out;
}

inline RewardFn quadratic_reward(double state_weight, double input_weight) {
    return [state_weight, input_weight](const Vector& x, const Vector& u) {
        return -state_weight * x.squaredNorm() - input_weight * u.squaredNorm();
    };
}

inline std::string trajectory_header(int state_dim, int input_dim) {
    std::ostringstream out;
    out << "trajectory,step,time";
    for (int d = 0; d < state_dim; ++d) out << ",x" << d;
    for (int d = 0; d < input_dim; ++d) out << ",u" << d;
    out << '\n';
    return out.str();
}

}  // namespace detail

inline RunResult run_robotic(const RoboticConfig& cfg, std::uint64_t seed, const std::filesystem::path& dir,
                             const std::string& kind) {
    const detail::OutputDir out(dir);
    RunResult result;
    const RoboticSystem sys = detail::make_robot(cfg);
    const int n = sys.dof;
    const int d = sys.state_dim();
    const auto affine = as_control_affine(sys);
    const MpopSpec base = make_sampled_mpop(affine, detail::quadratic_reward(cfg.state_weight, cfg.input_weight),
                                            cfg.solver.discount, cfg.zoh,
                                            Box(Vector::Constant(n, -cfg.input_limit), Vector::Constant(n, cfg.input_limit)));
    const PolicyFn policy = stabilizing_policy(sys, StabilizerSpec::double_integrator(n, cfg.gain));

    // Closed-loop trajectories from the corners of the initial box.
    {
        std::ostringstream csv;
        csv << detail::trajectory_header(d, n);
        const std::size_t corners = std::size_t{1} << d;
        for (std::size_t c = 0; c < corners; ++c) {
            Vector x(d);
            for (int k = 0; k < d; ++k) x[k] = (c >> k) & 1U ? cfg.initial_box.hi[k] : cfg.initial_box.lo[k];
            for (std::size_t t = 0; t <= cfg.trajectory_steps; ++t) {
                const Vector u = policy(x);
                csv << c << ',' << t << ',' << detail::num(static_cast<double>(t) * cfg.zoh.sample_period);
                for (int k = 0; k < d; ++k) csv << ',' << detail::num(x[k]);
                for (int k = 0; k < n; ++k) csv << ',' << detail::num(u[k]);
                csv << '\n';
                if (t < cfg.trajectory_steps) x = base.transition(x, u);
            }
        }
        out.write("trajectories.csv", csv.str(), result.files);
    }

    const CompactSet closure = reachable_closure(base, policy, cfg.initial_box, cfg.closure_steps, cfg.closure_samples,
                                                 cfg.margin, derive_seed(seed, kClosureStream));
    const auto& points = std::get<SampledClosure>(closure.shape()).points();
    const Box hull = build_action_hull({policy}, closure, cfg.hull_samples, derive_seed(seed, kHullStream), cfg.hull_slack);
    const RestrictedMpop r = restrict(base, closure, {policy}, hull);

    const auto starts = detail::pick_points(points, cfg.certification.invariance_samples,
                                            derive_seed(seed, kInvarianceStream));
    const CompactSet target(SampledClosure(points, cfg.margin * (1.0 + cfg.certification.invariance_margins)));
    const auto invariance = check_invariance_from(base, policy, target, starts, cfg.certification.invariance_steps);
    const auto nonempty = check_nonemptiness_at(
        r, detail::pick_points(points, cfg.certification.nonemptiness_samples, derive_seed(seed, kNonemptinessStream)));

    json energy = nullptr;
    if (cfg.energy_bound) {
        const auto& e = *cfg.energy_bound;
        std::vector<TimedState> traj{{0.0, e.start}};
        const auto steps = static_cast<std::size_t>(std::ceil(e.duration / cfg.zoh.sample_period - 1e-9));
        for (std::size_t t = 1; t <= steps; ++t) {
            traj.push_back({static_cast<double>(t) * cfg.zoh.sample_period,
                            integrate_zoh(affine, traj.back().state, Vector::Zero(n), cfg.zoh)});
        }
        const auto report = energy_bound_check(sys, traj, e.c0, e.c1);
        energy = {{"samples", traj.size()},
                  {"violations", report.violations.size()},
                  {"max_ratio", report.max_ratio},
                  {"passed", report.passed()}};
        if (sys.potential) {
            double drift = 0.0;
            const double e0 = total_energy(sys, traj.front().state);
            for (const auto& ts : traj) drift = std::max(drift, std::abs(total_energy(sys, ts.state) - e0));
            energy["energy_drift"] = drift;
        }
    }

    const auto solved = detail::solve_restricted(r, closure.bounding_box(), cfg.solver);
    out.write("vi_convergence.csv", detail::convergence_csv(solved.diagnostics), result.files);
    out.write("value_function.csv", detail::value_csv(solved.value), result.files);
    out.write("rollouts.csv", solved.rollouts_csv, result.files);

    const Box bbox = closure.bounding_box();
    json certification{{"invariance", detail::invariance_json(invariance)},
                       {"invariance_target_margin", cfg.margin * (1.0 + cfg.certification.invariance_margins)},
                       {"nonemptiness", detail::nonemptiness_json(nonempty)},
                       {"closure", {{"points", points.size()},
                                    {"margin", cfg.margin},
                                    {"bounding_box", {{"lo", detail::vector_json(bbox.lo)},
                                                      {"hi", detail::vector_json(bbox.hi)}}}}},
                       {"action_hull", {{"lo", detail::vector_json(hull.lo)}, {"hi", detail::vector_json(hull.hi)}}},
                       {"closed_loop_hurwitz", true}};
    if (!energy.is_null()) certification["energy_bound"] = energy;
    out.write("certification.json", certification.dump(2) + "\n", result.files);

    result.certified = invariance.passed() && nonempty.passed() && (energy.is_null() || energy["passed"].get<bool>());
    result.summary = json{{"kind", kind},
                          {"model", cfg.model},
                          {"seed", seed},
                          {"sample_period", cfg.zoh.sample_period},
                          {"certification", certification},
                          {"value_iteration", solved.summary},
                          {"certified", result.certified}};
    return result;
}

inline RunResult run_linear(const LinearConfig& cfg, std::uint64_t seed, const std::filesystem::path& dir) {
    const detail::OutputDir out(dir);
    RunResult result;
    const int m = static_cast<int>(cfg.system.B.cols());
    const auto discrete = discretize_zoh(cfg.system, cfg.sample_period);
    const Matrix ad = discrete.first, bd = discrete.second;
    MpopSpec base;
    base.state_dim = static_cast<int>(cfg.system.A.rows());
    base.action_dim = m;
    base.discount = cfg.solver.discount;
    base.transition = [ad, bd](const Vector& x, const Vector& u) -> Vector { return ad * x + bd * u; };
    base.reward = detail::quadratic_reward(cfg.state_weight, cfg.input_weight);
    const Box limits(Vector::Constant(m, -cfg.input_limit), Vector::Constant(m, cfg.input_limit));
    base.admissible = [limits](const Vector&, const Vector& u) { return limits.contains(u); };
    const PolicyFn policy{[k = cfg.gain](const Vector& x) -> Vector { return -k * x; }, "linear_feedback"};

    const Box hull = build_action_hull({policy}, cfg.s0, cfg.hull_samples, derive_seed(seed, kHullStream), cfg.hull_slack);
    const RestrictedMpop r = restrict(base, cfg.s0, {policy}, hull);
    const auto invariance =
        check_forward_invariance(base, policy, cfg.s0, cfg.certification.invariance_samples,
                                 cfg.certification.invariance_steps, derive_seed(seed, kInvarianceStream));
    const auto nonempty =
        check_nonemptiness(r, cfg.certification.nonemptiness_samples, derive_seed(seed, kNonemptinessStream));
    const auto solved = detail::solve_restricted(r, cfg.s0.bounding_box(), cfg.solver);
    out.write("vi_convergence.csv", detail::convergence_csv(solved.diagnostics), result.files);
    out.write("value_function.csv", detail::value_csv(solved.value), result.files);
    out.write("rollouts.csv", solved.rollouts_csv, result.files);

    json certification{{"invariance", detail::invariance_json(invariance)},
                       {"nonemptiness", detail::nonemptiness_json(nonempty)},
                       {"action_hull", {{"lo", detail::vector_json(hull.lo)}, {"hi", detail::vector_json(hull.hi)}}}};
    out.write("certification.json", certification.dump(2) + "\n", result.files);
    result.certified = invariance.passed() && nonempty.passed();
    result.summary = json{{"kind", "linear"},
                          {"seed", seed},
                          {"certification", certification},
                          {"value_iteration", solved.summary},
                          {"certified", result.certified}};
    return result;
}

struct TabularOutcome {
    tabular::TabularMdp mdp;
    std::vector<double> vi_values;
    tabular::EnumerationResult enumeration;
    std::vector<std::size_t> greedy_policy;
    double max_abs_difference = 0.0;
    bool greedy_optimal = true;
    ViDiagnostics diagnostics;

    bool passed() const { return max_abs_difference <= 1e-8 && greedy_optimal; }
};

/// Value iteration on a random finite MDP checked against exhaustive policy enumeration.
inline TabularOutcome tabular_oracle(const TabularConfig& cfg, std::uint64_t seed) {
    TabularOutcome out;
    out.mdp = tabular::random_mdp(cfg.states, cfg.actions, cfg.discount, seed);
    const MpopSpec mdp = tabular::to_mpop(out.mdp);
    auto [v, diag] =
        value_iterate(mdp, tabular::state_grid(out.mdp), tabular::action_list(out.mdp), cfg.tol, cfg.max_sweeps);
    out.diagnostics = diag;
    out.vi_values = v.values();
    out.enumeration = tabular::enumerate_policies(out.mdp);
    for (std::size_t s = 0; s < cfg.states; ++s) {
        out.max_abs_difference = std::max(out.max_abs_difference, std::abs(v[s] - out.enumeration.optimal_values[s]));
    }
    const PolicyFn greedy = extract_greedy(mdp, v, tabular::action_list(out.mdp));
    for (std::size_t s = 0; s < cfg.states; ++s) {
        out.greedy_policy.push_back(static_cast<std::size_t>(greedy(scalar(static_cast<double>(s)))[0]));
    }
    const auto greedy_value = tabular::policy_value(out.mdp, out.greedy_policy);
    for (std::size_t s = 0; s < cfg.states; ++s) {
        if (greedy_value[s] < out.enumeration.optimal_values[s] - 1e-8) out.greedy_optimal = false;
    }
    return out;
}

inline json tabular_json(const TabularOutcome& t) {
    return json{{"states", t.mdp.states},
                {"actions", t.mdp.actions},
                {"discount", t.mdp.discount},
                {"policies_enumerated", t.enumeration.policies_checked},
                {"sweeps", t.diagnostics.sweeps},
                {"max_abs_difference", t.max_abs_difference},
                {"greedy_policy", t.greedy_policy},
                {"greedy_optimal", t.greedy_optimal},
                {"passed", t.passed()}};
}

inline RunResult run_tabular(const TabularConfig& cfg, std::uint64_t seed, const std::filesystem::path& dir) {
    const detail::OutputDir out(dir);
    RunResult result;
    const auto t = tabular_oracle(cfg, derive_seed(seed, kTabularStream));
    std::ostringstream csv;
    csv << "state,vi_value,enumeration_value,greedy_action\n";
    for (std::size_t s = 0; s < cfg.states; ++s) {
        csv << s << ',' << detail::num(t.vi_values[s]) << ',' << detail::num(t.enumeration.optimal_values[s]) << ','
            << t.greedy_policy[s] << '\n';
    }
    out.write("values.csv", csv.str(), result.files);
    result.certified = t.passed();
    result.summary = tabular_json(t);
    result.summary["kind"] = "tabular_oracle";
    result.summary["seed"] = seed;
    result.summary["certified"] = result.certified;
    return result;
}

/// Runs the experiment and writes summary.json last.
inline RunResult run(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    RunResult result = std::visit(
        [&](const auto& p) -> RunResult {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, RunningExampleConfig>) return run_example(p, cfg.seed, dir);
            if constexpr (std::is_same_v<T, RoboticConfig>) return run_robotic(p, cfg.seed, dir, cfg.kind);
            if constexpr (std::is_same_v<T, LinearConfig>) return run_linear(p, cfg.seed, dir);
            if constexpr (std::is_same_v<T, TabularConfig>) return run_tabular(p, cfg.seed, dir);
        },
        cfg.params);
    detail::OutputDir(dir).write("summary.json", result.summary.dump(2) + "\n", result.files);
    return result;
}

}  // namespace invdp::experiments
