#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "invdp/errors.hpp"
#include "invdp/grid.hpp"
#include "invdp/types.hpp"

namespace invdp {

template <typename F>
concept ValueFunction = std::invocable<const F&, const Vector&> &&
                        std::convertible_to<std::invoke_result_t<const F&, const Vector&>, double>;

struct ViDiagnostics {
    std::size_t sweeps = 0;
    double final_residual = 0.0;
    std::vector<double> residual_history;
    double error_bound = 0.0;
    /// Nodes skipped because no candidate was admissible (only with skip_nodes_without_actions).
    std::size_t inactive_nodes = 0;
};

/// Value iteration hit max_sweeps; carries the last iterate and its diagnostics.
class NotConverged : public Error {
public:
    NotConverged(GridValueFn last, ViDiagnostics diagnostics)
        : Error("value iteration did not reach tolerance after " + std::to_string(diagnostics.sweeps) +
                " sweeps (residual " + std::to_string(diagnostics.final_residual) + ")"),
          last(std::move(last)), diagnostics(std::move(diagnostics)) {}

    GridValueFn last;
    ViDiagnostics diagnostics;
};

struct Step {
    Vector next;
    double reward;
};

/// One transition with finiteness checks on both outputs.
inline Step checked_step(const MpopSpec& mdp, const Vector& s, const Vector& a) {
    Step out{mdp.transition(s, a), mdp.reward(s, a)};
    if (!all_finite(out.next)) throw NonFiniteValue("transition at state " + detail::format_vector(s));
    if (!std::isfinite(out.reward)) throw NonFiniteValue("reward at state " + detail::format_vector(s));
    return out;
}

/// Discounted return of the first `horizon` steps of the closed loop from s0.
///
/// When |r| <= M the omitted tail is at most gamma^horizon * M / (1 - gamma).
inline double rollout_return(const MpopSpec& mdp, const PolicyFn& policy, const Vector& s0, std::size_t horizon) {
    double total = 0.0;
    double weight = 1.0;
    Vector s = s0;
    for (std::size_t t = 0; t < horizon; ++t) {
        Vector a = policy(s);
        if (!mdp.admissible(s, a)) throw InadmissibleAction(t, s, a);
        Step step = checked_step(mdp, s, a);
        total += weight * step.reward;
        weight *= mdp.discount;
        s = std::move(step.next);
    }
    return total;
}

/// Closed-loop trajectory s_0..s_steps; throws InadmissibleAction on the first violation.
inline std::vector<Vector> rollout_states(const MpopSpec& mdp, const PolicyFn& policy, const Vector& s0,
                                          std::size_t steps) {
    std::vector<Vector> states;
    states.reserve(steps + 1);
    states.push_back(s0);
    for (std::size_t t = 0; t < steps; ++t) {
        const Vector& s = states.back();
        Vector a = policy(s);
        if (!mdp.admissible(s, a)) throw InadmissibleAction(t, s, a);
        Vector next = mdp.transition(s, a);
        if (!all_finite(next)) throw NonFiniteValue("transition at state " + detail::format_vector(s));
        states.push_back(std::move(next));
    }
    return states;
}

struct BackupResult {
    double value;
    Vector best_action;
    std::size_t best_index;
};

/// max over admissible candidates of r(s,a) + gamma * V(f(s,a)); ties go to the lowest index.
template <ValueFunction V>
BackupResult bellman_backup(const MpopSpec& mdp, const V& value_fn, const Vector& s,
                            std::span<const Vector> candidates) {
    if (candidates.empty()) throw DomainError("bellman_backup needs at least one candidate action");
    std::optional<BackupResult> best;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const Vector& a = candidates[i];
        if (!mdp.admissible(s, a)) continue;
        Step step = checked_step(mdp, s, a);
        const double q = step.reward + mdp.discount * static_cast<double>(value_fn(step.next));
        if (!best || q > best->value) best = BackupResult{q, a, i};
    }
    if (!best) throw NoAdmissibleAction(s);
    return *best;
}

template <ValueFunction V>
double policy_backup(const MpopSpec& mdp, const V& value_fn, const PolicyFn& policy, const Vector& s) {
    Vector a = policy(s);
    if (!mdp.admissible(s, a)) throw InadmissibleAction(0, s, a);
    Step step = checked_step(mdp, s, a);
    return step.reward + mdp.discount * static_cast<double>(value_fn(step.next));
}

/// Per-state candidates appended after the shared action list.
using ExtraCandidatesFn = std::function<std::vector<Vector>(const Vector& state)>;

struct SweepOptions {
    ExtraCandidatesFn extra_candidates;
    /// Keep nodes with no admissible candidate at their initial value instead of failing.
    bool skip_nodes_without_actions = false;
};

/// Optimal Bellman operator restricted to the nodes of a grid.
///
/// Rewards, admissibility and successor interpolation stencils do not depend on
/// the iterate, so they are tabulated once at construction. A sweep is then a
/// pure function of the previous value table.
class BellmanSweep {
public:
    BellmanSweep(const MpopSpec& mdp, const GridValueFn& grid, std::span<const Vector> actions,
                 const SweepOptions& options = {})
        : grid_(grid), discount_(mdp.discount) {
        mdp.validate();
        if (actions.empty() && !options.extra_candidates) throw DomainError("empty action list");
        nodes_.resize(grid.size());
        for (std::size_t n = 0; n < grid.size(); ++n) {
            const Vector s = grid.node(n);
            std::vector<Vector> candidates(actions.begin(), actions.end());
            if (options.extra_candidates) {
                for (auto& a : options.extra_candidates(s)) candidates.push_back(std::move(a));
            }
            if (candidates.empty()) throw DomainError("empty candidate list");
            NodeTable& table = nodes_[n];
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                if (!mdp.admissible(s, candidates[i])) continue;
                Step step = checked_step(mdp, s, candidates[i]);
                table.entries.push_back({step.reward, grid.stencil(step.next), i});
                table.actions.push_back(candidates[i]);
            }
            if (table.entries.empty()) {
                if (!options.skip_nodes_without_actions) throw NoAdmissibleAction(s);
                ++inactive_;
            }
        }
    }

    std::size_t size() const { return nodes_.size(); }
    std::size_t inactive_nodes() const { return inactive_; }
    bool active(std::size_t node) const { return !nodes_[node].entries.empty(); }
    double discount() const { return discount_; }
    const GridValueFn& grid() const { return grid_; }

    /// Applies the operator to a value table. Inactive nodes keep their input value.
    std::vector<double> apply(std::span<const double> values, std::vector<std::size_t>* argmax = nullptr) const {
        std::vector<double> out(values.begin(), values.end());
        if (argmax) argmax->assign(nodes_.size(), 0);
        for (std::size_t n = 0; n < nodes_.size(); ++n) {
            const auto& entries = nodes_[n].entries;
            if (entries.empty()) continue;
            double best = -std::numeric_limits<double>::infinity();
            std::size_t best_k = 0;
            for (std::size_t k = 0; k < entries.size(); ++k) {
                const double q = entries[k].reward + discount_ * GridValueFn::apply(entries[k].successor, values);
                if (q > best) {
                    best = q;
                    best_k = k;
                }
            }
            out[n] = best;
            if (argmax) (*argmax)[n] = entries[best_k].candidate;
        }
        return out;
    }

    /// Action chosen at a node for a given argmax candidate index.
    const Vector& action(std::size_t node, std::size_t candidate) const {
        const auto& table = nodes_[node];
        for (std::size_t k = 0; k < table.entries.size(); ++k) {
            if (table.entries[k].candidate == candidate) return table.actions[k];
        }
        throw DomainError("candidate was not admissible at node");
    }

    /// Largest |r| over the tabulated admissible node/action pairs.
    double reward_bound() const {
        double m = 0.0;
        for (const auto& table : nodes_) {
            for (const auto& e : table.entries) m = std::max(m, std::abs(e.reward));
        }
        return m;
    }

private:
    struct Entry {
        double reward;
        Stencil successor;
        std::size_t candidate;
    };
    struct NodeTable {
        std::vector<Entry> entries;
        std::vector<Vector> actions;
    };

    GridValueFn grid_;
    double discount_;
    std::vector<NodeTable> nodes_;
    std::size_t inactive_ = 0;
};

inline double sup_distance(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

namespace detail {

/// Synchronous fixed-point iteration of a grid operator. Stops at residual <= tol.
template <typename Op>
std::pair<GridValueFn, ViDiagnostics> iterate_to_tolerance(const Op& op, const GridValueFn& v0, double discount,
                                                           double tol, std::size_t max_sweeps,
                                                           std::size_t inactive) {
    if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
    ViDiagnostics diag;
    diag.inactive_nodes = inactive;
    std::vector<double> current = v0.values();
    bool converged = false;
    while (diag.sweeps < max_sweeps) {
        std::vector<double> next = op(current);
        const double residual = sup_distance(next, current);
        if (!std::isfinite(residual)) throw NonFiniteValue("value iteration residual");
        current = std::move(next);
        ++diag.sweeps;
        diag.residual_history.push_back(residual);
        diag.final_residual = residual;
        if (residual <= tol) {
            converged = true;
            break;
        }
    }
    diag.error_bound = discount / (1.0 - discount) * diag.final_residual;
    GridValueFn result = v0;
    result.set_values(std::move(current));
    if (!converged) throw NotConverged(std::move(result), std::move(diag));
    return {std::move(result), std::move(diag)};
}

}  // namespace detail

/// Value iteration on the nodes of `v0`'s grid with synchronous sweeps.
inline std::pair<GridValueFn, ViDiagnostics> value_iterate(const MpopSpec& mdp, const GridValueFn& v0,
                                                           std::span<const Vector> actions, double tol,
                                                           std::size_t max_sweeps, const SweepOptions& options = {}) {
    const BellmanSweep sweep(mdp, v0, actions, options);
    return detail::iterate_to_tolerance([&](std::span<const double> v) { return sweep.apply(v); }, v0,
                                        mdp.discount, tol, max_sweeps, sweep.inactive_nodes());
}

/// Value iteration with a prebuilt operator; v0 must live on the operator's grid.
inline std::pair<GridValueFn, ViDiagnostics> value_iterate(const BellmanSweep& sweep, const GridValueFn& v0,
                                                           double tol, std::size_t max_sweeps) {
    if (v0.axes() != sweep.grid().axes()) throw DomainError("initial value does not live on the sweep grid");
    return detail::iterate_to_tolerance([&](std::span<const double> v) { return sweep.apply(v); }, v0,
                                        sweep.discount(), tol, max_sweeps, sweep.inactive_nodes());
}

/// Greedy policy with respect to V over the candidate list.
template <ValueFunction V>
PolicyFn extract_greedy(const MpopSpec& mdp, V value_fn, std::vector<Vector> actions, ExtraCandidatesFn extra = {}) {
    auto shared_value = std::make_shared<const V>(std::move(value_fn));
    auto shared_actions = std::make_shared<const std::vector<Vector>>(std::move(actions));
    return PolicyFn{[mdp, shared_value, shared_actions, extra](const Vector& s) {
                        if (!extra) return bellman_backup(mdp, *shared_value, s, *shared_actions).best_action;
                        std::vector<Vector> candidates = *shared_actions;
                        for (auto& a : extra(s)) candidates.push_back(std::move(a));
                        return bellman_backup(mdp, *shared_value, s, candidates).best_action;
                    },
                    "greedy"};
}

/// Policy evaluation operator T_pi restricted to grid nodes, with cached stencils.
class PolicySweep {
public:
    PolicySweep(const MpopSpec& mdp, const PolicyFn& policy, const GridValueFn& grid) : discount_(mdp.discount) {
        mdp.validate();
        entries_.reserve(grid.size());
        for (std::size_t n = 0; n < grid.size(); ++n) {
            const Vector s = grid.node(n);
            Vector a = policy(s);
            if (!mdp.admissible(s, a)) throw InadmissibleAction(0, s, a);
            Step step = checked_step(mdp, s, a);
            entries_.push_back({step.reward, grid.stencil(step.next)});
        }
    }

    std::vector<double> apply(std::span<const double> values) const {
        std::vector<double> out(entries_.size());
        for (std::size_t n = 0; n < entries_.size(); ++n) {
            out[n] = entries_[n].reward + discount_ * GridValueFn::apply(entries_[n].successor, values);
        }
        return out;
    }

private:
    struct Entry {
        double reward;
        Stencil successor;
    };
    double discount_;
    std::vector<Entry> entries_;
};

/// Grid value of a fixed policy by iterating T_pi to tolerance.
inline std::pair<GridValueFn, ViDiagnostics> evaluate_policy(const MpopSpec& mdp, const PolicyFn& policy,
                                                             const GridValueFn& v0, double tol,
                                                             std::size_t max_sweeps = 100000) {
    const PolicySweep sweep(mdp, policy, v0);
    return detail::iterate_to_tolerance([&](std::span<const double> v) { return sweep.apply(v); }, v0,
                                        mdp.discount, tol, max_sweeps, 0);
}

/// One policy-improvement step: evaluate pi on the grid, then act greedily on that value.
///
/// The current action pi(s) is appended to the candidate list so the greedy
/// step can always keep it; this is what makes the improved value dominate.
inline PolicyFn policy_improve(const MpopSpec& mdp, const PolicyFn& policy, const GridValueFn& grid,
                               std::vector<Vector> actions, double eval_tol, std::size_t max_sweeps = 100000) {
    auto [base_value, diag] = evaluate_policy(mdp, policy, grid, eval_tol, max_sweeps);
    (void)diag;
    PolicyFn current = policy;
    PolicyFn improved =
        extract_greedy(mdp, std::move(base_value), std::move(actions),
                       [current](const Vector& s) { return std::vector<Vector>{current(s)}; });
    improved.label = "improved(" + policy.label + ")";
    return improved;
}

struct NearestAction {
    Vector action;
    double distance;
};

/// Admissible candidate closest to `a` in Euclidean norm; ties go to the lowest index.
inline NearestAction nearest_admissible(const MpopSpec& mdp, const Vector& s, const Vector& a,
                                        std::span<const Vector> candidates) {
    std::optional<NearestAction> best;
    for (const Vector& c : candidates) {
        if (!mdp.admissible(s, c)) continue;
        const double d = (c - a).norm();
        if (!best || d < best->distance) best = NearestAction{c, d};
    }
    if (!best) throw NoAdmissibleAction(s);
    return *best;
}

}  // namespace invdp
