#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "invdp/grid.hpp"
#include "invdp/mdp_core.hpp"
#include "invdp/types.hpp"

namespace invdp::tabular {

/// Finite deterministic MDP with integer states and actions.
struct TabularMdp {
    std::size_t states = 0;
    std::size_t actions = 0;
    double discount = 0.0;
    std::vector<std::vector<std::size_t>> next;  // [state][action]
    std::vector<std::vector<double>> reward;     // [state][action]
};

inline TabularMdp random_mdp(std::size_t states, std::size_t actions, double discount, std::uint64_t seed) {
    if (states < 2) throw DomainError("tabular MDPs need at least two states for the grid encoding");
    if (actions < 1) throw DomainError("tabular MDPs need at least one action");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, states - 1);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    TabularMdp out{states, actions, discount, {}, {}};
    out.next.assign(states, std::vector<std::size_t>(actions));
    out.reward.assign(states, std::vector<double>(actions));
    for (std::size_t s = 0; s < states; ++s) {
        for (std::size_t a = 0; a < actions; ++a) {
            out.next[s][a] = pick(rng);
            out.reward[s][a] = unit(rng);
        }
    }
    return out;
}

/// Encodes states and actions as the reals 0, 1, 2, ...; transitions land on grid nodes.
inline MpopSpec to_mpop(const TabularMdp& tab) {
    MpopSpec mdp;
    mdp.discount = tab.discount;
    auto index = [](double x, std::size_t limit) -> std::ptrdiff_t {
        const double r = std::round(x);
        if (r != x || r < 0.0 || r >= static_cast<double>(limit)) return -1;
        return static_cast<std::ptrdiff_t>(r);
    };
    mdp.transition = [tab, index](const Vector& s, const Vector& a) {
        return scalar(static_cast<double>(
            tab.next[static_cast<std::size_t>(index(s[0], tab.states))][static_cast<std::size_t>(index(a[0], tab.actions))]));
    };
    mdp.reward = [tab, index](const Vector& s, const Vector& a) {
        return tab.reward[static_cast<std::size_t>(index(s[0], tab.states))]
                         [static_cast<std::size_t>(index(a[0], tab.actions))];
    };
    mdp.admissible = [tab, index](const Vector& s, const Vector& a) {
        return index(s[0], tab.states) >= 0 && index(a[0], tab.actions) >= 0;
    };
    mdp.validate();
    return mdp;
}

inline GridValueFn state_grid(const TabularMdp& tab, double fill = 0.0) {
    std::vector<double> axis(tab.states);
    for (std::size_t s = 0; s < tab.states; ++s) axis[s] = static_cast<double>(s);
    return GridValueFn({axis}, fill, OutOfRange::Error);
}

inline std::vector<Vector> action_list(const TabularMdp& tab) {
    std::vector<Vector> out;
    for (std::size_t a = 0; a < tab.actions; ++a) out.push_back(scalar(static_cast<double>(a)));
    return out;
}

/// Exact value of a stationary deterministic policy: (I - gamma P) V = r.
inline std::vector<double> policy_value(const TabularMdp& tab, const std::vector<std::size_t>& policy) {
    const auto n = static_cast<Eigen::Index>(tab.states);
    Matrix lhs = Matrix::Identity(n, n);
    Vector rhs(n);
    for (std::size_t s = 0; s < tab.states; ++s) {
        const auto i = static_cast<Eigen::Index>(s);
        lhs(i, static_cast<Eigen::Index>(tab.next[s][policy[s]])) -= tab.discount;
        rhs[i] = tab.reward[s][policy[s]];
    }
    const Vector v = lhs.partialPivLu().solve(rhs);
    return {v.data(), v.data() + v.size()};
}

struct EnumerationResult {
    std::vector<double> optimal_values;
    std::vector<std::size_t> optimal_policy;
    std::size_t policies_checked = 0;
};

/// Optimal values by evaluating every one of actions^states deterministic policies.
inline EnumerationResult enumerate_policies(const TabularMdp& tab) {
    EnumerationResult out;
    out.optimal_values.assign(tab.states, -std::numeric_limits<double>::infinity());
    std::vector<std::size_t> policy(tab.states, 0);
    double best_total = -std::numeric_limits<double>::infinity();
    while (true) {
        const auto v = policy_value(tab, policy);
        ++out.policies_checked;
        double total = 0.0;
        for (std::size_t s = 0; s < tab.states; ++s) {
            out.optimal_values[s] = std::max(out.optimal_values[s], v[s]);
            total += v[s];
        }
        if (total > best_total) {
            best_total = total;
            out.optimal_policy = policy;
        }
        std::size_t digit = 0;
        while (digit < tab.states && ++policy[digit] == tab.actions) policy[digit++] = 0;
        if (digit == tab.states) break;
    }
    return out;
}

}  // namespace invdp::tabular
