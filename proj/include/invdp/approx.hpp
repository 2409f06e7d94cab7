#pragma once

#include <cstdio>
#include <functional>
#include <ostream>
#include <random>
#include <string>
#include <utility>

#include "invdp/grid.hpp"
#include "invdp/mdp_core.hpp"
#include "invdp/restriction.hpp"

namespace invdp {

/// value_iterate over the flattened action grid.
inline std::pair<GridValueFn, ViDiagnostics> vi_on_grid(const MpopSpec& mdp, const GridValueFn& initial,
                                                        const ActionGrid& actions, double tol, std::size_t max_sweeps,
                                                        const SweepOptions& options = {}) {
    return value_iterate(mdp, initial, actions.actions(), tol, max_sweeps, options);
}

/// Number of failures before the first success with success probability 1 - gamma.
inline std::size_t sample_geometric_horizon(double gamma, Rng& rng) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw DomainError("discount must lie in [0, 1)");
    if (gamma == 0.0) return 0;
    std::geometric_distribution<std::size_t> horizon(1.0 - gamma);
    return horizon(rng);
}

using InitialSampler = std::function<Vector(Rng&)>;

struct DiscountedSample {
    Vector state;
    std::size_t horizon;
};

inline DiscountedSample sample_discounted_state_with_horizon(const MpopSpec& mdp, const PolicyFn& policy,
                                                             const InitialSampler& initial, double gamma, Rng& rng) {
    Vector s = initial(rng);
    const std::size_t horizon = sample_geometric_horizon(gamma, rng);
    auto states = rollout_states(mdp, policy, s, horizon);
    return {std::move(states.back()), horizon};
}

/// Draw from the discounted state distribution of the policy.
inline Vector sample_discounted_state(const MpopSpec& mdp, const PolicyFn& policy, const InitialSampler& initial,
                                      double gamma, Rng& rng) {
    return sample_discounted_state_with_horizon(mdp, policy, initial, gamma, rng).state;
}

/// Round-trip decimal rendering used for every emitted number.
inline std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// One row per node: node coordinates x0..x{d-1}, then the value.
inline void write_grid_csv(std::ostream& out, const GridValueFn& v) {
    for (int d = 0; d < v.dim(); ++d) out << 'x' << d << ',';
    out << "value\n";
    for (std::size_t n = 0; n < v.size(); ++n) {
        const Vector x = v.node(n);
        for (int d = 0; d < v.dim(); ++d) out << format_number(x[d]) << ',';
        out << format_number(v[n]) << '\n';
    }
}

}  // namespace invdp
