#pragma once

#include "invdp/approx.hpp"
#include "invdp/restriction.hpp"
#include "invdp/running_example.hpp"

namespace fixtures {

inline invdp::RestrictedMpop restricted_running_example(double gamma, std::uint64_t seed = 1,
                                                        invdp::running::Reward reward = invdp::running::Reward::Quadratic) {
    using namespace invdp;
    const CompactSet s0(Box(scalar(-1.0), scalar(1.0)));
    std::vector<PolicyFn> policies{running::negation_policy()};
    const Box hull = build_action_hull(policies, s0, 2000, seed, 0.01);
    return restrict(running::make_mdp(gamma, reward), s0, policies, hull);
}

inline invdp::GridValueFn running_state_grid(std::size_t nodes, double fill = 0.0) {
    return invdp::GridValueFn({invdp::linspace(-1.0, 1.0, nodes)}, fill);
}

inline invdp::ActionGrid running_action_grid(const invdp::RestrictedMpop& r, std::size_t nodes) {
    // Symmetric nodes on [-1, 1] so that 0 is a candidate; the hull covers [-1, 1].
    return invdp::ActionGrid(r.action_hull, std::vector<std::vector<double>>{invdp::linspace(-1.0, 1.0, nodes)});
}

}  // namespace fixtures
