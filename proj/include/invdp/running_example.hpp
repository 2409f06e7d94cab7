#pragma once

#include <cmath>
#include <utility>

#include "invdp/errors.hpp"
#include "invdp/types.hpp"

namespace invdp::running {

// Scalar system f(s,a) = s + tanh(a) on S = A = R, used throughout the tests
// and the `running_example` experiment.

enum class Reward {
    Quadratic,  ///< r(s,a) = -s^2 - tanh(a)^2
    Gaussian,   ///< r(s,a) = exp(-s^2) - tanh(a)^2
};

inline double transition(double s, double a) { return s + std::tanh(a); }

inline double reward(double s, double a, Reward kind = Reward::Quadratic) {
    const double t = std::tanh(a);
    return kind == Reward::Quadratic ? -s * s - t * t : std::exp(-s * s) - t * t;
}

inline MpopSpec make_mdp(double discount, Reward kind = Reward::Quadratic) {
    MpopSpec mdp;
    mdp.state_dim = 1;
    mdp.action_dim = 1;
    mdp.discount = discount;
    mdp.transition = [](const Vector& s, const Vector& a) { return scalar(transition(s[0], a[0])); };
    mdp.reward = [kind](const Vector& s, const Vector& a) { return reward(s[0], a[0], kind); };
    mdp.admissible = [](const Vector&, const Vector&) { return true; };
    mdp.validate();
    return mdp;
}

/// pi_0(s) = -s, which keeps [-1, 1] forward-invariant.
inline PolicyFn negation_policy() {
    return PolicyFn{[](const Vector& s) -> Vector { return -s; }, "negation"};
}

/// Closed-form test of f(s,a) in [-1,1] for s in [-1,1].
inline bool example_admissible(double s, double a) {
    if (!(s >= -1.0 && s <= 1.0)) throw DomainError("state outside [-1, 1]: " + std::to_string(s));
    if (s < 0.0) return a >= std::atanh(-1.0 - s);
    if (s > 0.0) return a <= std::atanh(1.0 - s);
    return true;
}

/// Closed-form C_0(s) with action hull [-1, 1].
inline std::pair<double, double> example_c0_interval(double s) {
    if (!(s >= -1.0 && s <= 1.0)) throw DomainError("state outside [-1, 1]: " + std::to_string(s));
    if (s <= -1.0 - std::tanh(-1.0)) return {std::atanh(-1.0 - s), 1.0};
    if (s >= 1.0 - std::tanh(1.0)) return {-1.0, std::atanh(1.0 - s)};
    return {-1.0, 1.0};
}

}  // namespace invdp::running
