#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "invdp/errors.hpp"

namespace invdp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using TransitionFn = std::function<Vector(const Vector& state, const Vector& action)>;
using RewardFn = std::function<double(const Vector& state, const Vector& action)>;
using AdmissibleFn = std::function<bool(const Vector& state, const Vector& action)>;

/// Deterministic MDP over Euclidean state and action spaces.
///
/// The handles must be safe to call concurrently. Transition and reward only
/// need to be defined on admissible pairs.
struct MpopSpec {
    int state_dim = 1;
    int action_dim = 1;
    TransitionFn transition;
    RewardFn reward;
    AdmissibleFn admissible;
    double discount = 0.0;

    /// Throws DomainError when the discount or dimensions are out of range.
    void validate() const {
        if (state_dim < 1 || action_dim < 1) throw DomainError("MpopSpec dimensions must be positive");
        if (!(discount >= 0.0 && discount < 1.0)) {
            throw DomainError("discount must lie in [0, 1), got " + std::to_string(discount));
        }
        if (!transition || !reward || !admissible) throw DomainError("MpopSpec has an empty handle");
    }
};

struct PolicyFn {
    std::function<Vector(const Vector& state)> act;
    std::string label;

    Vector operator()(const Vector& state) const { return act(state); }
};

/// Axis-aligned box, closed on both sides.
struct Box {
    Vector lo;
    Vector hi;

    Box() = default;
    Box(Vector lo_, Vector hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
        if (lo.size() != hi.size()) throw DomainError("Box bounds have different dimensions");
        for (Eigen::Index i = 0; i < lo.size(); ++i) {
            if (!(lo[i] <= hi[i])) throw DomainError("Box requires lo <= hi componentwise");
        }
    }

    int dim() const { return static_cast<int>(lo.size()); }

    bool contains(const Vector& x) const {
        if (x.size() != lo.size()) return false;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            if (!(x[i] >= lo[i] && x[i] <= hi[i])) return false;
        }
        return true;
    }

    /// Euclidean distance from x to the box; zero inside.
    double distance(const Vector& x) const {
        double sq = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            double d = 0.0;
            if (x[i] < lo[i]) d = lo[i] - x[i];
            else if (x[i] > hi[i]) d = x[i] - hi[i];
            sq += d * d;
        }
        return std::sqrt(sq);
    }

    Vector project(const Vector& x) const { return x.cwiseMax(lo).cwiseMin(hi); }
};

inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline Vector scalar(double x) {
    Vector v(1);
    v[0] = x;
    return v;
}

}  // namespace invdp
