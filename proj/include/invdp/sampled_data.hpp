#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "invdp/errors.hpp"
#include "invdp/types.hpp"

namespace invdp {

/// dx/dt = drift(x) + input_matrix(x) u.
struct ControlAffineSystem {
    int state_dim = 1;
    int input_dim = 1;
    std::function<Vector(const Vector&)> drift;
    std::function<Matrix(const Vector&)> input_matrix;
    /// Optional single-pass evaluation of drift(x) + input_matrix(x) u.
    std::function<Vector(const Vector&, const Vector&)> field = {};

    Vector vector_field(const Vector& x, const Vector& u) const {
        if (field) return field(x, u);
        return drift(x) + input_matrix(x) * u;
    }
};

struct ZohConfig {
    double sample_period = 0.01;
    int substeps = 20;

    void validate() const {
        if (!(sample_period > 0.0) || !std::isfinite(sample_period)) throw DomainError("sample period must be > 0");
        if (substeps < 1) throw DomainError("substeps must be >= 1");
    }
};

struct LinearSystem {
    Matrix A;
    Matrix B;

    void validate() const {
        if (A.rows() != A.cols()) throw DomainError("A must be square");
        if (B.rows() != A.rows()) throw DomainError("B must have as many rows as A");
    }

    ControlAffineSystem as_control_affine() const {
        validate();
        return ControlAffineSystem{static_cast<int>(A.rows()), static_cast<int>(B.cols()),
                                   [A = A](const Vector& x) -> Vector { return A * x; },
                                   [B = B](const Vector&) -> Matrix { return B; },
                                   [A = A, B = B](const Vector& x, const Vector& u) -> Vector { return A * x + B * u; }};
    }
};

namespace detail {

inline void require_finite_state(const Vector& x, int step) {
    if (!x.allFinite()) {
        throw NonFiniteState("integration produced a non-finite state at substep " + std::to_string(step));
    }
}

}  // namespace detail

/// Classical RK4 with the input held constant over one sample period.
inline Vector integrate_zoh(const ControlAffineSystem& sys, const Vector& x, const Vector& u, const ZohConfig& cfg) {
    cfg.validate();
    if (!x.allFinite() || !u.allFinite()) throw NonFiniteState("non-finite initial state or input");
    const double dt = cfg.sample_period / cfg.substeps;
    Vector state = x;
    for (int i = 0; i < cfg.substeps; ++i) {
        const Vector k1 = sys.vector_field(state, u);
        const Vector k2 = sys.vector_field(state + 0.5 * dt * k1, u);
        const Vector k3 = sys.vector_field(state + 0.5 * dt * k2, u);
        const Vector k4 = sys.vector_field(state + dt * k3, u);
        state += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        detail::require_finite_state(state, i);
    }
    return state;
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
inline Matrix expm(const Matrix& m) {
    if (m.rows() != m.cols()) throw DomainError("expm needs a square matrix");
    const Eigen::Index n = m.rows();
    const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    const Matrix scaled = m / std::ldexp(1.0, squarings);
    Matrix sum = Matrix::Identity(n, n);
    Matrix term = Matrix::Identity(n, n);
    for (int k = 1; k < 64; ++k) {
        term = term * scaled / static_cast<double>(k);
        sum += term;
        if (term.cwiseAbs().maxCoeff() <= 1e-14 * std::max(1.0, sum.cwiseAbs().maxCoeff())) break;
    }
    for (int i = 0; i < squarings; ++i) sum = sum * sum;
    return sum;
}

/// Discrete (Ad, Bd) pair for sample period h, from exp([[A, B], [0, 0]] h).
inline std::pair<Matrix, Matrix> discretize_zoh(const LinearSystem& sys, double h) {
    sys.validate();
    const Eigen::Index d = sys.A.rows();
    const Eigen::Index m = sys.B.cols();
    Matrix aug = Matrix::Zero(d + m, d + m);
    aug.topLeftCorner(d, d) = sys.A;
    aug.topRightCorner(d, m) = sys.B;
    const Matrix e = expm(aug * h);
    return {e.topLeftCorner(d, d), e.topRightCorner(d, m)};
}

inline Vector linear_zoh_exact(const LinearSystem& sys, const Vector& x, const Vector& u, double h) {
    const auto [ad, bd] = discretize_zoh(sys, h);
    return ad * x + bd * u;
}

/// MDP whose transition is one ZOH sample period and whose actions are confined to a box.
inline MpopSpec make_sampled_mpop(ControlAffineSystem sys, RewardFn reward, double discount, ZohConfig cfg,
                                  Box action_box) {
    cfg.validate();
    if (action_box.dim() != sys.input_dim) throw DomainError("action box dimension does not match input dimension");
    MpopSpec mdp;
    mdp.state_dim = sys.state_dim;
    mdp.action_dim = sys.input_dim;
    mdp.discount = discount;
    mdp.transition = [sys = std::move(sys), cfg](const Vector& x, const Vector& u) {
        return integrate_zoh(sys, x, u, cfg);
    };
    mdp.reward = std::move(reward);
    mdp.admissible = [box = std::move(action_box)](const Vector&, const Vector& u) { return box.contains(u); };
    mdp.validate();
    return mdp;
}

}  // namespace invdp
