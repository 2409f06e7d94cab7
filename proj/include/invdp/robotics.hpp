#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "invdp/errors.hpp"
#include "invdp/mdp_core.hpp"
#include "invdp/restriction.hpp"
#include "invdp/sampled_data.hpp"
#include "invdp/types.hpp"

namespace invdp {

/// Fully actuated or underactuated mechanical system D(q) q'' + C(q,q') q' + grad U(q) = F_ext + B(q) u.
///
/// States are stacked as x = (q, q').
struct RoboticSystem {
    int dof = 1;
    int inputs = 1;
    std::function<Matrix(const Vector& q)> inertia;
    /// Optional: element k is dD/dq_k. Central differences are used when empty.
    std::function<std::vector<Matrix>(const Vector& q)> inertia_jacobian;
    std::function<Vector(const Vector& q)> potential_gradient;
    std::function<Vector(const Vector& q, const Vector& qdot)> external_force;
    std::function<Matrix(const Vector& q)> actuation;
    /// Optional potential energy, only used for energy diagnostics.
    std::function<double(const Vector& q)> potential;
    double lambda_min = 1.0;
    double fd_step = 1e-6;

    int state_dim() const { return 2 * dof; }
    Vector configuration(const Vector& x) const { return x.head(dof); }
    Vector velocity(const Vector& x) const { return x.tail(dof); }
};

inline std::vector<Matrix> inertia_derivatives(const RoboticSystem& sys, const Vector& q) {
    if (sys.inertia_jacobian) return sys.inertia_jacobian(q);
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(sys.dof));
    for (int k = 0; k < sys.dof; ++k) {
        Vector plus = q, minus = q;
        plus[k] += sys.fd_step;
        minus[k] -= sys.fd_step;
        out.push_back((sys.inertia(plus) - sys.inertia(minus)) / (2.0 * sys.fd_step));
    }
    return out;
}

/// Coriolis matrix in Christoffel form,
/// C_ij = sum_k 1/2 (dD_ij/dq_k + dD_ik/dq_j - dD_jk/dq_i) qdot_k.
inline Matrix coriolis(const RoboticSystem& sys, const Vector& q, const Vector& qdot) {
    const auto dD = inertia_derivatives(sys, q);
    const int n = sys.dof;
    Matrix c = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double sum = 0.0;
            for (int k = 0; k < n; ++k) {
                sum += 0.5 * (dD[k](i, j) + dD[j](i, k) - dD[i](j, k)) * qdot[k];
            }
            c(i, j) = sum;
        }
    }
    return c;
}

/// dD/dt along the velocity: sum_k dD/dq_k qdot_k.
inline Matrix inertia_rate(const RoboticSystem& sys, const Vector& q, const Vector& qdot) {
    const auto dD = inertia_derivatives(sys, q);
    Matrix out = Matrix::Zero(sys.dof, sys.dof);
    for (int k = 0; k < sys.dof; ++k) out += dD[k] * qdot[k];
    return out;
}

namespace detail {

inline Eigen::LLT<Matrix> factor_inertia(const Matrix& d) {
    Eigen::LLT<Matrix> llt(d);
    if (llt.info() != Eigen::Success) throw InertiaNotPD("inertia matrix is not positive definite");
    return llt;
}

}  // namespace detail

/// State derivative (q', D^-1 (F_ext - C q' - grad U + B u)).
inline Vector dynamics(const RoboticSystem& sys, const Vector& x, const Vector& u) {
    const Vector q = sys.configuration(x);
    const Vector qdot = sys.velocity(x);
    const auto llt = detail::factor_inertia(sys.inertia(q));
    const Vector force = sys.external_force(q, qdot) - coriolis(sys, q, qdot) * qdot - sys.potential_gradient(q) +
                         sys.actuation(q) * u;
    Vector out(sys.state_dim());
    out << qdot, llt.solve(force);
    return out;
}

inline ControlAffineSystem as_control_affine(const RoboticSystem& sys) {
    const int n = sys.dof;
    return ControlAffineSystem{
        sys.state_dim(), sys.inputs,
        [sys](const Vector& x) -> Vector {
            const Vector q = sys.configuration(x);
            const Vector qdot = sys.velocity(x);
            const auto llt = detail::factor_inertia(sys.inertia(q));
            Vector out(sys.state_dim());
            out << qdot,
                llt.solve(sys.external_force(q, qdot) - coriolis(sys, q, qdot) * qdot - sys.potential_gradient(q));
            return out;
        },
        [sys, n](const Vector& x) -> Matrix {
            const Vector q = sys.configuration(x);
            const auto llt = detail::factor_inertia(sys.inertia(q));
            Matrix g = Matrix::Zero(2 * n, sys.inputs);
            g.bottomRows(n) = llt.solve(sys.actuation(q));
            return g;
        },
        [sys](const Vector& x, const Vector& u) -> Vector { return dynamics(sys, x, u); }};
}

inline double kinetic_energy(const RoboticSystem& sys, const Vector& x) {
    const Vector qdot = sys.velocity(x);
    return 0.5 * qdot.dot(sys.inertia(sys.configuration(x)) * qdot);
}

inline double total_energy(const RoboticSystem& sys, const Vector& x) {
    if (!sys.potential) throw DomainError("system has no potential energy handle");
    return kinetic_energy(sys, x) + sys.potential(sys.configuration(x));
}

/// k_fbl(x, v) = B(q)^-1 (C q' + grad U - F_ext + D v); requires a square, invertible B.
inline Vector fbl_controller(const RoboticSystem& sys, const Vector& x, const Vector& v) {
    if (sys.dof != sys.inputs) throw ActuationSingular("feedback linearization needs as many inputs as degrees of freedom");
    const Vector q = sys.configuration(x);
    const Vector qdot = sys.velocity(x);
    const Vector rhs = coriolis(sys, q, qdot) * qdot + sys.potential_gradient(q) - sys.external_force(q, qdot) +
                       sys.inertia(q) * v;
    const Matrix b = sys.actuation(q);
    Eigen::PartialPivLU<Matrix> lu(b);
    if (!(std::abs(lu.determinant()) > 0.0) || lu.rcond() < 1e-12) {
        throw ActuationSingular("actuation matrix is numerically singular");
    }
    return lu.solve(rhs);
}

/// Characteristic polynomial coefficients c_0..c_d (monic, c_d = 1) by Faddeev-LeVerrier.
inline std::vector<double> characteristic_polynomial(const Matrix& m) {
    if (m.rows() != m.cols()) throw DomainError("characteristic polynomial needs a square matrix");
    const Eigen::Index d = m.rows();
    std::vector<double> c(static_cast<std::size_t>(d) + 1, 0.0);
    c[static_cast<std::size_t>(d)] = 1.0;
    Matrix mk = Matrix::Zero(d, d);
    const Matrix id = Matrix::Identity(d, d);
    for (Eigen::Index k = 1; k <= d; ++k) {
        mk = m * mk + c[static_cast<std::size_t>(d - k + 1)] * id;
        c[static_cast<std::size_t>(d - k)] = -(m * mk).trace() / static_cast<double>(k);
    }
    return c;
}

/// Routh-Hurwitz test on the characteristic polynomial. Vanishing or sign-ambiguous
/// pivots (|pivot| <= 1e-12 relative to the largest coefficient) count as unstable.
inline bool is_hurwitz(const Matrix& m) {
    const auto c = characteristic_polynomial(m);
    const std::size_t degree = c.size() - 1;
    if (degree == 0) return true;
    std::vector<double> a(c.rbegin(), c.rend());  // descending powers, a[0] = 1
    double scale = 1.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    const double tol = 1e-12 * scale;

    const std::size_t width = degree / 2 + 1;
    std::vector<double> prev(width, 0.0), curr(width, 0.0);
    for (std::size_t i = 0; i <= degree; i += 2) prev[i / 2] = a[i];
    for (std::size_t i = 1; i <= degree; i += 2) curr[i / 2] = a[i];
    if (!(prev[0] > tol)) return false;
    for (std::size_t row = 1; row <= degree; ++row) {
        if (!(curr[0] > tol)) return false;
        std::vector<double> next(width, 0.0);
        for (std::size_t j = 0; j + 1 < width; ++j) {
            next[j] = (curr[0] * prev[j + 1] - prev[0] * curr[j + 1]) / curr[0];
        }
        prev = std::move(curr);
        curr = std::move(next);
    }
    return true;
}

/// Gain, coordinates and linear target for a feedback-linearizing stabilizer.
struct StabilizerSpec {
    Matrix K;
    std::function<Vector(const Vector&)> phi = [](const Vector& x) { return x; };
    Matrix A;
    Matrix B_lin;

    Matrix closed_loop() const { return A - B_lin * K; }

    /// Double-integrator target (A, B) = ([[0, I], [0, 0]], [0; I]) for n degrees of freedom.
    static StabilizerSpec double_integrator(int n, const Matrix& gain) {
        StabilizerSpec spec;
        spec.K = gain;
        spec.A = Matrix::Zero(2 * n, 2 * n);
        spec.A.topRightCorner(n, n) = Matrix::Identity(n, n);
        spec.B_lin = Matrix::Zero(2 * n, n);
        spec.B_lin.bottomRows(n) = Matrix::Identity(n, n);
        return spec;
    }
};

/// x -> k_fbl(x, -K phi(x)).
inline PolicyFn stabilizing_policy(const RoboticSystem& sys, const StabilizerSpec& spec) {
    if (spec.A.rows() != spec.A.cols() || spec.B_lin.rows() != spec.A.rows() || spec.K.rows() != spec.B_lin.cols() ||
        spec.K.cols() != spec.A.rows()) {
        throw DomainError("stabilizer dimensions are inconsistent");
    }
    if (!is_hurwitz(spec.closed_loop())) throw NotHurwitz("A - B K is not Hurwitz");
    return PolicyFn{[sys, spec](const Vector& x) -> Vector { return fbl_controller(sys, x, -spec.K * spec.phi(x)); },
                    "feedback_linearizing_stabilizer"};
}

struct TimedState {
    double time;
    Vector state;
};

struct EnergyBoundReport {
    std::vector<std::size_t> violations;
    /// max over samples of |q'(t)| / bound(t); 0 when both are 0.
    double max_ratio = 0.0;

    bool passed() const { return violations.empty(); }
};

/// Checks |q'(t)|_2 <= (sqrt(2 T_0 / lambda_min) + c0 t / lambda_min) exp(c1 t / lambda_min)
/// along a trajectory, with t measured from the first sample.
inline EnergyBoundReport energy_bound_check(const RoboticSystem& sys, const std::vector<TimedState>& trajectory,
                                            double c0, double c1) {
    if (!(c0 >= 0.0) || !(c1 > 0.0)) throw DomainError("energy bound needs c0 >= 0 and c1 > 0");
    EnergyBoundReport report;
    if (trajectory.empty()) return report;
    const double t0 = trajectory.front().time;
    const double kinetic0 = kinetic_energy(sys, trajectory.front().state);
    const double lam = sys.lambda_min;
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        if (i > 0 && trajectory[i].time < trajectory[i - 1].time) throw DomainError("trajectory is not time-ordered");
        const double t = trajectory[i].time - t0;
        const double bound = (std::sqrt(2.0 * kinetic0 / lam) + c0 * t / lam) * std::exp(c1 * t / lam);
        const double speed = sys.velocity(trajectory[i].state).norm();
        if (speed > bound + 1e-9) report.violations.push_back(i);
        if (bound > 0.0) report.max_ratio = std::max(report.max_ratio, speed / bound);
        else if (speed > 0.0) report.max_ratio = std::numeric_limits<double>::infinity();
    }
    return report;
}

/// Fattened sample of the states reachable from `initial` under the policy.
inline CompactSet reachable_closure(const MpopSpec& mdp, const PolicyFn& policy, const Box& initial,
                                    std::size_t steps, std::size_t sample_count, double margin,
                                    std::uint64_t rng_seed) {
    if (steps < 1 || sample_count < 1) throw DomainError("steps and sample_count must be >= 1");
    if (!(margin >= 0.0)) throw DomainError("margin must be >= 0");
    Rng rng(rng_seed);
    const auto starts = sample_members(CompactSet(initial), sample_count, rng);
    std::vector<Vector> points;
    points.reserve(sample_count * (steps + 1));
    for (const auto& start : starts) {
        auto states = rollout_states(mdp, policy, start, steps);
        for (auto& s : states) points.push_back(std::move(s));
    }
    return CompactSet(SampledClosure(std::move(points), margin));
}

}  // namespace invdp
