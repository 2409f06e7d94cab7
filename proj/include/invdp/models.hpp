#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "invdp/robotics.hpp"

namespace invdp::models {

struct PendulumParams {
    double mass = 1.0;
    double length = 1.0;
    double gravity = 9.81;
    double damping = 0.0;
};

/// Point-mass pendulum, q measured from the downward vertical.
inline RoboticSystem pendulum(const PendulumParams& p = {}) {
    RoboticSystem sys;
    sys.dof = 1;
    sys.inputs = 1;
    const double inertia = p.mass * p.length * p.length;
    sys.inertia = [inertia](const Vector&) { return Matrix::Constant(1, 1, inertia); };
    sys.inertia_jacobian = [](const Vector&) { return std::vector<Matrix>{Matrix::Zero(1, 1)}; };
    sys.potential_gradient = [p](const Vector& q) { return scalar(p.mass * p.gravity * p.length * std::sin(q[0])); };
    sys.potential = [p](const Vector& q) { return -p.mass * p.gravity * p.length * std::cos(q[0]); };
    sys.external_force = [p](const Vector&, const Vector& qdot) -> Vector { return -p.damping * qdot; };
    sys.actuation = [](const Vector&) { return Matrix::Identity(1, 1); };
    sys.lambda_min = inertia;
    return sys;
}

/// Unit masses on n independent axes: D = I, U = 0, B = I.
inline RoboticSystem double_integrator(int n = 1) {
    RoboticSystem sys;
    sys.dof = n;
    sys.inputs = n;
    sys.inertia = [n](const Vector&) { return Matrix::Identity(n, n); };
    sys.inertia_jacobian = [n](const Vector&) { return std::vector<Matrix>(n, Matrix::Zero(n, n)); };
    sys.potential_gradient = [n](const Vector&) { return Vector::Zero(n); };
    sys.potential = [](const Vector&) { return 0.0; };
    sys.external_force = [n](const Vector&, const Vector&) { return Vector::Zero(n); };
    sys.actuation = [n](const Vector&) { return Matrix::Identity(n, n); };
    sys.lambda_min = 1.0;
    return sys;
}

struct TwoLinkParams {
    double m1 = 1.0;
    double m2 = 1.0;
    double l1 = 1.0;
    double l2 = 1.0;
    double lc1 = 0.5;
    double lc2 = 0.5;
    double i1 = 1.0 / 12.0;
    double i2 = 1.0 / 12.0;
    double gravity = 9.81;
};

inline Matrix two_link_inertia(const TwoLinkParams& p, const Vector& q) {
    const double c2 = std::cos(q[1]);
    Matrix d(2, 2);
    d(0, 0) = p.m1 * p.lc1 * p.lc1 + p.m2 * (p.l1 * p.l1 + p.lc2 * p.lc2 + 2.0 * p.l1 * p.lc2 * c2) + p.i1 + p.i2;
    d(0, 1) = p.m2 * (p.lc2 * p.lc2 + p.l1 * p.lc2 * c2) + p.i2;
    d(1, 0) = d(0, 1);
    d(1, 1) = p.m2 * p.lc2 * p.lc2 + p.i2;
    return d;
}

/// Planar two-link arm with joint angles measured from the horizontal.
/// The inertia Jacobian is left to finite differences.
inline RoboticSystem two_link_arm(const TwoLinkParams& p = {}) {
    RoboticSystem sys;
    sys.dof = 2;
    sys.inputs = 2;
    sys.inertia = [p](const Vector& q) { return two_link_inertia(p, q); };
    sys.potential_gradient = [p](const Vector& q) {
        Vector g(2);
        g[0] = (p.m1 * p.lc1 + p.m2 * p.l1) * p.gravity * std::cos(q[0]) + p.m2 * p.lc2 * p.gravity * std::cos(q[0] + q[1]);
        g[1] = p.m2 * p.lc2 * p.gravity * std::cos(q[0] + q[1]);
        return g;
    };
    sys.potential = [p](const Vector& q) {
        return (p.m1 * p.lc1 + p.m2 * p.l1) * p.gravity * std::sin(q[0]) + p.m2 * p.lc2 * p.gravity * std::sin(q[0] + q[1]);
    };
    sys.external_force = [](const Vector&, const Vector&) { return Vector::Zero(2); };
    sys.actuation = [](const Vector&) { return Matrix::Identity(2, 2); };
    // D is affine in cos(q2), so its smallest eigenvalue is concave in cos(q2)
    // and the minimum over q sits at cos(q2) = +-1.
    double lam = std::numeric_limits<double>::infinity();
    for (double q2 : {0.0, M_PI}) {
        Vector q(2);
        q << 0.0, q2;
        lam = std::min(lam, two_link_inertia(p, q).selfadjointView<Eigen::Lower>().eigenvalues().minCoeff());
    }
    sys.lambda_min = lam;
    return sys;
}

}  // namespace invdp::models
