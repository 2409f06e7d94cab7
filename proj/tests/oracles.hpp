#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the library's solvers.

#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "invdp/models.hpp"
#include "invdp/tabular.hpp"

namespace oracle {

/// Dense Gaussian elimination with partial pivoting.
inline std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double sum = b[i];
        for (std::size_t c = i + 1; c < n; ++c) sum -= a[i][c] * x[c];
        x[i] = sum / a[i][i];
    }
    return x;
}

/// Value of a deterministic stationary policy from the closed-loop linear recursion.
inline std::vector<double> closed_loop_value(const invdp::tabular::TabularMdp& tab, const std::vector<std::size_t>& pi) {
    const std::size_t n = tab.states;
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    std::vector<double> b(n);
    for (std::size_t s = 0; s < n; ++s) {
        a[s][s] += 1.0;
        a[s][tab.next[s][pi[s]]] -= tab.discount;
        b[s] = tab.reward[s][pi[s]];
    }
    return solve(a, b);
}

struct Enumeration {
    std::vector<double> values;
    std::vector<std::vector<std::size_t>> all_policies;
    std::vector<std::vector<double>> all_values;
};

/// Every deterministic stationary policy and its exact value.
inline Enumeration enumerate(const invdp::tabular::TabularMdp& tab) {
    Enumeration out;
    out.values.assign(tab.states, -std::numeric_limits<double>::infinity());
    std::size_t total = 1;
    for (std::size_t s = 0; s < tab.states; ++s) total *= tab.actions;
    for (std::size_t code = 0; code < total; ++code) {
        std::vector<std::size_t> pi(tab.states);
        std::size_t rest = code;
        for (std::size_t s = 0; s < tab.states; ++s) {
            pi[s] = rest % tab.actions;
            rest /= tab.actions;
        }
        auto v = closed_loop_value(tab, pi);
        for (std::size_t s = 0; s < tab.states; ++s) out.values[s] = std::max(out.values[s], v[s]);
        out.all_policies.push_back(std::move(pi));
        out.all_values.push_back(std::move(v));
    }
    return out;
}

/// Hand-derived Christoffel-form Coriolis matrix of the two-link arm.
inline invdp::Matrix two_link_coriolis(const invdp::models::TwoLinkParams& p, const invdp::Vector& q,
                                       const invdp::Vector& qdot) {
    const double h = -p.m2 * p.l1 * p.lc2 * std::sin(q[1]);
    invdp::Matrix c(2, 2);
    c << h * qdot[1], h * (qdot[0] + qdot[1]), -h * qdot[0], 0.0;
    return c;
}

/// Analytic dD/dq for the two-link arm.
inline std::vector<invdp::Matrix> two_link_inertia_jacobian(const invdp::models::TwoLinkParams& p,
                                                            const invdp::Vector& q) {
    const double h = -p.m2 * p.l1 * p.lc2 * std::sin(q[1]);
    invdp::Matrix d2(2, 2);
    d2 << 2.0 * h, h, h, 0.0;
    return {invdp::Matrix::Zero(2, 2), d2};
}

}  // namespace oracle
