#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "invdp/approx.hpp"
#include "invdp/tabular.hpp"
#include "oracles.hpp"

using namespace invdp;

namespace {

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double best = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        best = std::max(best, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return best;
}

MpopSpec frozen_line() {
    MpopSpec mdp;
    mdp.transition = [](const Vector& s, const Vector&) { return s; };
    mdp.reward = [](const Vector&, const Vector&) { return 0.0; };
    mdp.admissible = [](const Vector&, const Vector&) { return true; };
    mdp.discount = 0.9;
    return mdp;
}

const PolicyFn zero_policy{[](const Vector&) { return scalar(0.0); }, "zero"};

}  // namespace

TEST(ViOnGrid, ZeroRewardConvergesInOneSweep) {
    const auto mdp = frozen_line();
    const ActionGrid actions(Box(scalar(-1.0), scalar(1.0)), std::vector<std::size_t>{3});
    const auto [v, diag] = vi_on_grid(mdp, GridValueFn({linspace(-1.0, 1.0, 5)}), actions, 1e-12, 10);
    EXPECT_EQ(diag.sweeps, 1u);
    for (double x : v.values()) EXPECT_EQ(x, 0.0);
}

TEST(ViOnGrid, RunningExampleResidualsContract) {
    const auto r = fixtures::restricted_running_example(0.9);
    const auto [v, diag] =
        vi_on_grid(r.mdp(), fixtures::running_state_grid(201), fixtures::running_action_grid(r, 201), 1e-8, 10000);
    EXPECT_LE(diag.final_residual, 1e-8);
    ASSERT_GE(diag.residual_history.size(), 2u);
    for (std::size_t n = 1; n < diag.residual_history.size(); ++n) {
        EXPECT_LE(diag.residual_history[n], 0.9 * diag.residual_history[n - 1] + 1e-12) << "sweep " << n;
    }
    // The optimum of -s^2 - tanh^2 a is 0 at the origin with a = 0.
    EXPECT_NEAR(grid_eval(v, scalar(0.0)), 0.0, 1e-7);
    for (double x : v.values()) EXPECT_LE(x, 1e-12);
}

TEST(ViOnGrid, TabularGridMatchesEnumeration) {
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        const auto tab = tabular::random_mdp(5, 2, 0.5, seed);
        const auto expected = oracle::enumerate(tab);
        const ActionGrid actions(Box(scalar(0.0), scalar(1.0)), std::vector<std::vector<double>>{{0.0, 1.0}});
        const auto [v, diag] = vi_on_grid(tabular::to_mpop(tab), tabular::state_grid(tab), actions, 1e-12, 10000);
        for (std::size_t s = 0; s < tab.states; ++s) EXPECT_NEAR(v[s], expected.values[s], 1e-8);
    }
}

// Property: a finer action grid that contains the coarser one never lowers the value.
TEST(ViOnGrid, FinerActionGridNeverLowersValue) {
    const auto r = fixtures::restricted_running_example(0.9);
    for (std::size_t coarse_nodes : {5u, 11u}) {
        const auto coarse = linspace(-1.0, 1.0, coarse_nodes);
        std::vector<double> fine;
        for (std::size_t i = 0; i < coarse.size(); ++i) {
            fine.push_back(coarse[i]);
            if (i + 1 < coarse.size()) fine.push_back(0.5 * (coarse[i] + coarse[i + 1]));
        }
        const auto grid = fixtures::running_state_grid(41);
        const auto [vc, dc] = vi_on_grid(r.mdp(), grid, ActionGrid(r.action_hull, std::vector<std::vector<double>>{coarse}),
                                         1e-11, 10000);
        const auto [vf, df] = vi_on_grid(r.mdp(), grid, ActionGrid(r.action_hull, std::vector<std::vector<double>>{fine}),
                                         1e-11, 10000);
        for (std::size_t n = 0; n < grid.size(); ++n) EXPECT_GE(vf[n], vc[n] - 1e-10) << "node " << n;
    }
}

TEST(DiscountedSampler, ZeroDiscountReturnsInitialState) {
    const auto mdp = running::make_mdp(0.9);
    Rng rng(1);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        Vector drawn;
        const InitialSampler initial = [&](Rng& g) {
            drawn = scalar(unit(g));
            return drawn;
        };
        const auto sample = sample_discounted_state_with_horizon(mdp, running::negation_policy(), initial, 0.0, rng);
        EXPECT_EQ(sample.horizon, 0u);
        EXPECT_EQ(sample.state, drawn);
    }
}

TEST(DiscountedSampler, HorizonMeanMatchesGeometricMoment) {
    Rng rng(2);
    double total = 0.0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) total += static_cast<double>(sample_geometric_horizon(0.9, rng));
    EXPECT_NEAR(total / draws, 9.0, 0.15);
}

TEST(DiscountedSampler, HorizonHistogramPassesChiSquare) {
    Rng rng(3);
    const int draws = 100000;
    const std::size_t bins = 11;
    std::vector<double> counts(bins + 1, 0.0);  // last bin collects t > 10
    for (int i = 0; i < draws; ++i) counts[std::min(sample_geometric_horizon(0.5, rng), bins)] += 1.0;
    double stat = 0.0;
    double remaining = 1.0;
    for (std::size_t t = 0; t <= bins; ++t) {
        const double p = t < bins ? std::pow(0.5, static_cast<double>(t) + 1.0) : remaining;
        remaining -= t < bins ? p : 0.0;
        const double expected = p * draws;
        stat += (counts[t] - expected) * (counts[t] - expected) / expected;
    }
    const boost::math::chi_squared dist(static_cast<double>(bins));
    EXPECT_GT(boost::math::cdf(boost::math::complement(dist, stat)), 0.001);
}

TEST(DiscountedSampler, FrozenDynamicsPreserveInitialDistribution) {
    const auto mdp = frozen_line();
    std::normal_distribution<double> normal(0.3, 2.0);
    const InitialSampler initial = [&](Rng& g) { return scalar(normal(g)); };
    Rng rng(4), reference_rng(5);
    std::vector<double> sampled, reference;
    for (int i = 0; i < 10000; ++i) {
        sampled.push_back(sample_discounted_state(mdp, zero_policy, initial, 0.9, rng)[0]);
        reference.push_back(normal(reference_rng));
    }
    const double critical = 1.628 * std::sqrt(2.0 / 10000.0);
    EXPECT_LT(ks_statistic(sampled, reference), critical);
}

TEST(DiscountedSampler, EndpointIsRolloutEndpoint) {
    const auto mdp = running::make_mdp(0.9);
    Rng rng(6);
    const InitialSampler initial = [](Rng&) { return scalar(0.8); };
    for (int i = 0; i < 50; ++i) {
        const auto sample = sample_discounted_state_with_horizon(mdp, running::negation_policy(), initial, 0.7, rng);
        EXPECT_EQ(sample.state, rollout_states(mdp, running::negation_policy(), scalar(0.8), sample.horizon).back());
    }
}

TEST(DiscountedSampler, RejectsBadDiscount) {
    Rng rng(7);
    EXPECT_THROW(sample_geometric_horizon(1.0, rng), DomainError);
    EXPECT_THROW(sample_geometric_horizon(-0.1, rng), DomainError);
}
