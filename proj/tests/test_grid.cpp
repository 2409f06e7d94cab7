#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "invdp/approx.hpp"
#include "invdp/grid.hpp"
#include "invdp/serialization.hpp"

using namespace invdp;

TEST(GridEval, NodesReturnStoredValuesExactly) {
    GridValueFn v({{0.0, 0.3, 1.0}, {-1.0, 2.0}});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(-5.0, 5.0);
    std::vector<double> values(v.size());
    for (auto& x : values) x = unit(rng);
    v.set_values(values);
    for (std::size_t n = 0; n < v.size(); ++n) EXPECT_EQ(grid_eval(v, v.node(n)), values[n]);
}

TEST(GridEval, LinearInterpolationIn1D) {
    GridValueFn v({{0.0, 1.0}}, std::vector<double>{0.0, 10.0});
    EXPECT_DOUBLE_EQ(grid_eval(v, scalar(0.25)), 2.5);
}

TEST(GridEval, BilinearCellCenterIsCornerMean) {
    GridValueFn v({{0.0, 1.0}, {0.0, 1.0}}, std::vector<double>{0.0, 1.0, 2.0, 3.0});
    Vector center(2);
    center << 0.5, 0.5;
    EXPECT_DOUBLE_EQ(grid_eval(v, center), 1.5);
}

TEST(GridEval, ClampsOutsideTheGrid) {
    GridValueFn v({{0.0, 1.0, 2.0}}, std::vector<double>{1.0, 4.0, 9.0});
    EXPECT_EQ(grid_eval(v, scalar(-3.0)), 1.0);
    EXPECT_EQ(grid_eval(v, scalar(7.0)), 9.0);
}

TEST(GridEval, ErrorModeRejectsOutOfRangeQueries) {
    GridValueFn v({{0.0, 1.0}}, 0.0, OutOfRange::Error);
    EXPECT_THROW(grid_eval(v, scalar(1.5)), DomainError);
}

TEST(GridValueFn, RejectsBadAxes) {
    using Axes = std::vector<std::vector<double>>;
    EXPECT_THROW(GridValueFn(Axes{{0.0}}), DomainError);
    EXPECT_THROW(GridValueFn(Axes{{0.0, 0.0}}), DomainError);
    EXPECT_THROW(GridValueFn(Axes{{1.0, 0.0}}), DomainError);
}

TEST(GridValueFn, RejectsNonFiniteValues) {
    GridValueFn v({{0.0, 1.0}});
    EXPECT_THROW(v.set_values({0.0, std::nan("")}), NonFiniteValue);
}

// Property: evaluations are convex combinations, so they are bounded by the
// stored extremes and monotone in every stored value.
TEST(GridEval, ConvexAndMonotoneOnRandomQueries) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        GridValueFn v = GridValueFn::uniform(Box(Vector::Constant(3, -1.0), Vector::Constant(3, 1.0)), {4, 3, 5});
        std::vector<double> values(v.size());
        for (auto& x : values) x = 10.0 * unit(rng);
        v.set_values(values);
        const double lo = *std::min_element(values.begin(), values.end());
        const double hi = *std::max_element(values.begin(), values.end());
        GridValueFn bumped = v;
        const auto k = static_cast<std::size_t>(trial) % v.size();
        bumped[k] += 1.0;
        for (int q = 0; q < 40; ++q) {
            Vector x(3);
            for (int d = 0; d < 3; ++d) x[d] = 1.3 * unit(rng);
            const double y = grid_eval(v, x);
            EXPECT_GE(y, lo - 1e-12);
            EXPECT_LE(y, hi + 1e-12);
            EXPECT_GE(grid_eval(bumped, x), y - 1e-12);
            double total = 0.0;
            for (const auto& [index, w] : v.stencil(x)) {
                EXPECT_GE(w, 0.0);
                total += w;
            }
            EXPECT_NEAR(total, 1.0, 1e-12);
        }
    }
}

TEST(ActionGrid, RowMajorFlatteningInsideHull) {
    Vector lo(2), hi(2);
    lo << -1.0, 0.0;
    hi << 1.0, 2.0;
    ActionGrid grid(Box(lo, hi), {3, 2});
    ASSERT_EQ(grid.size(), 6u);
    EXPECT_EQ(grid.actions()[0], (Vector(2) << -1.0, 0.0).finished());
    EXPECT_EQ(grid.actions()[1], (Vector(2) << -1.0, 2.0).finished());
    EXPECT_EQ(grid.actions()[2], (Vector(2) << 0.0, 0.0).finished());
    for (const auto& a : grid.actions()) EXPECT_TRUE(grid.hull().contains(a));
}

TEST(ActionGrid, RejectsNodesOutsideHull) {
    EXPECT_THROW(ActionGrid(Box(scalar(0.0), scalar(1.0)), std::vector<std::vector<double>>{{0.0, 2.0}}), DomainError);
}

TEST(GridSerialization, CsvAndJsonRoundTrip) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    GridValueFn v({{-1.0, 0.1, 0.7}, {0.0, 1.0, 2.0, 3.5}});
    std::vector<double> values(v.size());
    for (auto& x : values) x = unit(rng) / 3.0;
    v.set_values(values);

    std::stringstream csv;
    write_grid_csv(csv, v);
    const GridValueFn from_csv = read_grid_csv(csv);
    EXPECT_EQ(from_csv.axes(), v.axes());
    EXPECT_EQ(from_csv.values(), v.values());

    const GridValueFn from_json = grid_from_json(json::parse(to_json(v).dump()));
    EXPECT_EQ(from_json.axes(), v.axes());
    EXPECT_EQ(from_json.values(), v.values());
}
