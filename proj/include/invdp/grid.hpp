#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "invdp/errors.hpp"
#include "invdp/types.hpp"

namespace invdp {

/// n equally spaced points from lo to hi with exact endpoints.
inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n < 2) throw DomainError("linspace needs at least two points");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

enum class OutOfRange { Clamp, Error };

/// Corner indices and convex weights of a multilinear interpolation.
using Stencil = std::vector<std::pair<std::size_t, double>>;

/// Value table on a rectangular grid with multilinear interpolation.
///
/// Values are stored row-major: the last axis varies fastest.
class GridValueFn {
public:
    GridValueFn() = default;

    GridValueFn(std::vector<std::vector<double>> axes, double fill = 0.0,
                OutOfRange out_of_range = OutOfRange::Clamp)
        : axes_(std::move(axes)), out_of_range_(out_of_range) {
        if (axes_.empty()) throw DomainError("GridValueFn needs at least one axis");
        std::size_t count = 1;
        for (const auto& axis : axes_) {
            if (axis.size() < 2) throw DomainError("every grid axis needs at least two nodes");
            for (std::size_t i = 1; i < axis.size(); ++i) {
                if (!(axis[i] > axis[i - 1])) throw DomainError("grid axes must be strictly increasing");
            }
            count *= axis.size();
        }
        strides_.assign(axes_.size(), 1);
        for (std::size_t d = axes_.size() - 1; d > 0; --d) strides_[d - 1] = strides_[d] * axes_[d].size();
        values_.assign(count, fill);
    }

    GridValueFn(std::vector<std::vector<double>> axes, std::vector<double> values,
                OutOfRange out_of_range = OutOfRange::Clamp)
        : GridValueFn(std::move(axes), 0.0, out_of_range) {
        if (values.size() != values_.size()) throw DomainError("value table size does not match grid");
        set_values(std::move(values));
    }

    /// Uniform grid over a box with the given node count per dimension.
    static GridValueFn uniform(const Box& box, const std::vector<std::size_t>& nodes, double fill = 0.0) {
        if (static_cast<int>(nodes.size()) != box.dim()) throw DomainError("node counts do not match box dimension");
        std::vector<std::vector<double>> axes;
        for (int d = 0; d < box.dim(); ++d) axes.push_back(linspace(box.lo[d], box.hi[d], nodes[d]));
        return GridValueFn(std::move(axes), fill);
    }

    int dim() const { return static_cast<int>(axes_.size()); }
    std::size_t size() const { return values_.size(); }
    const std::vector<std::vector<double>>& axes() const { return axes_; }
    const std::vector<double>& values() const { return values_; }
    OutOfRange out_of_range() const { return out_of_range_; }

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    void set_values(std::vector<double> values) {
        if (values.size() != values_.size()) throw DomainError("value table size does not match grid");
        for (double v : values) {
            if (!std::isfinite(v)) throw NonFiniteValue("grid value table");
        }
        values_ = std::move(values);
    }

    Box bounds() const {
        Vector lo(dim()), hi(dim());
        for (int d = 0; d < dim(); ++d) {
            lo[d] = axes_[d].front();
            hi[d] = axes_[d].back();
        }
        return Box(lo, hi);
    }

    Vector node(std::size_t flat) const {
        Vector x(dim());
        for (int d = 0; d < dim(); ++d) {
            x[d] = axes_[d][(flat / strides_[d]) % axes_[d].size()];
        }
        return x;
    }

    /// Multilinear interpolation weights at x; weights are nonnegative and sum to one.
    Stencil stencil(const Vector& x) const {
        if (x.size() != dim()) throw DomainError("query dimension does not match grid");
        std::vector<std::size_t> cell(dim());
        std::vector<double> frac(dim());
        for (int d = 0; d < dim(); ++d) {
            const auto& axis = axes_[d];
            double xd = x[d];
            if (!std::isfinite(xd)) throw NonFiniteValue("grid query");
            if (xd < axis.front() || xd > axis.back()) {
                if (out_of_range_ == OutOfRange::Error) throw DomainError("grid query outside the grid");
                xd = std::clamp(xd, axis.front(), axis.back());
            }
            auto it = std::upper_bound(axis.begin(), axis.end(), xd);
            std::size_t i = static_cast<std::size_t>(it - axis.begin());
            i = std::clamp<std::size_t>(i, 1, axis.size() - 1) - 1;
            cell[d] = i;
            frac[d] = (xd - axis[i]) / (axis[i + 1] - axis[i]);
        }
        Stencil out;
        const std::size_t corners = std::size_t{1} << dim();
        out.reserve(corners);
        for (std::size_t mask = 0; mask < corners; ++mask) {
            double w = 1.0;
            std::size_t flat = 0;
            for (int d = 0; d < dim(); ++d) {
                const bool upper = (mask >> d) & 1U;
                w *= upper ? frac[d] : 1.0 - frac[d];
                flat += (cell[d] + (upper ? 1 : 0)) * strides_[d];
            }
            if (w != 0.0) out.emplace_back(flat, w);
        }
        return out;
    }

    double operator()(const Vector& x) const { return apply(stencil(x), values_); }

    static double apply(const Stencil& stencil, std::span<const double> values) {
        double sum = 0.0;
        for (const auto& [index, weight] : stencil) sum += weight * values[index];
        return sum;
    }

private:
    std::vector<std::vector<double>> axes_;
    std::vector<std::size_t> strides_;
    std::vector<double> values_;
    OutOfRange out_of_range_ = OutOfRange::Clamp;
};

inline double grid_eval(const GridValueFn& value_fn, const Vector& x) { return value_fn(x); }

/// Finite action set laid out as a rectangular grid over a box, flattened row-major.
class ActionGrid {
public:
    ActionGrid() = default;

    ActionGrid(const Box& hull, const std::vector<std::size_t>& nodes) : hull_(hull) {
        if (static_cast<int>(nodes.size()) != hull.dim()) throw DomainError("node counts do not match hull dimension");
        for (int d = 0; d < hull.dim(); ++d) {
            if (nodes[d] == 1) {
                axes_.push_back({0.5 * (hull.lo[d] + hull.hi[d])});
            } else {
                axes_.push_back(linspace(hull.lo[d], hull.hi[d], nodes[d]));
            }
        }
        flatten();
    }

    /// Explicit per-axis nodes; every node must lie in the hull.
    ActionGrid(const Box& hull, std::vector<std::vector<double>> axes) : hull_(hull), axes_(std::move(axes)) {
        if (static_cast<int>(axes_.size()) != hull.dim()) throw DomainError("axis count does not match hull dimension");
        for (std::size_t d = 0; d < axes_.size(); ++d) {
            if (axes_[d].empty()) throw DomainError("empty action axis");
        }
        flatten();
    }

    const Box& hull() const { return hull_; }
    const std::vector<std::vector<double>>& axes() const { return axes_; }
    const std::vector<Vector>& actions() const { return actions_; }
    std::size_t size() const { return actions_.size(); }

private:
    void flatten() {
        std::size_t count = 1;
        for (const auto& axis : axes_) count *= axis.size();
        actions_.clear();
        actions_.reserve(count);
        for (std::size_t flat = 0; flat < count; ++flat) {
            Vector a(static_cast<Eigen::Index>(axes_.size()));
            std::size_t rest = flat;
            for (std::size_t d = axes_.size(); d-- > 0;) {
                a[static_cast<Eigen::Index>(d)] = axes_[d][rest % axes_[d].size()];
                rest /= axes_[d].size();
            }
            if (!hull_.contains(a)) throw DomainError("action grid node lies outside the hull");
            actions_.push_back(std::move(a));
        }
    }

    Box hull_;
    std::vector<std::vector<double>> axes_;
    std::vector<Vector> actions_;
};

}  // namespace invdp
