#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "invdp/errors.hpp"
#include "invdp/mdp_core.hpp"
#include "invdp/types.hpp"

namespace invdp {

struct Ball {
    Vector center;
    double radius = 0.0;
};

/// Finite point cloud fattened by a margin: {x : min_i |x - p_i| <= margin}.
class SampledClosure {
public:
    SampledClosure(std::vector<Vector> points, double margin) : points_(std::move(points)), margin_(margin) {
        if (points_.empty()) throw DomainError("SampledClosure needs at least one point");
        if (!(margin_ >= 0.0) || !std::isfinite(margin_)) throw DomainError("SampledClosure margin must be finite and >= 0");
        const auto dim = points_.front().size();
        for (const auto& p : points_) {
            if (p.size() != dim) throw DomainError("SampledClosure points have mixed dimensions");
            if (!all_finite(p)) throw DomainError("SampledClosure point is not finite");
        }
        if (margin_ > 0.0) index_ = std::make_shared<const CellIndex>(points_, margin_);
    }

    const std::vector<Vector>& points() const { return points_; }
    double margin() const { return margin_; }
    int dim() const { return static_cast<int>(points_.front().size()); }

    bool contains(const Vector& x) const {
        if (x.size() != dim() || !all_finite(x)) return false;
        const double margin_sq = margin_ * margin_;
        if (!index_) {
            for (const auto& p : points_) {
                if ((p - x).squaredNorm() <= margin_sq) return true;
            }
            return false;
        }
        return index_->any_within(points_, x, margin_sq);
    }

    /// Euclidean distance to the nearest stored point.
    double nearest_distance(const Vector& x) const {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : points_) best = std::min(best, (p - x).squaredNorm());
        return std::sqrt(best);
    }

    Box bounding_box() const {
        Vector lo = points_.front(), hi = points_.front();
        for (const auto& p : points_) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        lo.array() -= margin_;
        hi.array() += margin_;
        return Box(lo, hi);
    }

private:
    // Uniform hash grid with cell width equal to the margin, so every point
    // within the margin of a query lives in one of the 3^d neighbouring cells.
    class CellIndex {
    public:
        CellIndex(const std::vector<Vector>& points, double cell) : cell_(cell) {
            for (std::size_t i = 0; i < points.size(); ++i) cells_[key(cell_of(points[i]))].push_back(i);
        }

        bool any_within(const std::vector<Vector>& points, const Vector& x, double radius_sq) const {
            const std::vector<std::int64_t> base = cell_of(x);
            std::vector<std::int64_t> probe(base.size());
            std::size_t combos = 1;
            for (std::size_t d = 0; d < base.size(); ++d) combos *= 3;
            for (std::size_t c = 0; c < combos; ++c) {
                std::size_t rest = c;
                for (std::size_t d = 0; d < base.size(); ++d) {
                    probe[d] = base[d] + static_cast<std::int64_t>(rest % 3) - 1;
                    rest /= 3;
                }
                auto it = cells_.find(key(probe));
                if (it == cells_.end()) continue;
                for (std::size_t i : it->second) {
                    if ((points[i] - x).squaredNorm() <= radius_sq) return true;
                }
            }
            return false;
        }

    private:
        std::vector<std::int64_t> cell_of(const Vector& x) const {
            std::vector<std::int64_t> c(static_cast<std::size_t>(x.size()));
            for (Eigen::Index d = 0; d < x.size(); ++d) {
                c[static_cast<std::size_t>(d)] = static_cast<std::int64_t>(std::floor(x[d] / cell_));
            }
            return c;
        }

        static std::string key(const std::vector<std::int64_t>& c) {
            return std::string(reinterpret_cast<const char*>(c.data()), c.size() * sizeof(std::int64_t));
        }

        double cell_;
        std::unordered_map<std::string, std::vector<std::size_t>> cells_;
    };

    std::vector<Vector> points_;
    double margin_;
    std::shared_ptr<const CellIndex> index_;
};

/// Compact region with decidable membership.
class CompactSet {
public:
    using Variant = std::variant<Box, Ball, SampledClosure>;

    CompactSet(Box box) : shape_(std::move(box)) {}
    CompactSet(Ball ball) : shape_(std::move(ball)) {
        const auto& b = std::get<Ball>(shape_);
        if (!(b.radius >= 0.0)) throw DomainError("Ball radius must be >= 0");
    }
    CompactSet(SampledClosure closure) : shape_(std::move(closure)) {}

    const Variant& shape() const { return shape_; }

    /// Closed-set membership (boundary points are members).
    bool contains(const Vector& x) const {
        return std::visit(
            [&](const auto& s) -> bool {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Ball>) {
                    return x.size() == s.center.size() && x.allFinite() && (x - s.center).norm() <= s.radius;
                } else {
                    return s.contains(x);
                }
            },
            shape_);
    }

    /// Distance from x to the set; zero for members.
    double distance(const Vector& x) const {
        return std::visit(
            [&](const auto& s) -> double {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Box>) {
                    return s.distance(x);
                } else if constexpr (std::is_same_v<T, Ball>) {
                    return std::max(0.0, (x - s.center).norm() - s.radius);
                } else {
                    if (s.contains(x)) return 0.0;
                    return std::max(0.0, s.nearest_distance(x) - s.margin());
                }
            },
            shape_);
    }

    Box bounding_box() const {
        return std::visit(
            [](const auto& s) -> Box {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Box>) {
                    return s;
                } else if constexpr (std::is_same_v<T, Ball>) {
                    Vector lo = s.center.array() - s.radius;
                    Vector hi = s.center.array() + s.radius;
                    return Box(lo, hi);
                } else {
                    return s.bounding_box();
                }
            },
            shape_);
    }

    int dim() const { return bounding_box().dim(); }

private:
    Variant shape_;
};

using Rng = std::mt19937_64;

/// Rejection sampling: uniform over the bounding box, filtered by membership.
/// Gives up after 100 attempts per requested sample.
inline std::vector<Vector> sample_members(const CompactSet& set, std::size_t count, Rng& rng) {
    const Box box = set.bounding_box();
    std::vector<std::uniform_real_distribution<double>> axes;
    for (int d = 0; d < box.dim(); ++d) axes.emplace_back(box.lo[d], box.hi[d]);
    std::vector<Vector> out;
    out.reserve(count);
    const std::size_t budget = 100 * count;
    for (std::size_t attempt = 0; attempt < budget && out.size() < count; ++attempt) {
        Vector x(box.dim());
        for (int d = 0; d < box.dim(); ++d) x[d] = box.lo[d] == box.hi[d] ? box.lo[d] : axes[d](rng);
        if (set.contains(x)) out.push_back(std::move(x));
    }
    if (out.size() < count) {
        throw EmptySampleSet("rejection sampling found " + std::to_string(out.size()) + " of " +
                             std::to_string(count) + " members within " + std::to_string(budget) + " attempts");
    }
    return out;
}

/// Interval hull of the sampled images of every policy, padded per axis by
/// `relative_slack` times the larger of the axis width and its largest magnitude.
inline Box build_action_hull(const std::vector<PolicyFn>& policies, const CompactSet& s0, std::size_t sample_count,
                             std::uint64_t rng_seed, double relative_slack = 0.01) {
    if (policies.empty()) throw DomainError("build_action_hull needs at least one policy");
    if (sample_count < 1) throw DomainError("build_action_hull needs sample_count >= 1");
    if (!(relative_slack >= 0.0)) throw DomainError("hull slack must be >= 0");
    Rng rng(rng_seed);
    const auto states = sample_members(s0, sample_count, rng);
    Vector lo, hi;
    for (const auto& s : states) {
        for (const auto& policy : policies) {
            Vector a = policy(s);
            if (!all_finite(a)) throw NonFiniteValue("policy output in build_action_hull");
            if (lo.size() == 0) {
                lo = a;
                hi = a;
            } else {
                lo = lo.cwiseMin(a);
                hi = hi.cwiseMax(a);
            }
        }
    }
    for (Eigen::Index d = 0; d < lo.size(); ++d) {
        const double scale = std::max({hi[d] - lo[d], std::abs(lo[d]), std::abs(hi[d])});
        lo[d] -= relative_slack * scale;
        hi[d] += relative_slack * scale;
    }
    return Box(lo, hi);
}

/// The base MDP with admissibility narrowed to {a in hull : f(s,a) in s0}.
struct RestrictedMpop {
    MpopSpec base;
    CompactSet s0;
    Box action_hull;
    std::vector<PolicyFn> policies;

    bool admissible(const Vector& s, const Vector& a) const {
        if (!base.admissible(s, a) || !action_hull.contains(a)) return false;
        const Vector next = base.transition(s, a);
        return all_finite(next) && s0.contains(next);
    }

    /// The restricted problem as a plain MpopSpec (shares the base handles).
    MpopSpec mdp() const {
        MpopSpec out = base;
        out.admissible = [base = base, s0 = s0, hull = action_hull](const Vector& s, const Vector& a) {
            if (!base.admissible(s, a) || !hull.contains(a)) return false;
            const Vector next = base.transition(s, a);
            return all_finite(next) && s0.contains(next);
        };
        return out;
    }
};

inline RestrictedMpop restrict(MpopSpec base, CompactSet s0, std::vector<PolicyFn> policies, Box hull) {
    base.validate();
    if (hull.dim() != base.action_dim) throw DomainError("action hull dimension does not match the MDP");
    return RestrictedMpop{std::move(base), std::move(s0), std::move(hull), std::move(policies)};
}

struct InvarianceReport {
    std::size_t samples = 0;
    std::size_t steps = 0;
    std::size_t violations = 0;
    double worst_distance = 0.0;
    Vector worst_state;
    Vector worst_origin;
    std::size_t worst_step = 0;

    bool passed() const { return violations == 0; }
    double pass_rate() const {
        return samples == 0 ? 1.0 : 1.0 - static_cast<double>(violations) / static_cast<double>(samples);
    }
};

/// Rolls the policy from each start state and records the first exit from `target`.
/// `violations` counts start states whose trajectory leaves.
inline InvarianceReport check_invariance_from(const MpopSpec& mdp, const PolicyFn& policy, const CompactSet& target,
                                              const std::vector<Vector>& starts, std::size_t steps) {
    InvarianceReport report;
    report.samples = starts.size();
    report.steps = steps;
    for (const auto& start : starts) {
        Vector s = start;
        for (std::size_t t = 1; t <= steps; ++t) {
            Vector a = policy(s);
            if (!mdp.admissible(s, a)) throw InadmissibleAction(t - 1, s, a);
            Vector next = mdp.transition(s, a);
            if (!all_finite(next)) throw NonFiniteValue("transition at state " + detail::format_vector(s));
            s = std::move(next);
            if (!target.contains(s)) {
                ++report.violations;
                const double dist = target.distance(s);
                if (report.violations == 1 || dist > report.worst_distance) {
                    report.worst_distance = dist;
                    report.worst_state = s;
                    report.worst_origin = start;
                    report.worst_step = t;
                }
                break;
            }
        }
    }
    return report;
}

inline InvarianceReport check_forward_invariance(const MpopSpec& mdp, const PolicyFn& policy, const CompactSet& s0,
                                                 std::size_t sample_count, std::size_t steps,
                                                 std::uint64_t rng_seed) {
    if (sample_count < 1 || steps < 1) throw DomainError("sample_count and steps must be >= 1");
    Rng rng(rng_seed);
    return check_invariance_from(mdp, policy, s0, sample_members(s0, sample_count, rng), steps);
}

struct NonemptinessFailure {
    Vector state;
    std::size_t policy_index;
    Vector action;
};

struct NonemptinessReport {
    std::size_t samples = 0;
    std::vector<NonemptinessFailure> failures;

    bool passed() const { return failures.empty(); }
    /// Fraction of sampled states at which every stored policy was admissible.
    double pass_rate() const {
        if (samples == 0) return 1.0;
        std::size_t bad_states = 0;
        const Vector* last = nullptr;
        for (const auto& f : failures) {
            if (last == nullptr || !(*last == f.state)) ++bad_states;
            last = &f.state;
        }
        return 1.0 - static_cast<double>(bad_states) / static_cast<double>(samples);
    }
};

inline NonemptinessReport check_nonemptiness_at(const RestrictedMpop& restricted, const std::vector<Vector>& states) {
    NonemptinessReport report;
    report.samples = states.size();
    for (const auto& s : states) {
        for (std::size_t i = 0; i < restricted.policies.size(); ++i) {
            Vector a = restricted.policies[i](s);
            if (!restricted.admissible(s, a)) report.failures.push_back({s, i, std::move(a)});
        }
    }
    return report;
}

inline NonemptinessReport check_nonemptiness(const RestrictedMpop& restricted, std::size_t sample_count,
                                             std::uint64_t rng_seed) {
    if (sample_count < 1) throw DomainError("sample_count must be >= 1");
    Rng rng(rng_seed);
    return check_nonemptiness_at(restricted, sample_members(restricted.s0, sample_count, rng));
}

}  // namespace invdp
