#pragma once

// Hybrid A* over (px, py, theta): constant-curvature forward primitives,
// swept-cell collision checks against the road mask, and a holonomic
// shortest-path field as the heuristic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "occluplan/bitmask.hpp"
#include "occluplan/core.hpp"
#include "occluplan/skeleton.hpp"

namespace occluplan {

struct PlannerState {
    double px = 0.0;
    double py = 0.0;
    double theta = 0.0;  // [-pi, pi)

    Cell cell() const { return {static_cast<int>(std::floor(px)), static_cast<int>(std::floor(py))}; }
};

struct VehicleParams {
    double r_min = 25.0;       // minimum turning radius, cells
    double step_length = 5.0;  // primitive arc length, cells
    int n_steer = 5;           // odd number of curvature samples
    int theta_bins = 72;       // heading discretization for the closed set
    double goal_tol = 3.0;     // goal acceptance radius, cells

    void validate() const {
        if (!(r_min > 0.0)) throw InvalidArgumentError("VehicleParams: r_min must be > 0");
        if (!(step_length > 0.0)) throw InvalidArgumentError("VehicleParams: step_length must be > 0");
        if (n_steer < 3 || n_steer % 2 == 0) throw InvalidArgumentError("VehicleParams: n_steer must be odd >= 3");
        if (theta_bins < 16) throw InvalidArgumentError("VehicleParams: theta_bins must be >= 16");
        if (goal_tol < 0.0) throw InvalidArgumentError("VehicleParams: goal_tol must be >= 0");
    }
};

struct Trajectory {
    std::vector<PlannerState> states;
    double step_length = 0.0;
    double total_length = 0.0;

    bool empty() const { return states.empty(); }
};

namespace detail {

inline PlannerState advance(const PlannerState& s, double curvature, double arc_len) {
    PlannerState out;
    if (curvature == 0.0) {
        out.px = s.px + arc_len * std::cos(s.theta);
        out.py = s.py + arc_len * std::sin(s.theta);
        out.theta = s.theta;
    } else {
        const double dth = arc_len * curvature;
        out.px = s.px + (std::sin(s.theta + dth) - std::sin(s.theta)) / curvature;
        out.py = s.py - (std::cos(s.theta + dth) - std::cos(s.theta)) / curvature;
        out.theta = wrap_angle(s.theta + dth);
    }
    return out;
}

}  // namespace detail

/// Forward successors of a state: one constant-curvature arc of length
/// step_length per steering sample, curvatures evenly spaced over
/// [-1/r_min, +1/r_min]. The middle sample is an exact straight step.
inline std::vector<PlannerState> motion_primitives(const PlannerState& s, const VehicleParams& params) {
    params.validate();
    std::vector<PlannerState> out;
    out.reserve(params.n_steer);
    const int half = (params.n_steer - 1) / 2;
    for (int i = -half; i <= half; ++i) {
        const double curvature = static_cast<double>(i) / (half * params.r_min);
        out.push_back(detail::advance(s, curvature, params.step_length));
    }
    return out;
}

/// Per-cell 8-connected shortest path length to `goal` through set cells
/// (axis step 1, diagonal sqrt(2)); unreachable cells are +inf.
struct DistanceField {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
    double at(const Cell& c) const { return at(c.x, c.y); }
};

inline DistanceField holonomic_costmap(const BitMask& mask, const Cell& goal) {
    if (!mask.in_bounds(goal) || !mask.get(goal)) {
        throw InvalidArgumentError("holonomic_costmap: goal not on mask");
    }
    constexpr double kInf = std::numeric_limits<double>::infinity();
    DistanceField field{mask.width(), mask.height(),
                        std::vector<double>(mask.size(), kInf)};
    const auto idx = [&](int x, int y) { return static_cast<std::size_t>(y) * mask.width() + x; };

    using QE = std::pair<double, std::uint32_t>;  // (dist, packed cell)
    std::priority_queue<QE, std::vector<QE>, std::greater<>> open;
    field.values[idx(goal.x, goal.y)] = 0.0;
    open.push({0.0, static_cast<std::uint32_t>(idx(goal.x, goal.y))});

    const double kDiag = std::sqrt(2.0);
    while (!open.empty()) {
        const auto [d, packed] = open.top();
        open.pop();
        const int x = static_cast<int>(packed % mask.width());
        const int y = static_cast<int>(packed / mask.width());
        if (d > field.values[packed]) continue;
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const int nx = x + dx, ny = y + dy;
                if (!mask.in_bounds(nx, ny) || !mask.get(nx, ny)) continue;
                const double nd = d + ((dx != 0 && dy != 0) ? kDiag : 1.0);
                auto& slot = field.values[idx(nx, ny)];
                if (nd < slot) {
                    slot = nd;
                    open.push({nd, static_cast<std::uint32_t>(idx(nx, ny))});
                }
            }
        }
    }
    return field;
}

/// Waypoint nearest to the goal; ties break toward the lower node id.
inline Cell select_local_goal(const SkeletonGraph& graph, const Cell& goal) {
    if (graph.nodes.empty()) throw InvalidArgumentError("select_local_goal: empty graph");
    const SkeletonNode* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& n : graph.nodes) {
        const double d = cell_distance(n.pos, goal);
        if (d < best_d || (d == best_d && best && n.id < best->id)) {
            best_d = d;
            best = &n;
        }
    }
    return best->pos;
}

// The 8-connected field overestimates continuous shortest-path length by up
// to sec(pi/8) ~ 1.0824 on off-axis segments; scaling it back keeps the
// heuristic a lower bound of arc length. The goal tolerance is deducted
// because the search accepts any state within goal_tol of the goal.
inline constexpr double kHolonomicScale = 0.9;

namespace detail {

inline double heuristic_value(const DistanceField& holo, const PlannerState& s, const Cell& goal,
                              const VehicleParams& params) {
    const double euclid = std::hypot(s.px - (goal.x + 0.5), s.py - (goal.y + 0.5));
    const double h = std::max(euclid, kHolonomicScale * holo.at(s.cell()));
    return std::max(0.0, h - params.goal_tol);
}

}  // namespace detail

/// The heuristic plan() uses at the start state; exposed as the
/// admissibility witness for returned trajectory lengths.
inline double start_heuristic(const BitMask& mask, const PlannerState& start, const Cell& goal,
                              const VehicleParams& params) {
    const DistanceField holo = holonomic_costmap(mask, goal);
    return detail::heuristic_value(holo, start, goal, params);
}

namespace detail {

// closed-set key: (round px, round py, theta bin)
inline std::uint64_t state_key(const PlannerState& s, int theta_bins) {
    const auto rx = static_cast<std::uint64_t>(std::lround(s.px) + 4);
    const auto ry = static_cast<std::uint64_t>(std::lround(s.py) + 4);
    int bin = static_cast<int>(std::floor((s.theta + kPi) / (2.0 * kPi) * theta_bins));
    bin = std::clamp(bin, 0, theta_bins - 1);
    return (static_cast<std::uint64_t>(bin) << 42) | (ry << 21) | rx;
}

// Arc swept-cell check sampled at <= 1-cell spacing; nothing can tunnel
// through a one-cell obstacle.
inline bool sweep_on_mask(const BitMask& mask, const PlannerState& from, double curvature, double step_length) {
    const int samples = std::max(1, static_cast<int>(std::ceil(step_length)));
    for (int i = 1; i <= samples; ++i) {
        const PlannerState s = advance(from, curvature, step_length * i / samples);
        const Cell c = s.cell();
        if (!mask.in_bounds(c) || !mask.get(c)) return false;
    }
    return true;
}

}  // namespace detail

/// Hybrid A* from `start` to within goal_tol of `goal` (any heading).
/// Cost is arc length; the heuristic is the holonomic field / Euclidean
/// maximum less the goal tolerance. Throws NoPathError when the search
/// exhausts.
inline Trajectory plan(const BitMask& mask, const PlannerState& start, const Cell& goal,
                       const VehicleParams& params) {
    params.validate();
    const Cell start_cell = start.cell();
    if (!mask.in_bounds(start_cell) || !mask.get(start_cell)) {
        throw InvalidArgumentError("plan: start off mask");
    }
    if (!mask.in_bounds(goal) || !mask.get(goal)) {
        throw InvalidArgumentError("plan: goal off mask");
    }

    const DistanceField holo = holonomic_costmap(mask, goal);
    const double gx = goal.x + 0.5;
    const double gy = goal.y + 0.5;
    const auto heuristic = [&](const PlannerState& s) { return detail::heuristic_value(holo, s, goal, params); };
    const auto at_goal = [&](const PlannerState& s) {
        return std::hypot(s.px - gx, s.py - gy) <= params.goal_tol;
    };

    if (std::isinf(holo.at(start_cell))) throw NoPathError("plan: goal unreachable from start");

    struct Node {
        PlannerState state;
        int parent = -1;
        double g = 0.0;
    };
    struct OpenEntry {
        double f;
        double h;
        std::uint64_t seq;
        int node;
    };
    struct OpenCmp {
        bool operator()(const OpenEntry& a, const OpenEntry& b) const {
            if (a.f != b.f) return a.f > b.f;
            if (a.h != b.h) return a.h > b.h;
            return a.seq > b.seq;  // FIFO among exact ties
        }
    };

    std::vector<Node> nodes;
    std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenCmp> open;
    std::unordered_set<std::uint64_t> closed;
    std::unordered_map<std::uint64_t, double> best_g;  // cheapest push per key
    std::uint64_t seq = 0;

    PlannerState s0 = start;
    s0.theta = wrap_angle(s0.theta);
    nodes.push_back({s0, -1, 0.0});
    const double h0 = heuristic(s0);
    best_g[detail::state_key(s0, params.theta_bins)] = 0.0;
    open.push({h0, h0, seq++, 0});

    const int half = (params.n_steer - 1) / 2;
    int goal_node = -1;
    while (!open.empty()) {
        const OpenEntry top = open.top();
        open.pop();
        const Node cur = nodes[top.node];  // copy: pushes below may reallocate
        const std::uint64_t key = detail::state_key(cur.state, params.theta_bins);
        if (closed.count(key)) continue;
        closed.insert(key);

        if (at_goal(cur.state)) {
            goal_node = top.node;
            break;
        }

        for (int i = -half; i <= half; ++i) {
            const double curvature = static_cast<double>(i) / (half * params.r_min);
            if (!detail::sweep_on_mask(mask, cur.state, curvature, params.step_length)) continue;
            const PlannerState nxt = detail::advance(cur.state, curvature, params.step_length);
            const std::uint64_t nxt_key = detail::state_key(nxt, params.theta_bins);
            if (closed.count(nxt_key)) continue;
            const double h = heuristic(nxt);
            if (std::isinf(h)) continue;  // off the goal's mask component
            const double g = cur.g + params.step_length;
            const auto [it, inserted] = best_g.try_emplace(nxt_key, g);
            if (!inserted) {
                if (g >= it->second) continue;  // dominated by an earlier push
                it->second = g;
            }
            nodes.push_back({nxt, top.node, g});
            open.push({g + h, h, seq++, static_cast<int>(nodes.size()) - 1});
        }
    }

    if (goal_node < 0) throw NoPathError("plan: open set exhausted");

    Trajectory traj;
    traj.step_length = params.step_length;
    for (int i = goal_node; i != -1; i = nodes[i].parent) traj.states.push_back(nodes[i].state);
    std::reverse(traj.states.begin(), traj.states.end());
    traj.total_length = (traj.states.size() - 1) * params.step_length;
    return traj;
}

}  // namespace occluplan
