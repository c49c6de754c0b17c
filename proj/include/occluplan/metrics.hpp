#pragma once

// Evaluation metrics comparing planned trajectories and skeletons against
// their ground-truth counterparts.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "occluplan/core.hpp"
#include "occluplan/planner.hpp"

namespace occluplan {

enum class Difficulty { EASY, HARD };

struct MetricsReport {
    std::int64_t frame_id = 0;
    std::string sequence_id;
    Difficulty difficulty = Difficulty::EASY;
    bool plan_failed = false;
    // trajectory metrics are NaN when the plan failed
    double frechet = std::numeric_limits<double>::quiet_NaN();          // cells
    double aad = std::numeric_limits<double>::quiet_NaN();              // degrees
    double branch_accuracy = std::numeric_limits<double>::quiet_NaN();  // percent
    double path_length_ratio = std::numeric_limits<double>::quiet_NaN();  // percent
    int frames_ahead = 0;  // sequence-level; filled once per sequence
};

namespace detail {

struct P2 {
    double x, y;
};

inline double p2_dist(const P2& a, const P2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Discrete Frechet via the standard DP over index pairs.
inline double frechet_impl(const std::vector<P2>& p, const std::vector<P2>& q) {
    if (p.empty() || q.empty()) throw InvalidArgumentError("frechet_distance: empty polyline");
    const std::size_t n = p.size();
    const std::size_t m = q.size();
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> prev(m, kInf), cur(m, kInf);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double d = p2_dist(p[i], q[j]);
            double reach;
            if (i == 0 && j == 0) {
                reach = d;
            } else {
                double best = kInf;
                if (i > 0) best = std::min(best, prev[j]);
                if (j > 0) best = std::min(best, cur[j - 1]);
                if (i > 0 && j > 0) best = std::min(best, prev[j - 1]);
                reach = std::max(d, best);
            }
            cur[j] = reach;
        }
        std::swap(prev, cur);
    }
    return prev[m - 1];
}

inline std::vector<P2> to_points(const std::vector<Cell>& cells) {
    std::vector<P2> pts;
    pts.reserve(cells.size());
    for (const Cell& c : cells) pts.push_back({static_cast<double>(c.x), static_cast<double>(c.y)});
    return pts;
}

inline std::vector<P2> to_points(const Trajectory& traj) {
    std::vector<P2> pts;
    pts.reserve(traj.states.size());
    for (const auto& s : traj.states) pts.push_back({s.px, s.py});
    return pts;
}

}  // namespace detail

inline double frechet_distance(const std::vector<Cell>& p, const std::vector<Cell>& q) {
    return detail::frechet_impl(detail::to_points(p), detail::to_points(q));
}

inline double frechet_distance(const Trajectory& p, const Trajectory& q) {
    return detail::frechet_impl(detail::to_points(p), detail::to_points(q));
}

/// Average absolute heading difference (degrees) between each node of
/// traj_in and its Euclidean-nearest node of traj_gt; differences wrap
/// into [0, pi].
inline double aad(const Trajectory& traj_in, const Trajectory& traj_gt) {
    if (traj_in.empty() || traj_gt.empty()) throw InvalidArgumentError("aad: empty trajectory");
    double acc = 0.0;
    for (const auto& s : traj_in.states) {
        double best_d = std::numeric_limits<double>::infinity();
        double best_theta = 0.0;
        for (const auto& g : traj_gt.states) {
            const double d = std::hypot(s.px - g.px, s.py - g.py);
            if (d < best_d) {
                best_d = d;
                best_theta = g.theta;
            }
        }
        acc += angle_difference(s.theta, best_theta);
    }
    return rad_to_deg(acc / static_cast<double>(traj_in.states.size()));
}

/// Predicted branches as a percentage of ground truth; uncapped.
inline double branch_accuracy(int n_im, int n_gt) {
    if (n_gt < 1) throw InvalidArgumentError("branch_accuracy: n_gt must be >= 1");
    return 100.0 * static_cast<double>(n_im) / static_cast<double>(n_gt);
}

inline double trajectory_l2_length(const Trajectory& traj) {
    double len = 0.0;
    for (std::size_t i = 1; i < traj.states.size(); ++i) {
        len += std::hypot(traj.states[i].px - traj.states[i - 1].px,
                          traj.states[i].py - traj.states[i - 1].py);
    }
    return len;
}

/// 100 * L / L_gt with L the sum of consecutive-node L2 distances.
inline double path_length_ratio(const Trajectory& traj, const Trajectory& traj_gt) {
    const double l_gt = trajectory_l2_length(traj_gt);
    if (!(l_gt > 0.0)) throw InvalidArgumentError("path_length_ratio: zero-length ground truth");
    // divide first: equal lengths give exactly 100
    return 100.0 * (trajectory_l2_length(traj) / l_gt);
}

namespace detail {

// True when the trajectory accumulates >= threshold of heading change in
// one direction. Opposite-signed steps reset the run; straight steps keep it.
inline bool plans_turn(const Trajectory& traj, double threshold_rad) {
    double acc = 0.0;
    for (std::size_t i = 1; i < traj.states.size(); ++i) {
        const double d = wrap_angle(traj.states[i].theta - traj.states[i - 1].theta);
        if (d == 0.0) continue;
        if (acc == 0.0 || (acc > 0.0) == (d > 0.0)) {
            acc += d;
        } else {
            acc = d;
        }
        if (std::fabs(acc) >= threshold_rad) return true;
    }
    return false;
}

}  // namespace detail

/// Frames of advance warning: turn_frame minus the first frame whose plan
/// already turns by at least turn_threshold degrees. Failed frames (empty
/// trajectories) never qualify.
inline int frames_ahead(const std::vector<Trajectory>& sequence, int turn_frame, double turn_threshold_deg) {
    if (sequence.empty()) throw InvalidArgumentError("frames_ahead: empty sequence");
    if (turn_frame < 0 || turn_frame >= static_cast<int>(sequence.size())) {
        throw InvalidArgumentError("frames_ahead: turn_frame outside the sequence");
    }
    const double threshold = deg_to_rad(turn_threshold_deg);
    for (int f = 0; f < static_cast<int>(sequence.size()); ++f) {
        if (!sequence[f].empty() && detail::plans_turn(sequence[f], threshold)) {
            return std::max(0, turn_frame - f);
        }
    }
    return 0;
}

}  // namespace occluplan
