#pragma once

// Procedural ground-truth maps (straight roads, turns, intersections) and
// lidar-style occlusion via 2D ray casting from the vehicle pose.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "occluplan/bitmask.hpp"
#include "occluplan/core.hpp"
#include "occluplan/morphology.hpp"
#include "occluplan/semantic_grid.hpp"

namespace occluplan {

enum class MapKind { STRAIGHT, L_TURN, T_JUNCTION, X_JUNCTION };

inline const char* map_kind_name(MapKind k) {
    switch (k) {
        case MapKind::STRAIGHT: return "STRAIGHT";
        case MapKind::L_TURN: return "L";
        case MapKind::T_JUNCTION: return "T";
        case MapKind::X_JUNCTION: return "X";
    }
    return "?";
}

inline MapKind map_kind_from_name(const std::string& s) {
    if (s == "STRAIGHT" || s == "straight" || s == "S") return MapKind::STRAIGHT;
    if (s == "L" || s == "l" || s == "L_TURN") return MapKind::L_TURN;
    if (s == "T" || s == "t" || s == "T_JUNCTION") return MapKind::T_JUNCTION;
    if (s == "X" || s == "x" || s == "X_JUNCTION") return MapKind::X_JUNCTION;
    throw InvalidArgumentError("unknown map kind '" + s + "' (expected STRAIGHT, L, T or X)");
}

struct MapSpec {
    MapKind kind = MapKind::STRAIGHT;
    int road_width = 15;               // cells; >= 3 so the skeleton survives thinning
    std::uint64_t seed = 0;
    double obstacle_density = 0.0;     // fraction of off-road cells covered by buildings

    void validate() const {
        if (road_width < 3) throw InvalidArgumentError("MapSpec: road_width must be >= 3");
        if (obstacle_density < 0.0 || obstacle_density > 1.0) {
            throw InvalidArgumentError("MapSpec: obstacle_density must be in [0,1]");
        }
    }
};

inline bool is_occluder(ClassId c) {
    return c == ClassId::BUILDING || c == ClassId::FENCE || c == ClassId::VEHICLE;
}

namespace detail {

struct RoadLayout {
    bool west = false, east = false, north = false, south = false;
};

inline RoadLayout layout_for(MapKind kind) {
    switch (kind) {
        case MapKind::STRAIGHT: return {true, true, false, false};
        case MapKind::L_TURN: return {true, false, false, true};
        case MapKind::T_JUNCTION: return {true, true, false, true};
        case MapKind::X_JUNCTION: return {true, true, true, true};
    }
    return {};
}

inline void paint_rect(SemanticGrid& g, int x0, int y0, int x1, int y1, ClassId c) {
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    x1 = std::min(x1, g.width() - 1);
    y1 = std::min(y1, g.height() - 1);
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) g.set(x, y, c);
    }
}

// Paints a building rectangle onto cells the placement mask allows.
// Returns the number of cells painted.
inline std::size_t paint_building(SemanticGrid& g, const BitMask& allowed, int x0, int y0, int x1, int y1) {
    std::size_t painted = 0;
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    x1 = std::min(x1, g.width() - 1);
    y1 = std::min(y1, g.height() - 1);
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            if (allowed.get(x, y) && g.at(x, y) != ClassId::BUILDING) {
                g.set(x, y, ClassId::BUILDING);
                ++painted;
            }
        }
    }
    return painted;
}

}  // namespace detail

/// Deterministic ground-truth map for the requested topology. Roads meet at
/// the grid center; buildings hug the intersection corners first, then fill
/// the requested off-road density. Never writes UNKNOWN or VEGETATION.
inline SemanticGrid synth_map(const MapSpec& spec, int width, int height) {
    spec.validate();
    if (width < 64 || height < 64) throw InvalidArgumentError("synth_map: dimensions must be >= 64");
    if (spec.road_width * 3 >= std::min(width, height)) {
        throw InvalidArgumentError("synth_map: road too wide for the requested dimensions");
    }

    SemanticGrid g(width, height, kDefaultResolution, 0.0, 0.0, ClassId::OTHER);
    const int cx = width / 2;
    const int cy = height / 2;
    const int lo = (spec.road_width - 1) / 2;  // band = [c-lo, c+hi], width cells total
    const int hi = spec.road_width / 2;

    const auto arms = detail::layout_for(spec.kind);
    if (arms.west) detail::paint_rect(g, 0, cy - lo, cx + hi, cy + hi, ClassId::ROAD);
    if (arms.east) detail::paint_rect(g, cx - lo, cy - lo, width - 1, cy + hi, ClassId::ROAD);
    if (arms.north) detail::paint_rect(g, cx - lo, 0, cx + hi, cy + hi, ClassId::ROAD);
    if (arms.south) detail::paint_rect(g, cx - lo, cy - lo, cx + hi, height - 1, ClassId::ROAD);

    // Sidewalk ring: 2 cells around the road.
    const BitMask road = class_mask(g, ClassId::ROAD);
    const BitMask near_road = dilate(road, 5, 1);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (near_road.get(x, y) && !road.get(x, y)) g.set(x, y, ClassId::SIDEWALK);
        }
    }

    if (spec.obstacle_density > 0.0) {
        // Buildings go behind the sidewalk, never on the road.
        BitMask allowed(width, height);
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) allowed.set(x, y, !near_road.get(x, y));
        }
        const std::size_t off_road = g.size() - road.popcount();
        const auto target = static_cast<std::size_t>(spec.obstacle_density * static_cast<double>(off_road));
        std::size_t placed = 0;

        // Corner blocks flanking the intersection box occlude the cross
        // arms from an approaching vehicle.
        const int gap = 3;  // sidewalk + 1
        const int block = std::max(14, spec.road_width);
        const int bx0 = cx - lo - gap - block, bx1 = cx - lo - gap;  // west of the vertical band
        const int bx2 = cx + hi + gap, bx3 = cx + hi + gap + block;  // east of it
        const int by0 = cy - lo - gap - block, by1 = cy - lo - gap;  // north of the horizontal band
        const int by2 = cy + hi + gap, by3 = cy + hi + gap + block;  // south of it
        placed += detail::paint_building(g, allowed, bx0, by0, bx1, by1);  // NW
        placed += detail::paint_building(g, allowed, bx2, by0, bx3, by1);  // NE
        placed += detail::paint_building(g, allowed, bx0, by2, bx1, by3);  // SW
        placed += detail::paint_building(g, allowed, bx2, by2, bx3, by3);  // SE

        Rng rng(spec.seed ^ 0x0cc1ull);
        int attempts = 0;
        while (placed < target && attempts < 4000) {
            ++attempts;
            const int bw = rng.uniform_int(6, 20);
            const int bh = rng.uniform_int(6, 20);
            const int x0 = rng.uniform_int(0, width - 2);
            const int y0 = rng.uniform_int(0, height - 2);
            placed += detail::paint_building(g, allowed, x0, y0, x0 + bw - 1, y0 + bh - 1);
        }
    }
    return g;
}

/// Casts n_rays evenly spaced rays from the pose cell center. A cell is
/// visible when some ray reaches it within max_range before hitting an
/// occluder; the occluder cell itself is visible.
inline BitMask raycast_visibility(const SemanticGrid& gt, const VehiclePose& pose, int n_rays, double max_range) {
    const int px = static_cast<int>(std::floor(pose.px));
    const int py = static_cast<int>(std::floor(pose.py));
    if (!gt.in_bounds(px, py)) throw InvalidArgumentError("raycast_visibility: pose outside grid");
    if (n_rays < 8) throw InvalidArgumentError("raycast_visibility: n_rays must be >= 8");
    if (!(max_range > 0.0)) throw InvalidArgumentError("raycast_visibility: max_range must be > 0");

    BitMask vis(gt.width(), gt.height());
    vis.set(px, py);

    const double ox = px + 0.5;
    const double oy = py + 0.5;
    constexpr double kInf = 1e30;

    for (int r = 0; r < n_rays; ++r) {
        const double ang = 2.0 * kPi * r / n_rays;
        const double dx = std::cos(ang);
        const double dy = std::sin(ang);

        // Amanatides-Woo grid traversal.
        int x = px, y = py;
        const int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
        const int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
        const double t_delta_x = step_x ? 1.0 / std::fabs(dx) : kInf;
        const double t_delta_y = step_y ? 1.0 / std::fabs(dy) : kInf;
        double t_max_x = step_x ? ((step_x > 0 ? (x + 1 - ox) : (ox - x)) * t_delta_x) : kInf;
        double t_max_y = step_y ? ((step_y > 0 ? (y + 1 - oy) : (oy - y)) * t_delta_y) : kInf;

        while (true) {
            double t;
            if (t_max_x < t_max_y) {
                t = t_max_x;
                x += step_x;
                t_max_x += t_delta_x;
            } else {
                t = t_max_y;
                y += step_y;
                t_max_y += t_delta_y;
            }
            if (t > max_range || !gt.in_bounds(x, y)) break;
            vis.set(x, y);
            if (is_occluder(gt.at(x, y))) break;
        }
    }
    return vis;
}

/// Copies visible cells, writes UNKNOWN elsewhere.
inline SemanticGrid apply_occlusion(const SemanticGrid& gt, const BitMask& vis) {
    if (vis.width() != gt.width() || vis.height() != gt.height()) {
        throw DimensionMismatchError("apply_occlusion: mask dimensions differ from grid");
    }
    SemanticGrid out(gt.width(), gt.height(), gt.resolution(), gt.origin_x(), gt.origin_y(), ClassId::UNKNOWN);
    for (int y = 0; y < gt.height(); ++y) {
        for (int x = 0; x < gt.width(); ++x) {
            if (vis.get(x, y)) out.set(x, y, gt.at(x, y));
        }
    }
    return out;
}

// ---- scripted sequences ----

// A straight approach along the ground-truth centerline at 2 cells/frame,
// ending where a minimum-radius turn is still feasible. The goal sits at
// the end of the turn arm (or straight ahead for STRAIGHT maps).
struct SyntheticSequence {
    SemanticGrid gt;
    std::vector<VehiclePose> poses;
    Cell goal;
    int turn_frame = 0;  // index of the frame closest to the turn entry
};

inline SyntheticSequence script_sequence(const MapSpec& spec, int width = kDefaultGridSize,
                                         int height = kDefaultGridSize, int step = 2, int margin = 20,
                                         int turn_radius = 25) {
    SyntheticSequence seq;
    seq.gt = synth_map(spec, width, height);
    const int cx = width / 2;
    const int cy = height / 2;

    const bool turns = spec.kind != MapKind::STRAIGHT;
    const int end_x = turns ? cx - turn_radius - 5 : cx;
    for (int x = margin; x <= end_x; x += step) {
        seq.poses.push_back(VehiclePose{x + 0.5, cy + 0.5, 0.0});
    }
    if (seq.poses.empty()) throw InvalidArgumentError("script_sequence: map too small for the scripted path");
    seq.turn_frame = static_cast<int>(seq.poses.size()) - 1;
    seq.goal = turns ? Cell{cx, height - margin} : Cell{width - margin, cy};
    return seq;
}

}  // namespace occluplan
