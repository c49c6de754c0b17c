#pragma once

// Pluggable fillers for UNKNOWN cells. None of them may touch a known cell:
// the observed semantics always survive inpainting.

#include <deque>
#include <filesystem>
#include <limits>
#include <vector>

#include "occluplan/morphology.hpp"
#include "occluplan/semantic_grid.hpp"

namespace occluplan {

struct InpaintMethod {
    enum class Kind { IDENTITY, MORPHOLOGICAL, ORACLE, EXTERNAL };

    Kind kind = Kind::IDENTITY;
    int radius = 2;        // MORPHOLOGICAL: fill reach around road, cells
    int leak_radius = 40;  // ORACLE: Chebyshev reach from known cells
    std::filesystem::path external_path;

    static InpaintMethod identity() { return {}; }
    static InpaintMethod morphological(int radius) {
        InpaintMethod m;
        m.kind = Kind::MORPHOLOGICAL;
        m.radius = radius;
        return m;
    }
    static InpaintMethod oracle(int leak_radius = 40) {
        InpaintMethod m;
        m.kind = Kind::ORACLE;
        m.leak_radius = leak_radius;
        return m;
    }
    static InpaintMethod external(std::filesystem::path path) {
        InpaintMethod m;
        m.kind = Kind::EXTERNAL;
        m.external_path = std::move(path);
        return m;
    }

    void validate() const {
        if (kind == Kind::MORPHOLOGICAL && radius < 1) {
            throw InvalidArgumentError("InpaintMethod: radius must be >= 1");
        }
        if (kind == Kind::ORACLE && leak_radius < 1) {
            throw InvalidArgumentError("InpaintMethod: leak_radius must be >= 1");
        }
    }
};

namespace detail {

// Chebyshev distance to the nearest known cell; multi-source BFS over the
// 8-neighborhood, unreachable = INT_MAX.
inline std::vector<int> known_distance(const SemanticGrid& grid) {
    const int w = grid.width();
    const int h = grid.height();
    std::vector<int> dist(static_cast<std::size_t>(w) * h, std::numeric_limits<int>::max());
    std::deque<Cell> queue;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (grid.at(x, y) != ClassId::UNKNOWN) {
                dist[static_cast<std::size_t>(y) * w + x] = 0;
                queue.push_back({x, y});
            }
        }
    }
    while (!queue.empty()) {
        const Cell c = queue.front();
        queue.pop_front();
        const int d = dist[static_cast<std::size_t>(c.y) * w + c.x];
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const int nx = c.x + dx, ny = c.y + dy;
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                auto& nd = dist[static_cast<std::size_t>(ny) * w + nx];
                if (nd > d + 1) {
                    nd = d + 1;
                    queue.push_back({nx, ny});
                }
            }
        }
    }
    return dist;
}

inline SemanticGrid inpaint_morphological(const SemanticGrid& grid, int radius) {
    SemanticGrid out = grid;
    const int kernel = 2 * radius + 1;
    bool changed = true;
    while (changed) {
        changed = false;
        const BitMask road = class_mask(out, ClassId::ROAD);
        if (!road.any()) break;
        const BitMask reach = dilate(road, kernel, 1);
        std::vector<Cell> fill;
        for (int y = 0; y < out.height(); ++y) {
            for (int x = 0; x < out.width(); ++x) {
                if (out.at(x, y) != ClassId::UNKNOWN || !reach.get(x, y)) continue;
                int known = 0, road_votes = 0;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        const int nx = x + dx, ny = y + dy;
                        if (!out.in_bounds(nx, ny)) continue;
                        const ClassId c = out.at(nx, ny);
                        if (c == ClassId::UNKNOWN) continue;
                        ++known;
                        road_votes += (c == ClassId::ROAD);
                    }
                }
                // strict majority; ties do not fill
                if (known > 0 && 2 * road_votes > known) fill.push_back({x, y});
            }
        }
        for (const Cell& c : fill) out.set(c, ClassId::ROAD);
        changed = !fill.empty();
    }
    return out;
}

}  // namespace detail

/// Fills UNKNOWN cells of `grid` according to `method`. Known cells are
/// returned bit-identical. ORACLE requires the ground-truth grid.
inline SemanticGrid inpaint(const SemanticGrid& grid, const InpaintMethod& method,
                            const SemanticGrid* gt = nullptr) {
    method.validate();
    switch (method.kind) {
        case InpaintMethod::Kind::IDENTITY:
            return grid;

        case InpaintMethod::Kind::MORPHOLOGICAL:
            return detail::inpaint_morphological(grid, method.radius);

        case InpaintMethod::Kind::ORACLE: {
            if (gt == nullptr) throw InvalidArgumentError("inpaint: ORACLE requires a ground-truth grid");
            if (gt->width() != grid.width() || gt->height() != grid.height()) {
                throw DimensionMismatchError("inpaint: ground-truth dimensions differ from input");
            }
            SemanticGrid out = grid;
            const auto dist = detail::known_distance(grid);
            for (int y = 0; y < grid.height(); ++y) {
                for (int x = 0; x < grid.width(); ++x) {
                    const std::size_t i = static_cast<std::size_t>(y) * grid.width() + x;
                    if (grid.at(x, y) == ClassId::UNKNOWN && dist[i] <= method.leak_radius) {
                        out.set(x, y, gt->at(x, y));
                    }
                }
            }
            return out;
        }

        case InpaintMethod::Kind::EXTERNAL: {
            const SemanticGrid ext = load_grid(method.external_path);
            if (ext.width() != grid.width() || ext.height() != grid.height()) {
                throw DimensionMismatchError("inpaint: external map dimensions differ from input");
            }
            SemanticGrid out = grid;
            for (int y = 0; y < grid.height(); ++y) {
                for (int x = 0; x < grid.width(); ++x) {
                    if (grid.at(x, y) == ClassId::UNKNOWN) out.set(x, y, ext.at(x, y));
                }
            }
            return out;
        }
    }
    throw InvalidArgumentError("inpaint: unknown method");
}

}  // namespace occluplan
