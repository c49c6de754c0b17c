#pragma once

// Road mask -> one-cell-wide skeleton -> waypoint graph.
// Thinning is the classic two-subiteration Zhang-Suen scheme run to
// fixpoint; graph extraction clusters junction cells and traces the
// connecting chains.

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>
#include <vector>

#include <json.hpp>

#include "occluplan/bitmask.hpp"
#include "occluplan/morphology.hpp"
#include "occluplan/semantic_grid.hpp"

namespace occluplan {

/// Morphological closing of the ROAD mask: connects sparse road returns
/// into a solid traversable region.
inline BitMask road_mask(const SemanticGrid& grid, int kernel = 5, int iterations = 2) {
    if (kernel < 3 || kernel % 2 == 0) throw InvalidArgumentError("road_mask: kernel must be odd and >= 3");
    if (iterations < 1) throw InvalidArgumentError("road_mask: iterations must be >= 1");
    if (grid.empty()) throw EmptyGridError("road_mask: empty grid");
    return morph_close(class_mask(grid, ClassId::ROAD), kernel, iterations);
}

namespace detail {

// Neighbors in Zhang-Suen order: p2..p9 = N, NE, E, SE, S, SW, W, NW.
inline void zs_neighbors(const BitMask& m, int x, int y, int p[10]) {
    p[2] = m.get_padded(x, y - 1);
    p[3] = m.get_padded(x + 1, y - 1);
    p[4] = m.get_padded(x + 1, y);
    p[5] = m.get_padded(x + 1, y + 1);
    p[6] = m.get_padded(x, y + 1);
    p[7] = m.get_padded(x - 1, y + 1);
    p[8] = m.get_padded(x - 1, y);
    p[9] = m.get_padded(x - 1, y - 1);
}

inline int zs_transitions(const int p[10]) {
    int a = 0;
    for (int i = 2; i <= 9; ++i) {
        const int cur = p[i];
        const int nxt = p[i == 9 ? 2 : i + 1];
        if (cur == 0 && nxt == 1) ++a;
    }
    return a;
}

}  // namespace detail

/// Zhang-Suen thinning to fixpoint. The result is a subset of the input,
/// one cell wide, and keeps each component 8-connected.
inline BitMask thin_zhang(const BitMask& mask) {
    BitMask img = mask;
    std::vector<Cell> kill;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int phase = 0; phase < 2; ++phase) {
            kill.clear();
            for (int y = 0; y < img.height(); ++y) {
                for (int x = 0; x < img.width(); ++x) {
                    if (!img.get(x, y)) continue;
                    int p[10];
                    detail::zs_neighbors(img, x, y, p);
                    const int b = p[2] + p[3] + p[4] + p[5] + p[6] + p[7] + p[8] + p[9];
                    if (b < 2 || b > 6) continue;
                    if (detail::zs_transitions(p) != 1) continue;
                    if (phase == 0) {
                        if ((p[2] && p[4] && p[6]) || (p[4] && p[6] && p[8])) continue;
                    } else {
                        if ((p[2] && p[4] && p[8]) || (p[2] && p[6] && p[8])) continue;
                    }
                    kill.push_back({x, y});
                }
            }
            for (const Cell& c : kill) img.set(c, false);
            changed = changed || !kill.empty();
        }
    }
    return img;
}

// ---- waypoint graph ----

enum class NodeKind { JUNCTION, ENDPOINT };

struct SkeletonNode {
    int id = 0;
    Cell pos;
    NodeKind kind = NodeKind::ENDPOINT;
    std::vector<Cell> cells;  // skeleton cells merged into this node
};

struct SkeletonEdge {
    int a = 0;
    int b = 0;
    std::vector<Cell> polyline;  // chain cells between the two node clusters
    double length = 0.0;         // geometric length in cells along the traced path
};

struct SkeletonGraph {
    std::vector<SkeletonNode> nodes;
    std::vector<SkeletonEdge> edges;

    int degree(int node_id) const {
        int d = 0;
        for (const auto& e : edges) {
            d += (e.a == node_id);
            d += (e.b == node_id);
        }
        return d;
    }
};

namespace detail {

inline int skeleton_degree(const BitMask& m, int x, int y) {
    int d = 0;
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            d += m.get_padded(x + dx, y + dy);
        }
    }
    return d;
}

// Number of distinct chains leaving the cell: 0->1 transitions around its
// neighbor ring. A raw neighbor count of 3 also fires on staircase bends
// (the diagonal shortcut of a 90-degree turn); the transition count does
// not.
inline int chain_count(const BitMask& m, int x, int y) {
    int p[10];
    zs_neighbors(m, x, y, p);
    return zs_transitions(p);
}

inline bool has_square_block(const BitMask& m) {
    for (int y = 0; y + 1 < m.height(); ++y) {
        for (int x = 0; x + 1 < m.width(); ++x) {
            if (m.get(x, y) && m.get(x + 1, y) && m.get(x, y + 1) && m.get(x + 1, y + 1)) return true;
        }
    }
    return false;
}

}  // namespace detail

/// Builds the waypoint graph of a thin skeleton. Cells where three or more
/// distinct chains meet cluster into JUNCTION nodes, degree-1 cells become
/// ENDPOINTs, chains in between become edges. Every skeleton cell lands in
/// exactly one node cluster or one edge polyline.
inline SkeletonGraph extract_graph(const BitMask& skeleton) {
    if (detail::has_square_block(skeleton)) {
        throw InvalidArgumentError("extract_graph: input is not thin (2x2 block present)");
    }
    const int w = skeleton.width();
    const int h = skeleton.height();
    SkeletonGraph graph;

    // -1 = not a node cell, otherwise node id
    std::vector<int> node_of(static_cast<std::size_t>(w) * h, -1);
    const auto at = [&](int x, int y) -> int& { return node_of[static_cast<std::size_t>(y) * w + x]; };

    std::vector<int> deg(static_cast<std::size_t>(w) * h, 0);
    std::vector<int> chains(static_cast<std::size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!skeleton.get(x, y)) continue;
            deg[static_cast<std::size_t>(y) * w + x] = detail::skeleton_degree(skeleton, x, y);
            chains[static_cast<std::size_t>(y) * w + x] = detail::chain_count(skeleton, x, y);
        }
    }
    const auto deg_at = [&](int x, int y) { return deg[static_cast<std::size_t>(y) * w + x]; };
    const auto chains_at = [&](int x, int y) { return chains[static_cast<std::size_t>(y) * w + x]; };

    // Junction clusters: 8-connected groups of cells with >= 3 chains,
    // one node at the (snapped) integer centroid.
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!skeleton.get(x, y) || chains_at(x, y) < 3 || at(x, y) != -1) continue;
            std::vector<Cell> cluster;
            std::deque<Cell> queue{{x, y}};
            const int id = static_cast<int>(graph.nodes.size());
            at(x, y) = id;
            while (!queue.empty()) {
                const Cell c = queue.front();
                queue.pop_front();
                cluster.push_back(c);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = c.x + dx, ny = c.y + dy;
                        if ((dx == 0 && dy == 0) || !skeleton.in_bounds(nx, ny)) continue;
                        if (skeleton.get(nx, ny) && chains_at(nx, ny) >= 3 && at(nx, ny) == -1) {
                            at(nx, ny) = id;
                            queue.push_back({nx, ny});
                        }
                    }
                }
            }
            double sx = 0.0, sy = 0.0;
            for (const Cell& c : cluster) {
                sx += c.x;
                sy += c.y;
            }
            Cell centroid{static_cast<int>(std::lround(sx / cluster.size())),
                          static_cast<int>(std::lround(sy / cluster.size()))};
            // snap to the nearest cluster cell so the node sits on the skeleton
            Cell best = cluster.front();
            double best_d = 1e300;
            for (const Cell& c : cluster) {
                const double d = cell_distance(c, centroid);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            graph.nodes.push_back({id, best, NodeKind::JUNCTION, std::move(cluster)});
        }
    }

    // Endpoints: degree-1 cells, one node each. Isolated cells (degree 0)
    // are kept as edgeless endpoints so the cell partition stays total.
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!skeleton.get(x, y) || at(x, y) != -1) continue;
            const int d = deg_at(x, y);
            if (d == 1 || d == 0) {
                const int id = static_cast<int>(graph.nodes.size());
                at(x, y) = id;
                graph.nodes.push_back({id, {x, y}, NodeKind::ENDPOINT, {{x, y}}});
            }
        }
    }

    // Chain tracing. claimed marks chain cells already assigned to an edge.
    std::vector<std::uint8_t> claimed(static_cast<std::size_t>(w) * h, 0);
    const auto is_claimed = [&](int x, int y) { return claimed[static_cast<std::size_t>(y) * w + x] != 0; };
    const auto claim = [&](int x, int y) { claimed[static_cast<std::size_t>(y) * w + x] = 1; };

    const auto trace_from = [&](int node_id, Cell start_attach, Cell first) {
        SkeletonEdge edge;
        edge.a = node_id;
        Cell prev = start_attach;
        Cell cur = first;
        double len = cell_distance(start_attach, first);
        while (true) {
            edge.polyline.push_back(cur);
            claim(cur.x, cur.y);
            Cell next{-1, -1};
            bool found = false;
            // orthogonal continuations first: a staircase bend must be
            // walked through its corner cell, not skipped diagonally
            static constexpr int kSteps[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1},
                                                 {1, 1},  {1, -1}, {-1, 1}, {-1, -1}};
            for (const auto& step : kSteps) {
                const int nx = cur.x + step[0], ny = cur.y + step[1];
                if (!skeleton.in_bounds(nx, ny) || !skeleton.get(nx, ny)) continue;
                if (nx == prev.x && ny == prev.y) continue;
                if (at(nx, ny) != -1 || !is_claimed(nx, ny)) {
                    next = {nx, ny};
                    found = true;
                    break;
                }
            }
            if (!found) {
                // chain ran out without touching a node: closed loop back to start
                edge.b = node_id;
                len += cell_distance(cur, start_attach);
                break;
            }
            len += cell_distance(cur, next);
            if (at(next.x, next.y) != -1) {
                edge.b = at(next.x, next.y);
                break;
            }
            prev = cur;
            cur = next;
        }
        edge.length = len;
        graph.edges.push_back(std::move(edge));
    };

    // walk outward from every node cluster cell
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int id = at(x, y);
            if (id == -1) continue;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if ((dx == 0 && dy == 0) || !skeleton.in_bounds(nx, ny)) continue;
                    if (!skeleton.get(nx, ny) || at(nx, ny) != -1 || is_claimed(nx, ny)) continue;
                    trace_from(id, {x, y}, {nx, ny});
                }
            }
        }
    }

    // direct node-to-node contacts (no chain cells in between)
    std::vector<std::pair<int, int>> direct;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int id = at(x, y);
            if (id == -1) continue;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if ((dx == 0 && dy == 0) || !skeleton.in_bounds(nx, ny)) continue;
                    const int other = skeleton.get(nx, ny) ? at(nx, ny) : -1;
                    if (other == -1 || other == id) continue;
                    const auto pair = std::minmax(id, other);
                    if (std::find(direct.begin(), direct.end(), std::make_pair(pair.first, pair.second)) ==
                        direct.end()) {
                        direct.emplace_back(pair.first, pair.second);
                        SkeletonEdge edge;
                        edge.a = pair.first;
                        edge.b = pair.second;
                        edge.length = cell_distance({x, y}, {nx, ny});
                        graph.edges.push_back(std::move(edge));
                    }
                }
            }
        }
    }

    // isolated cycles: no node anywhere on them; anchor at the first cell
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!skeleton.get(x, y) || at(x, y) != -1 || is_claimed(x, y)) continue;
            const int id = static_cast<int>(graph.nodes.size());
            at(x, y) = id;
            graph.nodes.push_back({id, {x, y}, NodeKind::JUNCTION, {{x, y}}});
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if ((dx == 0 && dy == 0) || !skeleton.in_bounds(nx, ny)) continue;
                    if (skeleton.get(nx, ny) && at(nx, ny) == -1 && !is_claimed(nx, ny)) {
                        trace_from(id, {x, y}, {nx, ny});
                    }
                }
            }
        }
    }

    return graph;
}

/// Number of distinct turns available: the maximum junction degree, 1 for a
/// plain chain, 0 for a graph without edges.
inline int count_branches(const SkeletonGraph& graph) {
    if (graph.edges.empty()) return 0;
    int best = 0;
    for (const auto& n : graph.nodes) {
        if (n.kind == NodeKind::JUNCTION) best = std::max(best, graph.degree(n.id));
    }
    return best > 0 ? best : 1;
}

inline nlohmann::json graph_to_json(const SkeletonGraph& graph) {
    nlohmann::json j;
    j["nodes"] = nlohmann::json::array();
    for (const auto& n : graph.nodes) {
        j["nodes"].push_back({{"id", n.id},
                              {"x", n.pos.x},
                              {"y", n.pos.y},
                              {"kind", n.kind == NodeKind::JUNCTION ? "JUNCTION" : "ENDPOINT"}});
    }
    j["edges"] = nlohmann::json::array();
    for (const auto& e : graph.edges) {
        nlohmann::json poly = nlohmann::json::array();
        for (const Cell& c : e.polyline) poly.push_back({c.x, c.y});
        j["edges"].push_back({{"a", e.a}, {"b", e.b}, {"length", e.length}, {"polyline", poly}});
    }
    return j;
}

}  // namespace occluplan
