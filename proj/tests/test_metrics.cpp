#include <catch_amalgamated.hpp>

#include <cmath>

#include "occluplan/metrics.hpp"
#include "oracles.hpp"

using namespace occluplan;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Trajectory make_traj(std::initializer_list<PlannerState> states, double step = 1.0) {
    Trajectory t;
    t.states = states;
    t.step_length = step;
    t.total_length = (t.states.empty() ? 0.0 : (t.states.size() - 1) * step);
    return t;
}

std::vector<oracles::Pt> to_oracle(const std::vector<Cell>& cells) {
    std::vector<oracles::Pt> pts;
    for (const auto& c : cells) pts.push_back({static_cast<double>(c.x), static_cast<double>(c.y)});
    return pts;
}

}  // namespace

TEST_CASE("frechet fixtures") {
    SECTION("identical polylines") {
        const std::vector<Cell> p{{0, 0}, {1, 0}, {2, 1}};
        CHECK(frechet_distance(p, p) == 0.0);
    }
    SECTION("single points reduce to euclidean distance") {
        CHECK_THAT(frechet_distance({Cell{0, 0}}, {Cell{3, 4}}), WithinAbs(5.0, 1e-12));
    }
    SECTION("parallel segments") {
        const std::vector<Cell> p{{0, 0}, {4, 0}};
        const std::vector<Cell> q{{0, 3}, {4, 3}};
        CHECK_THAT(frechet_distance(p, q), WithinAbs(3.0, 1e-12));
    }
    SECTION("empty polyline is rejected") {
        CHECK_THROWS_AS(frechet_distance(std::vector<Cell>{}, {Cell{0, 0}}), InvalidArgumentError);
    }
}

TEST_CASE("frechet equals the recursive coupling oracle on short random polylines") {
    Rng rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Cell> p, q;
        const int np = rng.uniform_int(1, 6);
        const int nq = rng.uniform_int(1, 6);
        for (int i = 0; i < np; ++i) p.push_back({rng.uniform_int(-10, 10), rng.uniform_int(-10, 10)});
        for (int i = 0; i < nq; ++i) q.push_back({rng.uniform_int(-10, 10), rng.uniform_int(-10, 10)});

        const double dp = frechet_distance(p, q);
        const double oracle = oracles::frechet_recursive(to_oracle(p), to_oracle(q));
        CHECK(dp == oracle);  // same doubles: integer inputs, same arithmetic

        // symmetry and endpoint lower bounds
        CHECK(frechet_distance(q, p) == dp);
        CHECK(dp >= cell_distance(p.front(), q.front()) - 1e-12);
        CHECK(dp >= cell_distance(p.back(), q.back()) - 1e-12);
    }
}

TEST_CASE("aad fixtures") {
    SECTION("identical trajectories") {
        const auto t = make_traj({{0, 0, 0.1}, {1, 0, 0.2}});
        CHECK(aad(t, t) == 0.0);
    }
    SECTION("hand average of two nodes") {
        const auto in = make_traj({{0, 0, deg_to_rad(10)}, {1, 0, deg_to_rad(20)}});
        const auto gt = make_traj({{0, 0, 0.0}, {1, 0, 0.0}});
        CHECK_THAT(aad(in, gt), WithinRel(15.0, 1e-9));
    }
    SECTION("wraps across the pi seam") {
        const auto in = make_traj({{0, 0, deg_to_rad(179)}});
        const auto gt = make_traj({{0, 0, deg_to_rad(-179)}});
        CHECK_THAT(aad(in, gt), WithinAbs(2.0, 1e-9));
    }
    SECTION("empty trajectory rejected") {
        CHECK_THROWS_AS(aad(Trajectory{}, make_traj({{0, 0, 0}})), InvalidArgumentError);
    }
}

TEST_CASE("aad is translation invariant and bounded") {
    Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        Trajectory a, b;
        for (int i = 0; i < 6; ++i) {
            a.states.push_back({rng.uniform_real(0, 50), rng.uniform_real(0, 50), rng.uniform_real(-3, 3)});
            b.states.push_back({rng.uniform_real(0, 50), rng.uniform_real(0, 50), rng.uniform_real(-3, 3)});
        }
        const double base = aad(a, b);
        CHECK(base >= 0.0);
        CHECK(base <= 180.0);
        Trajectory a2 = a, b2 = b;
        const double tx = rng.uniform_real(-20, 20), ty = rng.uniform_real(-20, 20);
        for (auto& s : a2.states) {
            s.px += tx;
            s.py += ty;
        }
        for (auto& s : b2.states) {
            s.px += tx;
            s.py += ty;
        }
        CHECK_THAT(aad(a2, b2), WithinAbs(base, 1e-9));
    }
}

TEST_CASE("branch accuracy") {
    CHECK(branch_accuracy(4, 4) == 100.0);
    CHECK(branch_accuracy(3, 4) == 75.0);
    CHECK(branch_accuracy(5, 4) == 125.0);  // over-prediction allowed past 100
    CHECK_THROWS_AS(branch_accuracy(3, 0), InvalidArgumentError);
}

TEST_CASE("path length ratio") {
    SECTION("identical trajectories give exactly 100") {
        const auto t = make_traj({{0, 0, 0}, {3, 4, 0}});
        CHECK(path_length_ratio(t, t) == 100.0);
    }
    SECTION("half-length trajectory") {
        const auto half = make_traj({{0, 0, 0}, {0, 5, 0}});
        const auto full = make_traj({{0, 0, 0}, {0, 10, 0}});
        CHECK_THAT(path_length_ratio(half, full), WithinRel(50.0, 1e-12));
    }
    SECTION("hand fixture 5 vs 10") {
        const auto t = make_traj({{0, 0, 0}, {3, 4, 0}});
        const auto gt = make_traj({{0, 0, 0}, {0, 10, 0}});
        CHECK_THAT(path_length_ratio(t, gt), WithinRel(50.0, 1e-12));
    }
    SECTION("zero-length ground truth rejected") {
        const auto gt = make_traj({{0, 0, 0}});
        CHECK_THROWS_AS(path_length_ratio(gt, gt), InvalidArgumentError);
    }
}

TEST_CASE("path length ratio is invariant under rigid motion of both") {
    Rng rng(29);
    Trajectory a, b;
    for (int i = 0; i < 5; ++i) {
        a.states.push_back({rng.uniform_real(0, 20), rng.uniform_real(0, 20), 0});
        b.states.push_back({rng.uniform_real(0, 20), rng.uniform_real(0, 20), 0});
    }
    const double base = path_length_ratio(a, b);
    const double ang = 0.83, tx = 12.0, ty = -4.0;
    const auto rigid = [&](Trajectory t) {
        for (auto& s : t.states) {
            const double x = s.px * std::cos(ang) - s.py * std::sin(ang) + tx;
            const double y = s.px * std::sin(ang) + s.py * std::cos(ang) + ty;
            s.px = x;
            s.py = y;
        }
        return t;
    };
    CHECK_THAT(path_length_ratio(rigid(a), rigid(b)), WithinAbs(base, 1e-9));
}

TEST_CASE("frames ahead") {
    const auto straight = make_traj({{0, 0, 0}, {5, 0, 0}, {10, 0, 0}});
    Trajectory turning;
    for (int i = 0; i < 8; ++i) turning.states.push_back({5.0 * i, 0, deg_to_rad(8.0 * i)});

    SECTION("no turning behavior anywhere") {
        const std::vector<Trajectory> seq(5, straight);
        CHECK(frames_ahead(seq, 4, 30.0) == 0);
    }
    SECTION("first qualifying frame vs turn frame") {
        std::vector<Trajectory> seq(41, straight);
        for (int f = 12; f <= 40; ++f) seq[f] = turning;
        CHECK(frames_ahead(seq, 40, 30.0) == 28);
    }
    SECTION("turn planned exactly at the turn frame") {
        std::vector<Trajectory> seq(5, straight);
        seq[4] = turning;
        CHECK(frames_ahead(seq, 4, 30.0) == 0);
    }
    SECTION("failed frames never qualify") {
        std::vector<Trajectory> seq(5, Trajectory{});
        seq[3] = turning;
        CHECK(frames_ahead(seq, 4, 30.0) == 1);
    }
    SECTION("zig-zag below the threshold in any one direction does not count") {
        Trajectory zigzag;
        double theta = 0.0;
        for (int i = 0; i < 20; ++i) {
            theta = (i % 2 == 0) ? deg_to_rad(12) : deg_to_rad(-12);
            zigzag.states.push_back({2.0 * i, 0, theta});
        }
        const std::vector<Trajectory> seq(5, zigzag);
        CHECK(frames_ahead(seq, 4, 30.0) == 0);
    }
    SECTION("errors") {
        CHECK_THROWS_AS(frames_ahead({}, 0, 30.0), InvalidArgumentError);
        CHECK_THROWS_AS(frames_ahead(std::vector<Trajectory>(3, straight), 5, 30.0), InvalidArgumentError);
    }
}
