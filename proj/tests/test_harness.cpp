#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "occluplan/harness.hpp"

using namespace occluplan;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "occluplan_harness" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

RunConfig t_junction_config(std::uint64_t seed, InpaintMethod method) {
    RunConfig c;
    SynthConfig sc;
    sc.spec.kind = MapKind::T_JUNCTION;
    sc.spec.seed = seed;
    sc.spec.obstacle_density = 0.08;
    c.synth = sc;
    c.method = method;
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::size_t count_occurrences(const std::string& hay, const std::string& needle) {
    std::size_t n = 0, pos = 0;
    while ((pos = hay.find(needle, pos)) != std::string::npos) {
        ++n;
        pos += needle.size();
    }
    return n;
}

}  // namespace

TEST_CASE("GT self-run yields the identity metric tuple") {
    MapSpec spec;
    spec.kind = MapKind::T_JUNCTION;
    spec.seed = 21;
    spec.obstacle_density = 0.1;
    const auto gt = synth_map(spec, 256, 256);

    Frame frame;
    frame.grid = gt;
    frame.pose = {40.5, 128.5, 0.0};
    frame.frame_id = 0;

    RunConfig config;
    const auto result = run_frame(frame, gt, {128, 236}, config);
    REQUIRE_FALSE(result.report.plan_failed);
    CHECK(result.report.frechet == 0.0);
    CHECK(result.report.aad == 0.0);
    CHECK(result.report.branch_accuracy == 100.0);
    CHECK(result.report.path_length_ratio == 100.0);
}

TEST_CASE("fully occluded frames carry the failed flag") {
    MapSpec spec;
    spec.kind = MapKind::STRAIGHT;
    spec.seed = 3;
    const auto gt = synth_map(spec, 128, 128);

    Frame frame;
    frame.grid = SemanticGrid(128, 128);  // all UNKNOWN
    frame.pose = {30.5, 64.5, 0.0};

    RunConfig config;
    const auto result = run_frame(frame, gt, {100, 64}, config);
    CHECK(result.report.plan_failed);
    CHECK(result.processed.failed);
    CHECK_FALSE(result.ground_truth.failed);
}

TEST_CASE("oracle inpainting with a wide leak recovers full branch accuracy") {
    MapSpec spec;
    spec.kind = MapKind::T_JUNCTION;
    spec.seed = 6;
    spec.obstacle_density = 0.1;
    const auto gt = synth_map(spec, 256, 256);

    Frame frame;
    frame.pose = {60.5, 128.5, 0.0};
    frame.grid = apply_occlusion(gt, raycast_visibility(gt, frame.pose, 720, 120.0));

    RunConfig config;
    config.method = InpaintMethod::oracle(400);
    const auto result = run_frame(frame, gt, {128, 236}, config);
    CHECK(result.report.branch_accuracy == 100.0);
}

TEST_CASE("single-frame sequences aggregate to the frame report") {
    auto config = t_junction_config(31, InpaintMethod::identity());
    Sequence seq = synth_sequence(*config.synth, config.n_rays, config.max_range);
    seq.frames.resize(1);
    seq.turn_frame = 0;
    const auto result = evaluate_sequence(seq, config);
    REQUIRE(result.reports.size() == 1);
    CHECK(result.overall.frames == 1);
    if (!result.reports[0].plan_failed) {
        CHECK(result.overall.frechet.mean() == result.reports[0].frechet);
        CHECK(result.overall.branch_accuracy.mean() == result.reports[0].branch_accuracy);
    }
}

TEST_CASE("runs are deterministic and thread-count independent") {
    const auto dir_a = temp_dir("det_a");
    const auto dir_b = temp_dir("det_b");

    auto config = t_junction_config(5, InpaintMethod::morphological(2));
    config.out_dir = dir_a;
    config.threads = 1;
    run_sequence(config);

    config.out_dir = dir_b;
    config.threads = 4;
    run_sequence(config);

    CHECK(slurp(dir_a / "metrics.csv") == slurp(dir_b / "metrics.csv"));
    CHECK(slurp(dir_a / "summary.json") == slurp(dir_b / "summary.json"));
}

TEST_CASE("OCCLUPLAN_THREADS overrides configured parallelism, results unchanged") {
    auto config = t_junction_config(5, InpaintMethod::identity());
    config.threads = 1;
    const auto serial = run_sequence(config);

    setenv("OCCLUPLAN_THREADS", "3", 1);
    const auto parallel = run_sequence(config);
    unsetenv("OCCLUPLAN_THREADS");

    REQUIRE(parallel.reports.size() == serial.reports.size());
    for (std::size_t i = 0; i < serial.reports.size(); ++i) {
        CHECK(parallel.reports[i].frechet == serial.reports[i].frechet);
        CHECK(parallel.reports[i].branch_accuracy == serial.reports[i].branch_accuracy);
    }
    CHECK(parallel.frames_ahead == serial.frames_ahead);
}

TEST_CASE("overall mean is the frame-weighted mean of easy and hard") {
    auto config = t_junction_config(8, InpaintMethod::identity());
    const auto result = run_sequence(config);

    const auto check_metric = [](const MeanAccumulator& all, const MeanAccumulator& easy,
                                 const MeanAccumulator& hard) {
        REQUIRE(all.n == easy.n + hard.n);
        if (all.n == 0) return;
        const double weighted = (easy.sum + hard.sum) / all.n;
        CHECK_THAT(all.mean(), Catch::Matchers::WithinAbs(weighted, 1e-12));
    };
    check_metric(result.overall.frechet, result.easy.frechet, result.hard.frechet);
    check_metric(result.overall.aad, result.easy.aad, result.hard.aad);
    check_metric(result.overall.branch_accuracy, result.easy.branch_accuracy, result.hard.branch_accuracy);
    check_metric(result.overall.path_length_ratio, result.easy.path_length_ratio,
                 result.hard.path_length_ratio);
    CHECK(result.overall.frames == result.easy.frames + result.hard.frames);
}

TEST_CASE("oracle inpainting dominates identity on a junction sequence") {
    auto identity = t_junction_config(12, InpaintMethod::identity());
    auto oracle = t_junction_config(12, InpaintMethod::oracle(40));
    const auto r_identity = run_sequence(identity);
    const auto r_oracle = run_sequence(oracle);
    CHECK(r_oracle.overall.branch_accuracy.mean() > r_identity.overall.branch_accuracy.mean());
    CHECK(r_oracle.frames_ahead >= r_identity.frames_ahead);
}

TEST_CASE("sequences round-trip through manifest files") {
    const auto dir = temp_dir("manifest");
    auto config = t_junction_config(9, InpaintMethod::identity());
    const Sequence seq = synth_sequence(*config.synth, config.n_rays, config.max_range);
    const auto manifest = write_sequence(seq, dir);

    const Sequence loaded = load_sequence(manifest);
    CHECK(loaded.gt == seq.gt);
    CHECK(loaded.goal == seq.goal);
    CHECK(loaded.turn_frame == seq.turn_frame);
    REQUIRE(loaded.frames.size() == seq.frames.size());
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        CHECK(loaded.frames[i].grid == seq.frames[i].grid);
        CHECK(loaded.frames[i].pose == seq.frames[i].pose);
    }
}

TEST_CASE("manifest-driven runs match in-memory synth runs") {
    const auto dir = temp_dir("manifest_run");
    auto config = t_junction_config(17, InpaintMethod::oracle(40));
    const Sequence seq = synth_sequence(*config.synth, config.n_rays, config.max_range);
    const auto manifest = write_sequence(seq, dir);

    const auto from_synth = run_sequence(config);

    RunConfig from_disk_config = config;
    from_disk_config.synth.reset();
    from_disk_config.manifest = manifest;
    const auto from_disk = run_sequence(from_disk_config);

    REQUIRE(from_disk.reports.size() == from_synth.reports.size());
    for (std::size_t i = 0; i < from_synth.reports.size(); ++i) {
        CHECK(from_disk.reports[i].frechet == from_synth.reports[i].frechet);
        CHECK(from_disk.reports[i].path_length_ratio == from_synth.reports[i].path_length_ratio);
    }
    CHECK(from_disk.frames_ahead == from_synth.frames_ahead);
}

TEST_CASE("duplicate frame ids are rejected at load") {
    const auto dir = temp_dir("dup_ids");
    auto config = t_junction_config(2, InpaintMethod::identity());
    Sequence seq = synth_sequence(*config.synth, config.n_rays, config.max_range);
    seq.frames.resize(2);
    seq.frames[1].frame_id = seq.frames[0].frame_id;
    const auto manifest = write_sequence(seq, dir);
    CHECK_THROWS_AS(load_sequence(manifest), FormatError);
}

TEST_CASE("run config parses from JSON with defaults") {
    const auto dir = temp_dir("config");
    {
        std::ofstream os(dir / "config.json");
        os << R"({
            "synth": {"kind": "X", "seed": 4, "road_width": 13},
            "inpaint": {"method": "ORACLE", "leak_radius": 32},
            "closing": {"kernel": 5, "iterations": 2},
            "vehicle": {"r_min": 20.0, "goal_tol": 2.0},
            "turn_threshold_deg": 25.0,
            "threads": 2
        })";
    }
    const auto config = load_run_config(dir / "config.json");
    REQUIRE(config.synth.has_value());
    CHECK(config.synth->spec.kind == MapKind::X_JUNCTION);
    CHECK(config.synth->spec.road_width == 13);
    CHECK(config.method.kind == InpaintMethod::Kind::ORACLE);
    CHECK(config.method.leak_radius == 32);
    CHECK(config.vehicle.r_min == 20.0);
    CHECK(config.vehicle.goal_tol == 2.0);
    CHECK(config.turn_threshold_deg == 25.0);
    CHECK(config.threads == 2);

    SECTION("bad config values are rejected") {
        std::ofstream os(dir / "bad.json");
        os << R"({"synth": {"kind": "Y"}})";
        os.close();
        CHECK_THROWS_AS(load_run_config(dir / "bad.json"), InvalidArgumentError);
        CHECK_THROWS_AS(load_run_config(dir / "missing.json"), IoError);
    }
}

TEST_CASE("SVG rendering") {
    MapSpec spec;
    spec.kind = MapKind::T_JUNCTION;
    spec.seed = 14;
    spec.obstacle_density = 0.08;
    const auto gt = synth_map(spec, 128, 128);

    Frame frame;
    frame.grid = gt;
    frame.pose = {30.5, 64.5, 0.0};

    const auto graph = extract_graph(thin_zhang(road_mask(gt)));
    const auto dir = temp_dir("svg");

    SECTION("markers count nodes plus start and goal") {
        render_svg(frame, graph, Trajectory{}, {100, 64}, dir / "empty_traj.svg");
        const auto svg = slurp(dir / "empty_traj.svg");
        CHECK(count_occurrences(svg, "<svg") == 1);
        CHECK(count_occurrences(svg, "</svg>") == 1);
        CHECK(count_occurrences(svg, "<circle") == graph.nodes.size() + 2);
    }

    SECTION("trajectory nodes add markers") {
        Trajectory traj;
        traj.states.push_back({30.5, 64.5, 0.0});
        traj.states.push_back({35.5, 64.5, 0.0});
        render_svg(frame, graph, traj, {100, 64}, dir / "with_traj.svg");
        const auto svg = slurp(dir / "with_traj.svg");
        CHECK(count_occurrences(svg, "<circle") == graph.nodes.size() + traj.states.size() + 2);
    }
}
