#pragma once

// End-to-end orchestration: per-frame pipeline (inpaint -> mask -> thin ->
// graph -> local goal -> plan), sequence evaluation with easy/hard splits,
// and CSV / JSON / SVG outputs.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "occluplan/core.hpp"
#include "occluplan/inpaint.hpp"
#include "occluplan/metrics.hpp"
#include "occluplan/occlusion.hpp"
#include "occluplan/planner.hpp"
#include "occluplan/semantic_grid.hpp"
#include "occluplan/skeleton.hpp"

namespace occluplan {

struct SynthConfig {
    MapSpec spec;
    int width = kDefaultGridSize;
    int height = kDefaultGridSize;
    int step = 2;     // cells per frame along the scripted path
    int margin = 20;  // start offset from the map border, cells
};

struct RunConfig {
    // input: either a sequence manifest on disk or an in-process synth spec
    std::filesystem::path manifest;
    std::optional<SynthConfig> synth;

    InpaintMethod method;
    int closing_kernel = 5;
    int closing_iterations = 2;
    VehicleParams vehicle;
    int n_rays = 720;
    double max_range = 120.0;  // raycast range; also the HARD-classification radius
    double turn_threshold_deg = 30.0;
    std::optional<Cell> goal_override;
    std::filesystem::path out_dir;
    int threads = 1;
    bool svg = false;
};

// A sequence ready to evaluate: static ground truth plus per-frame
// occluded captures.
struct Sequence {
    std::string id;
    SemanticGrid gt;
    std::vector<Frame> frames;
    Cell goal;
    int turn_frame = 0;
};

struct PipelineResult {
    SemanticGrid processed;
    BitMask mask;
    BitMask skeleton;
    SkeletonGraph graph;
    Cell local_goal;
    Trajectory trajectory;  // empty when failed
    bool failed = false;
    std::string fail_reason;
};

namespace detail {

// Occlusion can leave road islands the sensor glimpsed through gaps;
// waypoints on them are useless plan targets. Keep only nodes in the
// start cell's mask component.
inline SkeletonGraph reachable_nodes(const SkeletonGraph& graph, const BitMask& mask, const Cell& start) {
    if (!mask.in_bounds(start) || !mask.get(start)) return {};
    std::vector<std::uint8_t> seen(mask.size(), 0);
    const auto idx = [&](int x, int y) { return static_cast<std::size_t>(y) * mask.width() + x; };
    std::deque<Cell> queue{start};
    seen[idx(start.x, start.y)] = 1;
    while (!queue.empty()) {
        const Cell c = queue.front();
        queue.pop_front();
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const int nx = c.x + dx, ny = c.y + dy;
                if ((dx == 0 && dy == 0) || !mask.in_bounds(nx, ny)) continue;
                if (mask.get(nx, ny) && !seen[idx(nx, ny)]) {
                    seen[idx(nx, ny)] = 1;
                    queue.push_back({nx, ny});
                }
            }
        }
    }
    SkeletonGraph filtered;
    for (const auto& n : graph.nodes) {
        if (mask.in_bounds(n.pos) && seen[idx(n.pos.x, n.pos.y)]) filtered.nodes.push_back(n);
    }
    return filtered;
}

}  // namespace detail

/// One side of the per-frame pipeline.
inline PipelineResult run_pipeline(const SemanticGrid& grid, const VehiclePose& pose, const Cell& goal,
                                   const RunConfig& config, const SemanticGrid* gt = nullptr) {
    PipelineResult r;
    r.processed = inpaint(grid, config.method, gt);
    r.mask = road_mask(r.processed, config.closing_kernel, config.closing_iterations);
    r.skeleton = thin_zhang(r.mask);
    r.graph = extract_graph(r.skeleton);
    try {
        const SkeletonGraph candidates = detail::reachable_nodes(r.graph, r.mask, pose.cell());
        r.local_goal = select_local_goal(candidates, goal);
        r.trajectory = plan(r.mask, {pose.px, pose.py, pose.theta}, r.local_goal, config.vehicle);
    } catch (const Error& e) {
        r.failed = true;
        r.fail_reason = e.what();
    }
    return r;
}

struct FrameResult {
    MetricsReport report;
    PipelineResult processed;
    PipelineResult ground_truth;
};

namespace detail {

inline bool junction_in_range(const SkeletonGraph& graph, const VehiclePose& pose, double range) {
    for (const auto& n : graph.nodes) {
        if (n.kind != NodeKind::JUNCTION) continue;
        if (std::hypot(n.pos.x + 0.5 - pose.px, n.pos.y + 0.5 - pose.py) <= range) return true;
    }
    return false;
}

}  // namespace detail

/// Runs the pipeline on the captured frame and on the ground truth, then
/// scores the processed trajectory against the GT one. Frames where either
/// plan fails carry the failed flag and NaN trajectory metrics.
inline FrameResult run_frame(const Frame& frame, const SemanticGrid& gt, const Cell& goal,
                             const RunConfig& config) {
    if (frame.grid.width() != gt.width() || frame.grid.height() != gt.height()) {
        throw DimensionMismatchError("run_frame: frame and ground-truth dimensions differ");
    }
    FrameResult out;
    out.report.frame_id = frame.frame_id;

    out.processed = run_pipeline(frame.grid, frame.pose, goal, config, &gt);

    RunConfig gt_config = config;
    gt_config.method = InpaintMethod::identity();
    out.ground_truth = run_pipeline(gt, frame.pose, goal, gt_config);

    out.report.difficulty = detail::junction_in_range(out.ground_truth.graph, frame.pose, config.max_range)
                                ? Difficulty::HARD
                                : Difficulty::EASY;

    const int gt_branches = count_branches(out.ground_truth.graph);
    if (!out.ground_truth.failed && gt_branches >= 1) {
        out.report.branch_accuracy = branch_accuracy(count_branches(out.processed.graph), gt_branches);
    }

    out.report.plan_failed = out.processed.failed || out.ground_truth.failed;
    if (!out.report.plan_failed) {
        out.report.frechet = frechet_distance(out.processed.trajectory, out.ground_truth.trajectory);
        out.report.aad = aad(out.processed.trajectory, out.ground_truth.trajectory);
        if (trajectory_l2_length(out.ground_truth.trajectory) > 0.0) {
            out.report.path_length_ratio =
                path_length_ratio(out.processed.trajectory, out.ground_truth.trajectory);
        }
    }
    return out;
}

// ---- aggregation ----

struct MeanAccumulator {
    double sum = 0.0;
    int n = 0;

    void add(double v) {
        if (!std::isnan(v)) {
            sum += v;
            ++n;
        }
    }
    double mean() const { return n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN(); }
};

struct AggregateStats {
    int frames = 0;
    int failures = 0;
    MeanAccumulator frechet, aad, branch_accuracy, path_length_ratio;

    void add(const MetricsReport& r) {
        ++frames;
        failures += r.plan_failed;
        frechet.add(r.frechet);
        aad.add(r.aad);
        branch_accuracy.add(r.branch_accuracy);
        path_length_ratio.add(r.path_length_ratio);
    }
};

struct SequenceResult {
    std::string sequence_id;
    std::vector<MetricsReport> reports;
    std::vector<Trajectory> trajectories;     // processed side, empty entries = failed
    std::vector<Trajectory> gt_trajectories;
    AggregateStats overall, easy, hard;
    int turn_frame = 0;
    int frames_ahead = 0;
};

// ---- sequence sources ----

/// Builds a sequence in memory: scripted poses over a synthetic map, each
/// frame occluded by ray casting from its pose.
inline Sequence synth_sequence(const SynthConfig& synth, int n_rays, double max_range) {
    Sequence seq;
    const SyntheticSequence script =
        script_sequence(synth.spec, synth.width, synth.height, synth.step, synth.margin);
    seq.gt = script.gt;
    seq.goal = script.goal;
    seq.turn_frame = script.turn_frame;
    seq.id = std::string(map_kind_name(synth.spec.kind)) + "_seed" + std::to_string(synth.spec.seed);
    seq.frames.reserve(script.poses.size());
    for (std::size_t i = 0; i < script.poses.size(); ++i) {
        Frame f;
        f.frame_id = static_cast<std::int64_t>(i);
        f.pose = script.poses[i];
        f.grid = apply_occlusion(seq.gt, raycast_visibility(seq.gt, f.pose, n_rays, max_range));
        seq.frames.push_back(std::move(f));
    }
    return seq;
}

/// Writes a synthetic sequence to disk: gt map, numbered frame files and
/// the manifest JSON. Returns the manifest path.
inline std::filesystem::path write_sequence(const Sequence& seq, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    save_grid(seq.gt, dir / "gt.ogrd");
    nlohmann::json manifest;
    manifest["sequence_id"] = seq.id;
    manifest["gt_map"] = "gt.ogrd";
    manifest["goal"] = {{"x", seq.goal.x}, {"y", seq.goal.y}};
    manifest["turn_frame"] = seq.turn_frame;
    auto frames = nlohmann::json::array();
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%04zu.ogrd", i);
        save_frame(seq.frames[i], dir / name);
        frames.push_back(name);
    }
    manifest["frames"] = frames;
    const auto path = dir / "manifest.json";
    std::ofstream os(path);
    if (!os) throw IoError("write_sequence: cannot open " + path.string());
    os << manifest.dump(2) << "\n";
    return path;
}

inline Sequence load_sequence(const std::filesystem::path& manifest_path) {
    std::ifstream is(manifest_path);
    if (!is) throw IoError("load_sequence: missing manifest " + manifest_path.string());
    nlohmann::json manifest;
    try {
        is >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("load_sequence: malformed manifest: " + std::string(e.what()));
    }
    Sequence seq;
    try {
        const auto dir = manifest_path.parent_path();
        seq.id = manifest.value("sequence_id", std::string("sequence"));
        seq.gt = load_grid(dir / manifest.at("gt_map").get<std::string>());
        seq.goal = {manifest.at("goal").at("x").get<int>(), manifest.at("goal").at("y").get<int>()};
        seq.turn_frame = manifest.at("turn_frame").get<int>();
        for (const auto& name : manifest.at("frames")) {
            seq.frames.push_back(load_frame(dir / name.get<std::string>()));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("load_sequence: manifest missing fields: " + std::string(e.what()));
    }
    if (seq.frames.empty()) throw FormatError("load_sequence: sequence has no frames");
    std::vector<std::int64_t> ids;
    for (const auto& f : seq.frames) ids.push_back(f.frame_id);
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
        throw FormatError("load_sequence: duplicate frame_id in sequence");
    }
    return seq;
}

// ---- rendering ----

namespace detail {

inline const char* class_color(ClassId c) {
    switch (c) {
        case ClassId::UNKNOWN: return "#15151c";
        case ClassId::ROAD: return "#7b2fbe";
        case ClassId::SIDEWALK: return "#b79fd1";
        case ClassId::BUILDING: return "#8d8d8d";
        case ClassId::FENCE: return "#b5846b";
        case ClassId::VEGETATION: return "#3f7d3f";
        case ClassId::VEHICLE: return "#d14b4b";
        case ClassId::PEDESTRIAN: return "#e6c84b";
        case ClassId::OTHER: return "#2b2b33";
    }
    return "#000000";
}

}  // namespace detail

/// Map + skeleton nodes (blue) + start (pink), goal (green) and trajectory
/// nodes (blue) as one SVG. Class cells are drawn as per-row runs.
inline void render_svg(const Frame& frame, const SkeletonGraph& graph, const Trajectory& trajectory,
                       const Cell& goal, const std::filesystem::path& path) {
    const SemanticGrid& g = frame.grid;
    std::ofstream os(path);
    if (!os) throw IoError("render_svg: cannot open " + path.string());

    const int scale = 3;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << g.width() * scale << "\" height=\""
       << g.height() * scale << "\" viewBox=\"0 0 " << g.width() << " " << g.height() << "\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << g.width() << "\" height=\"" << g.height() << "\" fill=\""
       << detail::class_color(ClassId::UNKNOWN) << "\"/>\n";

    for (int y = 0; y < g.height(); ++y) {
        int x = 0;
        while (x < g.width()) {
            const ClassId c = g.at(x, y);
            int run = 1;
            while (x + run < g.width() && g.at(x + run, y) == c) ++run;
            if (c != ClassId::UNKNOWN) {
                os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << run
                   << "\" height=\"1\" fill=\"" << detail::class_color(c) << "\"/>\n";
            }
            x += run;
        }
    }

    for (const auto& n : graph.nodes) {
        os << "<circle cx=\"" << n.pos.x + 0.5 << "\" cy=\"" << n.pos.y + 0.5
           << "\" r=\"1.6\" fill=\"#1e66d0\"/>\n";
    }
    for (const auto& s : trajectory.states) {
        os << "<circle cx=\"" << s.px << "\" cy=\"" << s.py << "\" r=\"1.1\" fill=\"#3b82f6\"/>\n";
    }
    os << "<circle cx=\"" << frame.pose.px << "\" cy=\"" << frame.pose.py
       << "\" r=\"2.2\" fill=\"#ff69b4\"/>\n";
    os << "<circle cx=\"" << goal.x + 0.5 << "\" cy=\"" << goal.y + 0.5
       << "\" r=\"2.2\" fill=\"#22c55e\"/>\n";
    os << "</svg>\n";
    if (!os) throw IoError("render_svg: write failed for " + path.string());
}

// ---- sequence evaluation ----

namespace detail {

inline int effective_threads(const RunConfig& config) {
    int threads = std::max(1, config.threads);
    if (const char* env = std::getenv("OCCLUPLAN_THREADS")) {
        const int t = std::atoi(env);
        if (t >= 1) threads = t;
    }
    return threads;
}

inline std::string format_metric(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace detail

inline SequenceResult evaluate_sequence(const Sequence& seq, const RunConfig& config) {
    SequenceResult result;
    result.sequence_id = seq.id;
    result.turn_frame = seq.turn_frame;
    const Cell goal = config.goal_override.value_or(seq.goal);

    const std::size_t n = seq.frames.size();
    std::vector<FrameResult> frame_results(n);
    const int threads = detail::effective_threads(config);

    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) frame_results[i] = run_frame(seq.frames[i], seq.gt, goal, config);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(threads);
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&, t]() {
                try {
                    for (std::size_t i = t; i < n; i += threads) {
                        frame_results[i] = run_frame(seq.frames[i], seq.gt, goal, config);
                    }
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        auto& fr = frame_results[i];
        fr.report.sequence_id = seq.id;
        result.reports.push_back(fr.report);
        result.trajectories.push_back(fr.processed.failed ? Trajectory{} : fr.processed.trajectory);
        result.gt_trajectories.push_back(fr.ground_truth.failed ? Trajectory{} : fr.ground_truth.trajectory);
        result.overall.add(fr.report);
        (fr.report.difficulty == Difficulty::HARD ? result.hard : result.easy).add(fr.report);
    }
    result.frames_ahead = frames_ahead(result.trajectories, seq.turn_frame, config.turn_threshold_deg);
    for (auto& r : result.reports) r.frames_ahead = result.frames_ahead;
    return result;
}

inline void write_metrics_csv(const SequenceResult& result, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("write_metrics_csv: cannot open " + path.string());
    os << "sequence_id,frame_id,difficulty,plan_failed,frechet,aad,branch_accuracy,"
          "path_length_ratio,frames_ahead\n";
    for (const auto& r : result.reports) {
        os << r.sequence_id << ',' << r.frame_id << ','
           << (r.difficulty == Difficulty::HARD ? "hard" : "easy") << ',' << (r.plan_failed ? 1 : 0)
           << ',' << detail::format_metric(r.frechet) << ',' << detail::format_metric(r.aad) << ','
           << detail::format_metric(r.branch_accuracy) << ','
           << detail::format_metric(r.path_length_ratio) << ',' << r.frames_ahead << '\n';
    }
}

namespace detail {

inline nlohmann::json aggregate_to_json(const AggregateStats& s) {
    nlohmann::json j;
    j["frames"] = s.frames;
    j["failures"] = s.failures;
    j["frechet"] = s.frechet.mean();
    j["aad"] = s.aad.mean();
    j["branch_accuracy"] = s.branch_accuracy.mean();
    j["path_length_ratio"] = s.path_length_ratio.mean();
    return j;
}

}  // namespace detail

inline nlohmann::json summary_to_json(const SequenceResult& result) {
    nlohmann::json j;
    j["sequence_id"] = result.sequence_id;
    j["turn_frame"] = result.turn_frame;
    j["frames_ahead"] = result.frames_ahead;
    j["overall"] = detail::aggregate_to_json(result.overall);
    j["easy"] = detail::aggregate_to_json(result.easy);
    j["hard"] = detail::aggregate_to_json(result.hard);
    return j;
}

/// Full run: resolve the sequence source, evaluate every frame, write
/// metrics.csv + summary.json (+ per-frame SVGs when enabled).
inline SequenceResult run_sequence(const RunConfig& config) {
    Sequence seq;
    if (config.synth.has_value()) {
        seq = synth_sequence(*config.synth, config.n_rays, config.max_range);
    } else if (!config.manifest.empty()) {
        seq = load_sequence(config.manifest);
    } else {
        throw InvalidArgumentError("run_sequence: config needs a manifest or a synth spec");
    }

    SequenceResult result = evaluate_sequence(seq, config);

    if (!config.out_dir.empty()) {
        std::filesystem::create_directories(config.out_dir);
        write_metrics_csv(result, config.out_dir / "metrics.csv");
        std::ofstream os(config.out_dir / "summary.json");
        if (!os) throw IoError("run_sequence: cannot open summary.json");
        os << summary_to_json(result).dump(2) << "\n";

        if (config.svg) {
            const Cell goal = config.goal_override.value_or(seq.goal);
            for (std::size_t i = 0; i < seq.frames.size(); ++i) {
                // re-run the frame pipeline to recover the graph for rendering
                const auto pr = run_pipeline(seq.frames[i].grid, seq.frames[i].pose, goal, config, &seq.gt);
                char name[32];
                std::snprintf(name, sizeof(name), "frame_%04zu.svg", i);
                Frame shown = seq.frames[i];
                shown.grid = pr.processed;
                render_svg(shown, pr.graph, pr.trajectory, goal, config.out_dir / name);
            }
        }
    }
    return result;
}

// ---- config file ----

inline InpaintMethod inpaint_method_from_json(const nlohmann::json& j) {
    const std::string kind = j.value("method", "IDENTITY");
    if (kind == "IDENTITY") return InpaintMethod::identity();
    if (kind == "MORPHOLOGICAL") return InpaintMethod::morphological(j.value("radius", 2));
    if (kind == "ORACLE") return InpaintMethod::oracle(j.value("leak_radius", 40));
    if (kind == "EXTERNAL") {
        if (!j.contains("path")) throw InvalidArgumentError("config: EXTERNAL inpaint needs a path");
        return InpaintMethod::external(j.at("path").get<std::string>());
    }
    throw InvalidArgumentError("config: unknown inpaint method '" + kind + "'");
}

inline RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    RunConfig c;
    try {
        if (j.contains("manifest")) {
            c.manifest = base_dir / j.at("manifest").get<std::string>();
        }
        if (j.contains("synth")) {
            const auto& s = j.at("synth");
            SynthConfig sc;
            sc.spec.kind = map_kind_from_name(s.value("kind", "T"));
            sc.spec.seed = s.value("seed", 0ull);
            sc.spec.road_width = s.value("road_width", 15);
            sc.spec.obstacle_density = s.value("obstacle_density", 0.08);
            sc.width = s.value("width", kDefaultGridSize);
            sc.height = s.value("height", kDefaultGridSize);
            sc.step = s.value("step", 2);
            sc.margin = s.value("margin", 20);
            c.synth = sc;
        }
        if (j.contains("inpaint")) c.method = inpaint_method_from_json(j.at("inpaint"));
        if (j.contains("closing")) {
            c.closing_kernel = j.at("closing").value("kernel", 5);
            c.closing_iterations = j.at("closing").value("iterations", 2);
        }
        if (j.contains("vehicle")) {
            const auto& v = j.at("vehicle");
            c.vehicle.r_min = v.value("r_min", 25.0);
            c.vehicle.step_length = v.value("step_length", 5.0);
            c.vehicle.n_steer = v.value("n_steer", 5);
            c.vehicle.theta_bins = v.value("theta_bins", 72);
            c.vehicle.goal_tol = v.value("goal_tol", 3.0);
        }
        if (j.contains("raycast")) {
            c.n_rays = j.at("raycast").value("n_rays", 720);
            c.max_range = j.at("raycast").value("max_range", 120.0);
        }
        c.turn_threshold_deg = j.value("turn_threshold_deg", 30.0);
        if (j.contains("goal")) {
            c.goal_override = Cell{j.at("goal").at("x").get<int>(), j.at("goal").at("y").get<int>()};
        }
        if (j.contains("out_dir")) c.out_dir = base_dir / j.at("out_dir").get<std::string>();
        c.threads = j.value("threads", 1);
        c.svg = j.value("svg", false);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgumentError("config: " + std::string(e.what()));
    }
    c.vehicle.validate();
    c.method.validate();
    if (c.threads < 1) throw InvalidArgumentError("config: threads must be >= 1");
    return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("load_run_config: missing file " + path.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("load_run_config: malformed JSON: " + std::string(e.what()));
    }
    return run_config_from_json(j, path.parent_path());
}

}  // namespace occluplan
