// occluplan: synth / run / render / compare over occluded BEV sequences.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "occluplan/occluplan.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitPartialFailure = 3;

void print_aggregate(const char* label, const occluplan::AggregateStats& s) {
    std::printf("%-8s frames=%-4d failures=%-3d frechet=%-10.3f aad=%-9.3f branch=%-9.3f path_len=%-9.3f\n",
                label, s.frames, s.failures, s.frechet.mean(), s.aad.mean(), s.branch_accuracy.mean(),
                s.path_length_ratio.mean());
}

int cmd_run(const std::string& config_path) {
    occluplan::RunConfig config;
    try {
        config = occluplan::load_run_config(config_path);
    } catch (const occluplan::Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }
    const auto result = occluplan::run_sequence(config);
    std::printf("sequence %s: %zu frames, turn_frame=%d, frames_ahead=%d\n", result.sequence_id.c_str(),
                result.reports.size(), result.turn_frame, result.frames_ahead);
    print_aggregate("overall", result.overall);
    print_aggregate("easy", result.easy);
    print_aggregate("hard", result.hard);
    if (!config.out_dir.empty()) {
        std::printf("wrote %s\n", (config.out_dir / "metrics.csv").c_str());
    }
    return result.overall.failures > 0 ? kExitPartialFailure : kExitOk;
}

struct MetricRow {
    const char* name;
    bool lower_is_better;
};

int cmd_compare(const std::string& run_a, const std::string& run_b) {
    const auto load = [](const std::filesystem::path& dir) {
        std::ifstream is(dir / "summary.json");
        if (!is) throw occluplan::IoError("compare: missing " + (dir / "summary.json").string());
        nlohmann::json j;
        is >> j;
        return j;
    };
    const nlohmann::json a = load(run_a);
    const nlohmann::json b = load(run_b);

    std::printf("%-20s %12s %12s   %s\n", "metric", "A", "B", "better");
    const MetricRow rows[] = {{"frechet", true},
                              {"aad", true},
                              {"branch_accuracy", false},
                              {"path_length_ratio", false}};
    for (const auto& row : rows) {
        const auto& va = a.at("overall").at(row.name);
        const auto& vb = b.at("overall").at(row.name);
        if (va.is_null() || vb.is_null()) {
            std::printf("%-20s %12s %12s   n/a\n", row.name, "-", "-");
            continue;
        }
        const double da = va.get<double>();
        const double db = vb.get<double>();
        const char* better = da == db ? "tie" : ((da < db) == row.lower_is_better ? "A" : "B");
        std::printf("%-20s %12.3f %12.3f   %s\n", row.name, da, db, better);
    }
    const int fa = a.at("frames_ahead").get<int>();
    const int fb = b.at("frames_ahead").get<int>();
    std::printf("%-20s %12d %12d   %s\n", "frames_ahead", fa, fb,
                fa == fb ? "tie" : (fa > fb ? "A" : "B"));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"occlusion-aware BEV planning pipeline"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic occluded sequence");
    std::string kind = "T";
    std::uint64_t seed = 0;
    std::string out_dir;
    int width = occluplan::kDefaultGridSize, height = occluplan::kDefaultGridSize;
    int road_width = 15, n_rays = 720, step = 2, margin = 20;
    double density = 0.08, max_range = 120.0;
    synth->add_option("--kind", kind, "map topology: STRAIGHT, L, T or X");
    synth->add_option("--seed", seed, "rng seed");
    synth->add_option("--out", out_dir, "output directory")->required();
    synth->add_option("--width", width);
    synth->add_option("--height", height);
    synth->add_option("--road-width", road_width, "road width, cells");
    synth->add_option("--density", density, "building density off-road");
    synth->add_option("--n-rays", n_rays);
    synth->add_option("--max-range", max_range, "sensor range, cells");
    synth->add_option("--step", step, "cells per frame");
    synth->add_option("--margin", margin, "path start offset from border");

    // run
    auto* run = app.add_subcommand("run", "evaluate a sequence per a JSON config");
    std::string config_path;
    run->add_option("--config", config_path, "run config JSON")->required();

    // render
    auto* render = app.add_subcommand("render", "render one frame as SVG");
    std::string frame_path, svg_path, dump_graph_path;
    int goal_x = -1, goal_y = -1;
    render->add_option("--frame", frame_path, "grid file with pose sidecar")->required();
    render->add_option("--out", svg_path, "output SVG path")->required();
    render->add_option("--goal-x", goal_x, "goal cell x; plans a path when set with --goal-y");
    render->add_option("--goal-y", goal_y, "goal cell y");
    render->add_option("--dump-graph", dump_graph_path, "also write the skeleton graph as JSON");

    // compare
    auto* compare = app.add_subcommand("compare", "paired report of two run outputs");
    std::vector<std::string> compare_runs;
    compare->add_option("--run", compare_runs, "run directory (pass twice: --run A --run B)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            occluplan::MapSpec spec;
            spec.kind = occluplan::map_kind_from_name(kind);
            spec.seed = seed;
            spec.road_width = road_width;
            spec.obstacle_density = density;
            occluplan::SynthConfig sc{spec, width, height, step, margin};
            const auto seq = occluplan::synth_sequence(sc, n_rays, max_range);
            const auto manifest = occluplan::write_sequence(seq, out_dir);
            std::printf("wrote %zu frames to %s\n", seq.frames.size(), manifest.c_str());
            return kExitOk;
        }
        if (*run) {
            return cmd_run(config_path);
        }
        if (*render) {
            const occluplan::Frame frame = occluplan::load_frame(frame_path);
            occluplan::RunConfig config;
            const bool has_goal = goal_x >= 0 && goal_y >= 0;
            const occluplan::Cell goal = has_goal ? occluplan::Cell{goal_x, goal_y} : frame.pose.cell();
            occluplan::PipelineResult pr =
                occluplan::run_pipeline(frame.grid, frame.pose, goal, config, nullptr);
            if (!has_goal) pr.trajectory = occluplan::Trajectory{};  // no goal, no path
            occluplan::Frame shown = frame;
            shown.grid = pr.processed;
            occluplan::render_svg(shown, pr.graph, pr.trajectory, goal, svg_path);
            if (!dump_graph_path.empty()) {
                std::ofstream os(dump_graph_path);
                os << occluplan::graph_to_json(pr.graph).dump(2) << "\n";
            }
            std::printf("wrote %s\n", svg_path.c_str());
            return kExitOk;
        }
        if (*compare) {
            if (compare_runs.size() != 2) {
                std::cerr << "compare needs exactly two --run directories\n";
                return kExitConfigError;
            }
            return cmd_compare(compare_runs[0], compare_runs[1]);
        }
    } catch (const occluplan::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const occluplan::InvalidArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const occluplan::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const occluplan::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
