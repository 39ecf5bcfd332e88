// Command-line driver: segment / boundaries / eval / synth subcommands over
// the stseg library. Exit codes: 0 ok, 2 config error, 3 input error,
// 4 numerical failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stseg/config.hpp"
#include "stseg/ground_truth.hpp"
#include "stseg/metrics.hpp"
#include "stseg/pipeline.hpp"
#include "stseg/synth.hpp"
#include "stseg/volume_io.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int log_level() {
    const char* v = std::getenv("STSEG_LOG");
    return v ? std::atoi(v) : 0;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::fprintf(stderr, "[stseg] %s\n", msg.c_str());
}

// Options shared by the pipeline subcommands; overrides are applied on top of
// the config file in a fixed order, --set entries last.
struct PipelineArgs {
    std::string config_path;
    std::string input;
    std::string output;
    std::string scales, windows, seed, k, levels, jobs;
    bool full_video = false;
    bool no_reduction = false;
    std::vector<std::string> sets;

    stseg::PipelineConfig make_config() const {
        stseg::PipelineConfig cfg;
        if (!config_path.empty()) cfg = stseg::PipelineConfig::from_file(config_path);
        if (!scales.empty()) cfg.set("scales", scales);
        if (!windows.empty()) cfg.set("windows", windows);
        if (!k.empty()) cfg.set("k", k);
        if (!levels.empty()) cfg.set("levels", levels);
        if (!seed.empty()) cfg.set("seed", seed);
        if (!jobs.empty()) cfg.set("jobs", jobs);
        if (full_video) cfg.set("full_video", "true");
        if (no_reduction) cfg.set("reduction", "false");
        for (const std::string& kv : sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw stseg::ConfigError("--set expects key=value, got '" + kv + "'");
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        cfg.validate();
        return cfg;
    }
};

void add_pipeline_options(CLI::App* cmd, PipelineArgs& a) {
    cmd->add_option("--config", a.config_path, "config file (key = value lines)");
    cmd->add_option("--input", a.input, "input directory of video frames")->required();
    cmd->add_option("--output", a.output, "output directory")->required();
    cmd->add_option("--scales", a.scales, "comma list, e.g. 1,0.5,0.25");
    cmd->add_option("--window", a.windows, "window lengths per scale, e.g. 5,3,3");
    cmd->add_option("--k", a.k, "eigenvectors per window");
    cmd->add_option("--levels", a.levels, "number of hierarchy levels to export");
    cmd->add_option("--seed", a.seed, "random seed");
    cmd->add_option("--jobs", a.jobs, "worker threads");
    cmd->add_flag("--full-video", a.full_video, "single window spanning all frames");
    cmd->add_flag("--no-reduction", a.no_reduction, "disable pre-grouping reduction");
    cmd->add_option("--set", a.sets, "override any config key (key=value)");
}

json scores_json(const stseg::Scores& s) {
    return json{{"ods", s.ods}, {"oss", s.oss}, {"ap", s.ap}};
}

json curve_json(const stseg::PrCurve& c, const std::vector<double>& thresholds) {
    json arr = json::array();
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        json p{{"precision", c.points[i].precision},
               {"recall", c.points[i].recall},
               {"f", c.points[i].f}};
        if (i < thresholds.size()) p["threshold"] = thresholds[i];
        arr.push_back(p);
    }
    return arr;
}

// Reads the per-level label volumes written by `segment`, ascending level.
std::vector<stseg::SegmentationVolume> load_levels(const std::string& dir) {
    const fs::path root = fs::path(dir) / "segmentations";
    if (!fs::is_directory(root))
        throw stseg::InputError("no segmentations/ directory under " + dir);
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory()) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    std::vector<stseg::SegmentationVolume> levels;
    for (const std::string& name : names)
        levels.push_back(stseg::read_label_volume((root / name).string()));
    if (levels.empty()) throw stseg::InputError("no level volumes under " + root.string());
    return levels;
}

int run_segment(const PipelineArgs& a, bool boundaries_only) {
    const stseg::PipelineConfig cfg = a.make_config();
    log_info("loading frames from " + a.input);
    const stseg::VideoVolume video = stseg::load_frames(a.input);
    log_info("running pipeline on " + std::to_string(video.frames) + " frames " +
             std::to_string(video.width) + "x" + std::to_string(video.height));
    json report;
    if (boundaries_only) {
        const stseg::PipelineResult res = stseg::run_boundaries(video, cfg);
        report = stseg::write_boundary_outputs(a.output, cfg, res);
    } else {
        const stseg::PipelineResult res = stseg::run_segmentation(video, cfg);
        report = stseg::write_segmentation_outputs(a.output, cfg, res);
        std::printf("basins=%d levels=%d top_regions=%d\n",
                    res.basins.basin_count, static_cast<int>(res.segmentations.size()),
                    res.segmentations.back().region_count);
    }
    std::printf("wrote %s\n", (fs::path(a.output) / "run.json").string().c_str());
    return 0;
}

struct EvalArgs {
    std::string pred;
    std::string gt;
    std::string output;
    double tol_px = -1.0;
};

int run_eval(const EvalArgs& a) {
    const stseg::GroundTruth gt = stseg::load_ground_truth(a.gt);
    const std::vector<stseg::SegmentationVolume> levels = load_levels(a.pred);
    const stseg::PrCurve bc = stseg::bpr(levels, gt, a.tol_px);
    const stseg::PrCurve vc = stseg::vpr(levels, gt);
    const stseg::Scores bs = stseg::aggregate_scores({bc});
    const stseg::Scores vs = stseg::aggregate_scores({vc});

    std::vector<double> thresholds;
    for (const auto& l : levels) thresholds.push_back(l.threshold);
    json report{{"bpr", scores_json(bs)},
                {"vpr", scores_json(vs)},
                {"bpr_curve", curve_json(bc, thresholds)},
                {"vpr_curve", curve_json(vc, thresholds)},
                {"levels", levels.size()}};
    if (!a.output.empty()) {
        std::ofstream out(a.output);
        if (!out) throw stseg::InputError("cannot write report to " + a.output);
        out << report.dump(2) << "\n";
    }
    std::printf("bpr ods=%.4f oss=%.4f ap=%.4f\n", bs.ods, bs.oss, bs.ap);
    std::printf("vpr ods=%.4f oss=%.4f ap=%.4f\n", vs.ods, vs.oss, vs.ap);
    return 0;
}

struct SynthArgs {
    std::string spec_path;
    std::string output;
    int frames = 10, height = 32, width = 32;
    double noise = 0.02;
    std::uint64_t seed = 7;
};

int run_synth(const SynthArgs& a) {
    stseg::SyntheticSpec spec;
    if (!a.spec_path.empty()) {
        std::ifstream in(a.spec_path);
        if (!in) throw stseg::InputError("cannot open spec: " + a.spec_path);
        json j;
        in >> j;
        spec = stseg::synthetic_spec_from_json(j);
    } else {
        spec = stseg::moving_rectangle_spec(a.frames, a.height, a.width, a.noise, a.seed);
    }
    const auto [video, gt] = stseg::synth_video(spec);
    stseg::write_video((fs::path(a.output) / "frames").string(), video);
    stseg::write_ground_truth((fs::path(a.output) / "gt").string(), gt);
    std::printf("wrote %d frames %dx%d to %s\n", video.frames, video.width, video.height,
                a.output.c_str());
    return 0;
}

int fail(const std::string& type, const std::string& message, int code, bool json_errors) {
    if (json_errors) {
        json j{{"error", {{"type", type}, {"message", message}, {"exit_code", code}}}};
        std::cout << j.dump() << "\n";
    } else {
        std::fprintf(stderr, "stseg: %s error: %s\n", type.c_str(), message.c_str());
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spatio-temporal hierarchical video segmentation"};
    app.require_subcommand(1);
    bool json_errors = false;
    app.add_flag("--json-errors", json_errors, "report errors as JSON on stdout");

    PipelineArgs seg_args, bnd_args;
    CLI::App* seg = app.add_subcommand("segment", "full pipeline: video -> hierarchy");
    add_pipeline_options(seg, seg_args);
    CLI::App* bnd = app.add_subcommand("boundaries", "stop after oriented boundaries");
    add_pipeline_options(bnd, bnd_args);

    EvalArgs eval_args;
    CLI::App* ev = app.add_subcommand("eval", "score outputs against ground truth");
    ev->add_option("--pred", eval_args.pred, "segment output directory")->required();
    ev->add_option("--gt", eval_args.gt, "ground-truth directory")->required();
    ev->add_option("--output", eval_args.output, "write the JSON report here");
    ev->add_option("--tol-px", eval_args.tol_px, "boundary match tolerance in pixels");

    SynthArgs synth_args;
    CLI::App* sy = app.add_subcommand("synth", "generate a synthetic sequence + GT");
    sy->add_option("--spec", synth_args.spec_path, "JSON scene description");
    sy->add_option("--output", synth_args.output, "output directory")->required();
    sy->add_option("--frames", synth_args.frames, "frame count (default scene)");
    sy->add_option("--height", synth_args.height, "frame height (default scene)");
    sy->add_option("--width", synth_args.width, "frame width (default scene)");
    sy->add_option("--noise", synth_args.noise, "noise sigma (default scene)");
    sy->add_option("--seed", synth_args.seed, "noise seed (default scene)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (seg->parsed()) return run_segment(seg_args, false);
        if (bnd->parsed()) return run_segment(bnd_args, true);
        if (ev->parsed()) return run_eval(eval_args);
        if (sy->parsed()) return run_synth(synth_args);
        return fail("config", "no subcommand given", 2, json_errors);
    } catch (const stseg::ConfigError& e) {
        return fail("config", e.what(), 2, json_errors);
    } catch (const stseg::InputError& e) {
        return fail("input", e.what(), 3, json_errors);
    } catch (const stseg::NumericError& e) {
        return fail("numeric", e.what(), 4, json_errors);
    } catch (const std::exception& e) {
        return fail("internal", e.what(), 4, json_errors);
    }
}
