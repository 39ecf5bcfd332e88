#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stseg/affinity_graph.hpp"
#include "stseg/common.hpp"
#include "stseg/config.hpp"
#include "stseg/graph_reduction.hpp"
#include "stseg/oriented_boundaries.hpp"
#include "stseg/pair_sampling.hpp"
#include "stseg/pmi_model.hpp"
#include "stseg/pre_grouping.hpp"
#include "stseg/resample.hpp"
#include "stseg/temporal_windows.hpp"
#include "stseg/ucm.hpp"
#include "stseg/video_volume.hpp"
#include "stseg/volume_io.hpp"
#include "stseg/watershed3d.hpp"

namespace stseg {

struct ScaleReport {
    double scale = 1.0;
    int frames = 0, height = 0, width = 0;
    int window_length = 0;
    int window_count = 0;
    int converged_windows = 0;
    long long operator_applications = 0;
    bool reduced = false;
    double theta_b = 0.0;
    double reduction_factor = 1.0;
    bool skipped = false;  // scale dropped because the frame got too small
};

struct PipelineResult {
    OrientedBoundaryVolume boundary;  // multiscale aggregate, input resolution
    VolumeField motion;
    BasinLabeling basins;
    ArcSet arcs;
    UcmHierarchy hierarchy;  // saliencies normalized to (0, 1)
    double saliency_scale = 1.0;
    UcmRaster raster;
    std::vector<double> thresholds;
    std::vector<SegmentationVolume> segmentations;
    std::vector<ScaleReport> scale_reports;
    std::vector<std::pair<std::string, double>> timings_ms;
};

namespace detail {

class StageClock {
  public:
    explicit StageClock(std::vector<std::pair<std::string, double>>& sink)
        : sink_(sink), last_(std::chrono::steady_clock::now()) {}

    void lap(const std::string& name) {
        const auto now = std::chrono::steady_clock::now();
        sink_.emplace_back(
            name, std::chrono::duration<double, std::milli>(now - last_).count());
        last_ = now;
    }

  private:
    std::vector<std::pair<std::string, double>>& sink_;
    std::chrono::steady_clock::time_point last_;
};

// Eigen-stack computation for one scale. The returned boundary volume lives
// at the scale's own resolution; the caller upsamples during aggregation.
inline OrientedBoundaryVolume run_scale(const VideoVolume& input, std::size_t si,
                                        const PipelineConfig& cfg, ScaleReport& rep) {
    const int factor = static_cast<int>(std::lround(1.0 / cfg.scales[si]));
    const VideoVolume* src = &input;
    VideoVolume down;
    if (factor > 1) {
        down = downsample(input, factor);
        src = &down;
    }
    const int T = src->frames, H = src->height, W = src->width;
    rep.scale = cfg.scales[si];
    rep.frames = T;
    rep.height = H;
    rep.width = W;
    if (H < 8 || W < 8) {
        rep.skipped = true;
        return {};
    }

    // Per-frame affinity model from sampled feature pairs.
    PairSamplingParams samp{cfg.d0, cfg.d_max, cfg.mu_d, cfg.sigma_d};
    PmiParams pmi;
    pmi.rho = cfg.rho;
    pmi.grid = cfg.grid;
    std::vector<PmiModel> models(static_cast<std::size_t>(T));
    parallel_for(static_cast<std::size_t>(T), cfg.jobs, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t t = lo; t < hi; ++t) {
            const FeatureField ff = compute_features(*src, static_cast<int>(t));
            const PairSampleSet ps = sample_pairs(
                ff, cfg.samples, mix_seed(cfg.seed, 1000 + si, t), samp);
            models[t] = PmiModel::fit(ps, pmi);
        }
    });

    AffinityParams apar;
    apar.r_intra = cfg.r_intra;
    apar.r_inter = cfg.r_inter;
    apar.clamp_log = cfg.clamp_log;
    apar.reflect_boundary = cfg.temporal_boundary == "reflect";
    FrameBlockCache cache(*src, models, apar, cfg.jobs);

    // Pre-grouping reduction at the finest scale only: coarser scales are
    // already small, and the grouping there would erase real structure.
    const bool reduce = cfg.reduction && si == 0;
    PreGrouping pg;
    if (reduce) {
        PreGroupingParams pgp;
        pgp.prior_sigma = cfg.prior_sigma;
        pgp.smooth_sigma = cfg.prior_smooth_sigma;
        pgp.target_reduction = cfg.target_reduction;
        pgp.theta_b = cfg.theta_b;
        std::vector<std::vector<float>> priors(static_cast<std::size_t>(T));
        parallel_for(static_cast<std::size_t>(T), cfg.jobs,
                     [&](std::size_t lo, std::size_t hi) {
                         for (std::size_t t = lo; t < hi; ++t)
                             priors[t] = boundary_prior(cache.features(static_cast<int>(t)), pgp);
                     });
        pg = pre_group(priors, H, W, pgp, cfg.jobs);
        rep.reduced = true;
        rep.theta_b = pg.theta_b;
        rep.reduction_factor = pg.reduction_factor;
    }

    const std::size_t hw = static_cast<std::size_t>(H) * W;
    WindowProblemBuilder builder = [&](const TemporalWindow& win) {
        WindowProblem wp;
        wp.len = win.len;
        wp.height = H;
        wp.width = W;
        SparseSymMatrix w;
        std::vector<double> self_loops;
        NodeMap map;
        cache.assemble(win.t0, win.t0 + win.len, w, self_loops, map);
        wp.pixel_node.resize(static_cast<std::size_t>(win.len));
        if (!reduce) {
            for (int rel = 0; rel < win.len; ++rel) {
                auto& pn = wp.pixel_node[static_cast<std::size_t>(rel)];
                pn.resize(hw);
                std::iota(pn.begin(), pn.end(), static_cast<NodeId>(rel) * hw);
            }
            wp.w = std::move(w);
            wp.self_loops = std::move(self_loops);
            return wp;
        }
        std::vector<NodeId> group_of(static_cast<std::size_t>(win.len) * hw);
        NodeId offset = 0;
        for (int rel = 0; rel < win.len; ++rel) {
            const FrameGroups& fg = pg.frames[static_cast<std::size_t>(win.t0 + rel)];
            auto& pn = wp.pixel_node[static_cast<std::size_t>(rel)];
            pn.resize(hw);
            for (std::size_t p = 0; p < hw; ++p) {
                const NodeId g = offset + fg.group_of[p];
                group_of[static_cast<std::size_t>(rel) * hw + p] = g;
                pn[p] = g;
            }
            offset += fg.group_count;
        }
        GraphReduction red = reduce_graph(w, group_of, self_loops);
        wp.w = std::move(red.reduced);
        wp.self_loops = std::move(red.self_loops);
        return wp;
    };

    const int wlen = cfg.windows[si];
    const std::vector<TemporalWindow> schedule =
        cfg.full_video ? std::vector<TemporalWindow>{{0, T}} : window_schedule(T, wlen);
    rep.window_length = cfg.full_video ? T : wlen;
    rep.window_count = static_cast<int>(schedule.size());

    EigSolveOptions opt;
    opt.k = cfg.k;
    opt.tol = cfg.tol;
    opt.max_ops = cfg.max_ops;
    opt.block_pad = cfg.block_pad;
    EigenStack stack =
        solve_windows(builder, schedule, T, H, W, opt, mix_seed(cfg.seed, 2000 + si), cfg.jobs);
    stack.scale = cfg.scales[si];
    for (const WindowEigen& we : stack.windows) {
        if (we.converged) ++rep.converged_windows;
        rep.operator_applications += we.operator_applications;
    }

    BoundaryParams bpar;
    bpar.sigma_f = cfg.sigma_f;
    bpar.lambda_floor = cfg.lambda_floor;
    bpar.percentile = cfg.percentile;
    return oriented_gradients(stack, bpar, cfg.jobs);
}

}  // namespace detail

// Oriented boundary stage alone: per scale
// sample -> fit -> graph -> windowed eigensolve -> gradients, then the
// weighted multiscale aggregate at input resolution.
inline PipelineResult run_boundaries(const VideoVolume& input, const PipelineConfig& cfg) {
    cfg.validate();
    if (input.frames < 1) throw InputError("pipeline: empty video");
    if (input.height < 8 || input.width < 8)
        throw InputError("pipeline: input frames must be at least 8x8");

    PipelineResult res;
    detail::StageClock clock(res.timings_ms);

    std::vector<OrientedBoundaryVolume> per_scale(cfg.scales.size());
    res.scale_reports.resize(cfg.scales.size());
    for (std::size_t si = 0; si < cfg.scales.size(); ++si) {
        per_scale[si] = detail::run_scale(input, si, cfg, res.scale_reports[si]);
        clock.lap("scale_" + std::to_string(si));
    }

    std::vector<const OrientedBoundaryVolume*> kept;
    std::vector<double> weights;
    for (std::size_t si = 0; si < per_scale.size(); ++si) {
        if (res.scale_reports[si].skipped) continue;
        kept.push_back(&per_scale[si]);
        weights.push_back(cfg.scale_weights[si]);
    }
    if (kept.empty()) throw InputError("pipeline: all scales were skipped");
    res.boundary = multiscale_aggregate(kept, weights, input.height, input.width);
    res.motion = motion_boundaries(res.boundary);
    clock.lap("aggregate");
    return res;
}

// Full pipeline: boundaries, then 3D watershed -> hierarchy -> level cuts.
inline PipelineResult run_segmentation(const VideoVolume& input, const PipelineConfig& cfg) {
    PipelineResult res = run_boundaries(input, cfg);
    detail::StageClock clock(res.timings_ms);

    res.basins = watershed3d(res.boundary, cfg.temporal_anisotropy);
    clock.lap("watershed");

    res.arcs = collect_arcs(res.basins);
    arc_weights(res.arcs, res.basins, res.boundary);
    res.hierarchy = build_ucm(res.basins, res.arcs);
    res.saliency_scale = normalize_saliencies(res.hierarchy);
    res.raster = rasterize_ucm(res.hierarchy.tree, res.basins, res.arcs,
                               res.hierarchy.face_saliency);
    clock.lap("hierarchy");

    res.thresholds.resize(static_cast<std::size_t>(cfg.levels));
    for (int i = 0; i < cfg.levels; ++i)
        res.thresholds[static_cast<std::size_t>(i)] =
            static_cast<double>(i) / (cfg.levels - 1);
    res.segmentations.resize(res.thresholds.size());
    parallel_for(res.thresholds.size(), cfg.jobs, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            res.segmentations[i] =
                threshold_segmentation(res.hierarchy.tree, res.basins, res.thresholds[i]);
            res.segmentations[i].threshold = res.thresholds[i];
        }
    });
    clock.lap("levels");
    return res;
}

namespace detail {

inline nlohmann::json run_report(const PipelineConfig& cfg, const PipelineResult& res) {
    nlohmann::json j;
    j["config"] = cfg.to_json();
    nlohmann::json scales = nlohmann::json::array();
    for (const ScaleReport& r : res.scale_reports) {
        scales.push_back({{"scale", r.scale},
                          {"frames", r.frames},
                          {"height", r.height},
                          {"width", r.width},
                          {"skipped", r.skipped},
                          {"window_length", r.window_length},
                          {"window_count", r.window_count},
                          {"converged_windows", r.converged_windows},
                          {"operator_applications", r.operator_applications},
                          {"reduced", r.reduced},
                          {"theta_b", r.theta_b},
                          {"reduction_factor", r.reduction_factor}});
    }
    j["scales"] = scales;
    nlohmann::json timings = nlohmann::json::object();
    for (const auto& [name, ms] : res.timings_ms) timings[name] = ms;
    j["timings_ms"] = timings;
    if (res.basins.basin_count > 0) {
        j["basins"] = res.basins.basin_count;
        j["saliency_scale"] = res.saliency_scale;
        j["thresholds"] = res.thresholds;
        nlohmann::json regions = nlohmann::json::array();
        for (const SegmentationVolume& s : res.segmentations) regions.push_back(s.region_count);
        j["regions_per_level"] = regions;
    }
    return j;
}

inline std::string level_dir_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "level_%03zu", i);
    return buf;
}

}  // namespace detail

// Writes boundary outputs: one quantized scalar volume per oriented channel
// plus the motion-boundary volume, and the run report.
inline nlohmann::json write_boundary_outputs(const std::string& dir,
                                             const PipelineConfig& cfg,
                                             const PipelineResult& res) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    for (int c = 0; c < OrientedBoundaryVolume::kChannels; ++c) {
        const std::string name =
            c < OrientedBoundaryVolume::kSpatial ? "orient_" + std::to_string(c) : "temporal";
        write_outputs((fs::path(dir) / "boundary" / name).string(),
                      res.boundary.channel[static_cast<std::size_t>(c)], "boundary");
    }
    write_outputs((fs::path(dir) / "motion").string(), res.motion, "boundary");
    nlohmann::json report = detail::run_report(cfg, res);
    std::ofstream out(fs::path(dir) / "run.json");
    out << report.dump(2) << "\n";
    return report;
}

// Writes segmentation outputs: per-level label volumes, the hierarchy rasters
// (spatial on the doubled grid, temporal per frame pair), the merge tree, and
// the run report.
inline nlohmann::json write_segmentation_outputs(const std::string& dir,
                                                 const PipelineConfig& cfg,
                                                 const PipelineResult& res) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    for (std::size_t i = 0; i < res.segmentations.size(); ++i)
        write_outputs((fs::path(dir) / "segmentations" / detail::level_dir_name(i)).string(),
                      res.segmentations[i]);
    write_outputs((fs::path(dir) / "ucm" / "spatial").string(), res.raster.spatial, "ucm");
    write_outputs((fs::path(dir) / "ucm" / "temporal").string(), res.raster.temporal, "ucm");
    {
        std::ofstream out(fs::path(dir) / "merge_tree.json");
        out << merge_tree_json(res.hierarchy.tree).dump(2) << "\n";
    }
    nlohmann::json report = detail::run_report(cfg, res);
    std::ofstream out(fs::path(dir) / "run.json");
    out << report.dump(2) << "\n";
    return report;
}

}  // namespace stseg
