// Acceptance harness: each criterion prints exactly one PASS/FAIL line with
// its pinned tolerances; the exit code is the number of failed criteria.
// Run with no arguments for all criteria, or pass criterion numbers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stseg/common.hpp"
#include "stseg/config.hpp"
#include "stseg/eigensolver.hpp"
#include "stseg/graph_reduction.hpp"
#include "stseg/laplacian.hpp"
#include "stseg/metrics.hpp"
#include "stseg/pipeline.hpp"
#include "stseg/pmi_model.hpp"
#include "stseg/sparse_matrix.hpp"
#include "stseg/synth.hpp"
#include "stseg/ucm.hpp"
#include "stseg/video_volume.hpp"
#include "stseg/watershed3d.hpp"

#include "test_util.hpp"

using namespace stseg;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Eigen::MatrixXd materialize(const NormalizedLaplacian& lap) {
    const auto n = static_cast<Eigen::Index>(lap.n());
    Eigen::MatrixXd m(n, n);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n), out(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        e(j) = 1.0;
        lap.apply(e.data(), out.data());
        m.col(j) = out;
        e(j) = 0.0;
    }
    return 0.5 * (m + m.transpose());
}

double max_principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qa(a), qb(b);
    const Eigen::MatrixXd ia = Eigen::MatrixXd::Identity(a.rows(), a.cols());
    const Eigen::MatrixXd ib = Eigen::MatrixXd::Identity(b.rows(), b.cols());
    const Eigen::MatrixXd qa_thin = qa.householderQ() * ia;
    const Eigen::MatrixXd qb_thin = qb.householderQ() * ib;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(qa_thin.transpose() * qb_thin);
    const double smin = svd.singularValues().minCoeff();
    return std::acos(std::min(1.0, std::max(-1.0, smin)));
}

// --- criterion 1: solver vs dense oracle on random graphs ------------------

bool criterion1(std::string& detail) {
    const auto t0 = std::chrono::steady_clock::now();
    const int kGraphs = 50;
    double worst_lambda = 0.0, worst_angle = 0.0;
    for (int gi = 0; gi < kGraphs; ++gi) {
        Rng rng(900 + static_cast<std::uint64_t>(gi));
        const int n = static_cast<int>(rng.uniform_int(60, 300));
        const SparseSymMatrix w =
            testutil::random_graph(n, 7000 + static_cast<std::uint64_t>(gi), 3.0);
        const NormalizedLaplacian lap(w);

        const Eigen::MatrixXd dense = materialize(lap);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);

        EigSolveOptions opt;
        opt.k = 25;
        opt.tol = 1e-9;
        opt.max_ops = 20000;
        opt.seed = 500 + static_cast<std::uint64_t>(gi);
        const EigSolveResult res = solve_smallest_k(lap, opt);
        if (!res.converged) {
            detail = "graph " + std::to_string(gi) + " (n=" + std::to_string(n) +
                     ") did not converge";
            return false;
        }
        for (int i = 0; i < 20; ++i) {
            const double d = std::abs(res.eigenvalues[static_cast<std::size_t>(i)] -
                                      es.eigenvalues()(i));
            worst_lambda = std::max(worst_lambda, d);
            if (d > 1e-8) {
                detail = "graph " + std::to_string(gi) + " lambda_" + std::to_string(i) +
                         " off by " + std::to_string(d);
                return false;
            }
        }
        // Subspace comparison cut at the widest spectral gap near 20, which
        // keeps the comparison well conditioned for arbitrary random graphs.
        int kstar = 20;
        double best_gap = -1.0;
        for (int c = 15; c <= 25; ++c) {
            const double gap = es.eigenvalues()(c) - es.eigenvalues()(c - 1);
            if (gap > best_gap) {
                best_gap = gap;
                kstar = c;
            }
        }
        const double angle = max_principal_angle(res.vectors.leftCols(kstar),
                                                 es.eigenvectors().leftCols(kstar));
        worst_angle = std::max(worst_angle, angle);
        if (angle > 1e-5) {
            detail = "graph " + std::to_string(gi) + " principal angle " +
                     std::to_string(angle) + " at k=" + std::to_string(kstar);
            return false;
        }
    }
    const double secs = seconds_since(t0);
    {
        std::ostringstream os;
        os << kGraphs << " graphs, max |dlambda|=" << worst_lambda
           << ", max angle=" << worst_angle << ", " << secs << "s";
        detail = os.str();
    }
    return secs < 60.0;
}

// --- criterion 2: reduction preserves every group-respecting cut -----------

bool criterion2(std::string& detail) {
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        Rng rng(1200 + static_cast<std::uint64_t>(trial));
        const int n = static_cast<int>(rng.uniform_int(8, 40));
        const int g = static_cast<int>(rng.uniform_int(2, std::min(10, n)));
        const SparseSymMatrix w =
            testutil::random_graph(n, 4400 + static_cast<std::uint64_t>(trial), 2.5);

        std::vector<NodeId> group_of(static_cast<std::size_t>(n));
        for (int i = 0; i < g; ++i) group_of[static_cast<std::size_t>(i)] = i;
        for (int i = g; i < n; ++i)
            group_of[static_cast<std::size_t>(i)] = rng.uniform_int(0, g - 1);

        std::vector<double> loops;
        if (trial % 2 == 0) {
            loops.resize(static_cast<std::size_t>(n));
            for (double& s : loops) s = rng.uniform(0.0, 2.0);
        }
        const GraphReduction red = reduce_graph(w, group_of, loops);

        std::vector<char> node_side(static_cast<std::size_t>(n));
        std::vector<char> group_side(static_cast<std::size_t>(g));
        for (std::uint32_t mask = 1; mask + 1 < (1u << g); ++mask) {
            for (int i = 0; i < g; ++i)
                group_side[static_cast<std::size_t>(i)] =
                    static_cast<char>((mask >> i) & 1u);
            for (int i = 0; i < n; ++i)
                node_side[static_cast<std::size_t>(i)] =
                    group_side[static_cast<std::size_t>(group_of[static_cast<std::size_t>(i)])];
            const double full = normalized_cut(w, node_side, loops);
            const double reduced =
                normalized_cut(red.reduced, group_side, red.self_loops);
            const double diff = std::abs(full - reduced);
            worst = std::max(worst, diff);
            if (diff > 1e-12) {
                std::ostringstream os;
                os << "trial " << trial << " mask " << mask << ": |" << full << " - "
                   << reduced << "| = " << diff;
                detail = os.str();
                return false;
            }
        }
    }
    std::ostringstream os;
    os << "50 graphs, every group-respecting bipartition, max |dNCut|=" << worst;
    detail = os.str();
    return true;
}

// --- criterion 3: analytic spectra -----------------------------------------

bool criterion3(std::string& detail) {
    // Two nodes, one edge: normalized-Laplacian spectrum {0, 2}.
    {
        SparseSymMatrix w = SparseSymMatrix::from_edges(2, {{0, 1, 1.7}});
        NormalizedLaplacian lap(w);
        EigSolveOptions opt;
        opt.k = 2;
        opt.tol = 1e-13;
        opt.max_ops = 500;
        const EigSolveResult res = solve_smallest_k(lap, opt);
        if (std::abs(res.eigenvalues[0] - 0.0) > 1e-12 ||
            std::abs(res.eigenvalues[1] - 2.0) > 1e-12) {
            std::ostringstream os;
            os << "two-node spectrum {" << res.eigenvalues[0] << ", "
               << res.eigenvalues[1] << "} != {0, 2} at 1e-12";
            detail = os.str();
            return false;
        }
    }
    // c components: zero eigenvalue with multiplicity exactly c.
    for (int c = 2; c <= 5; ++c) {
        std::vector<Triplet> edges;
        NodeId base = 0;
        Rng rng(77 + static_cast<std::uint64_t>(c));
        for (int comp = 0; comp < c; ++comp) {
            const int sz = static_cast<int>(rng.uniform_int(8, 14));
            const SparseSymMatrix piece = testutil::random_graph(
                sz, 300 + static_cast<std::uint64_t>(10 * c + comp), 2.0);
            for (NodeId i = 0; i < piece.n(); ++i)
                for (std::size_t e = piece.row_begin(i); e < piece.row_end(i); ++e)
                    if (piece.col(e) > i)
                        edges.push_back({base + i, base + piece.col(e), piece.val(e)});
            base += sz;
        }
        SparseSymMatrix w = SparseSymMatrix::from_edges(base, edges);
        NormalizedLaplacian lap(w);
        EigSolveOptions opt;
        opt.k = c + 3;
        opt.tol = 1e-10;
        opt.max_ops = 12000;
        const EigSolveResult res = solve_smallest_k(lap, opt);
        int zeros = 0;
        for (double ev : res.eigenvalues)
            if (ev <= 1e-9) ++zeros;
        if (zeros != c || res.eigenvalues[static_cast<std::size_t>(c)] <= 1e-4) {
            std::ostringstream os;
            os << c << " components: " << zeros << " eigenvalues <= 1e-9, next="
               << res.eigenvalues[static_cast<std::size_t>(c)];
            detail = os.str();
            return false;
        }
    }
    detail = "two-node {0,2} at 1e-12; zero multiplicity equals component count";
    return true;
}

// --- criterion 4: affinity closed forms on discrete densities --------------

GroupDensity block_density(double ll, double lh, double hl, double hh) {
    const int G = 8;
    GroupDensity d;
    d.grid = G;
    d.joint.assign(static_cast<std::size_t>(G) * G, 0.0);
    d.marginal.assign(static_cast<std::size_t>(G), 0.0);
    for (int i = 0; i < G; ++i)
        for (int j = 0; j < G; ++j) {
            const bool ihi = i >= G / 2, jhi = j >= G / 2;
            const double v = ihi ? (jhi ? hh : hl) : (jhi ? lh : ll);
            d.joint[static_cast<std::size_t>(i) * G + j] = v;
        }
    for (int i = 0; i < G; ++i) {
        double s = 0.0;
        for (int j = 0; j < G; ++j) s += d.joint[static_cast<std::size_t>(i) * G + j];
        d.marginal[static_cast<std::size_t>(i)] = s / G;
    }
    return d;
}

std::array<float, 4> feature_at(double lum, double chroma, double var) {
    // Group values: f[0]; ||(f[1]-.5, f[2]-.5)|| / 0.70710678; f[3].
    std::array<float, 4> f{};
    f[0] = static_cast<float>(lum);
    f[1] = static_cast<float>(0.5 + chroma * 0.70710678118654752);
    f[2] = 0.5f;
    f[3] = static_cast<float>(var);
    return f;
}

bool criterion4(std::string& detail) {
    const double rho = 1.25;
    PmiParams params;
    params.rho = rho;
    std::array<GroupDensity, kGroupCount> dep{
        block_density(1.6, 0.4, 0.4, 1.6), block_density(1.6, 0.4, 0.4, 1.6),
        block_density(1.6, 0.4, 0.4, 1.6)};
    const PmiModel model = PmiModel::from_group_densities(dep, params);

    const double lo = 1.5 / 8.0, hi = 5.5 / 8.0;  // cell centers of an 8-grid
    const double same = model.log_affinity(feature_at(lo, lo, lo).data(),
                                           feature_at(lo, lo, lo).data());
    const double cross = model.log_affinity(feature_at(lo, lo, lo).data(),
                                            feature_at(hi, hi, hi).data());
    const double expect_same = 3.0 * rho * std::log(1.6);
    const double expect_cross = 3.0 * rho * std::log(0.4);
    if (std::abs(same - expect_same) > 1e-6 || std::abs(cross - expect_cross) > 1e-6) {
        std::ostringstream os;
        os << "block toy: same=" << same << " (want " << expect_same
           << "), cross=" << cross << " (want " << expect_cross << ") at 1e-6";
        detail = os.str();
        return false;
    }
    const double aff = pmi_affinity(model, feature_at(lo, lo, lo).data(),
                                    feature_at(hi, hi, hi).data());
    if (std::abs(aff - std::exp(expect_cross)) > 1e-6) {
        detail = "exp form mismatch: " + std::to_string(aff);
        return false;
    }

    // Independent joint (product of marginals): PMI identically zero at rho=1.
    PmiParams ind_params;
    ind_params.rho = 1.0;
    std::array<GroupDensity, kGroupCount> ind{
        block_density(2.25, 0.75, 0.75, 0.25), block_density(2.25, 0.75, 0.75, 0.25),
        block_density(2.25, 0.75, 0.75, 0.25)};
    const PmiModel ind_model = PmiModel::from_group_densities(ind, ind_params);
    double worst_center = 0.0, worst_interior = 0.0;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
            const double a = (i + 0.5) / 8.0, b = (j + 0.5) / 8.0;
            const double v = ind_model.log_affinity(feature_at(a, a, a).data(),
                                                    feature_at(b, b, b).data());
            worst_center = std::max(worst_center, std::abs(v));
        }
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const double a = rng.uniform(0.1, 0.9), b = rng.uniform(0.1, 0.9);
        const double v = ind_model.log_affinity(feature_at(a, a, a).data(),
                                                feature_at(b, b, b).data());
        worst_interior = std::max(worst_interior, std::abs(v));
    }
    if (worst_center > 1e-9 || worst_interior > 1e-3) {
        std::ostringstream os;
        os << "independence: |PMI| center=" << worst_center
           << " (limit 1e-9), interior=" << worst_interior << " (limit 1e-3)";
        detail = os.str();
        return false;
    }
    std::ostringstream os;
    os << "block closed forms at 1e-6; independence center |PMI|=" << worst_center
       << ", interior=" << worst_interior;
    detail = os.str();
    return true;
}

// --- criterion 5: hierarchy invariants on random instances -----------------

bool criterion5(std::string& detail) {
    for (int inst = 0; inst < 100; ++inst) {
        Rng rng(5000 + static_cast<std::uint64_t>(inst));
        const int T = 1 + inst % 3;
        const int H = 6 + static_cast<int>(rng.uniform_int(0, 6));
        const int W = 6 + static_cast<int>(rng.uniform_int(0, 6));
        VolumeField surface(T, H, W);
        for (float& v : surface.v)
            v = static_cast<float>(rng.uniform_int(0, 7)) / 8.0f;
        const BasinLabeling basins = watershed3d(surface);
        ArcSet arcs = collect_arcs(basins);
        OrientedBoundaryVolume obv(T, H, W);
        for (VolumeField& ch : obv.channel)
            for (float& v : ch.v) v = static_cast<float>(rng.uniform());
        arc_weights(arcs, basins, obv);
        UcmHierarchy h = build_ucm(basins, arcs);
        normalize_saliencies(h);

        // Exact ultrametric: the stored face levels are the merge levels.
        for (std::size_t f = 0; f < arcs.faces.size(); ++f) {
            const Face& face = arcs.faces[f];
            const std::int32_t la = basins.at(face.t, face.y, face.x);
            const std::int32_t lb = face.axis == 0   ? basins.at(face.t + 1, face.y, face.x)
                                    : face.axis == 1 ? basins.at(face.t, face.y + 1, face.x)
                                                     : basins.at(face.t, face.y, face.x + 1);
            if (h.face_saliency[f] != merge_level(h.tree, la, lb)) {
                detail = "instance " + std::to_string(inst) + ": face level != merge level";
                return false;
            }
        }
        for (int trial = 0; trial < 40 && h.tree.leaves >= 3; ++trial) {
            const auto a = static_cast<std::int32_t>(rng.uniform_int(0, h.tree.leaves - 1));
            const auto b = static_cast<std::int32_t>(rng.uniform_int(0, h.tree.leaves - 1));
            const auto c = static_cast<std::int32_t>(rng.uniform_int(0, h.tree.leaves - 1));
            if (a == b || b == c || a == c) continue;
            if (merge_level(h.tree, a, c) >
                std::max(merge_level(h.tree, a, b), merge_level(h.tree, b, c))) {
                detail = "instance " + std::to_string(inst) + ": ultrametric violated";
                return false;
            }
        }

        // Nesting and exact contour/region correspondence at several levels.
        SegmentationVolume prev;
        for (const double lambda : {0.0, 0.2, 0.5, 0.8, 1.0}) {
            const SegmentationVolume seg =
                threshold_segmentation(h.tree, basins, lambda);
            for (std::size_t f = 0; f < arcs.faces.size(); ++f) {
                const Face& face = arcs.faces[f];
                const std::int32_t va = seg.at(face.t, face.y, face.x);
                const std::int32_t vb = face.axis == 0   ? seg.at(face.t + 1, face.y, face.x)
                                        : face.axis == 1 ? seg.at(face.t, face.y + 1, face.x)
                                                         : seg.at(face.t, face.y, face.x + 1);
                const bool merged = h.face_saliency[f] < lambda;
                if (merged != (va == vb)) {
                    detail = "instance " + std::to_string(inst) +
                             ": contour does not separate exactly two regions at level " +
                             std::to_string(lambda);
                    return false;
                }
            }
            if (!prev.labels.empty()) {
                std::map<std::int32_t, std::int32_t> to_coarse;
                for (std::size_t p = 0; p < seg.labels.size(); ++p) {
                    const auto it = to_coarse.find(prev.labels[p]);
                    if (it == to_coarse.end())
                        to_coarse.emplace(prev.labels[p], seg.labels[p]);
                    else if (it->second != seg.labels[p]) {
                        detail = "instance " + std::to_string(inst) + ": nesting violated";
                        return false;
                    }
                }
            }
            prev = seg;
        }
    }
    detail = "100 instances: nesting, exact ultrametric, contours separate two regions";
    return true;
}

// --- criterion 6: analytic watershed counts, bit-identical reruns ----------

bool criterion6(std::string& detail) {
    struct Case {
        VolumeField surface;
        int expected = 0;
        const char* name = "";
    };
    std::vector<Case> cases;
    {
        Case c;
        c.surface = VolumeField(1, 8, 9);
        for (int y = 0; y < 8; ++y) c.surface.at(0, y, 4) = 1.0f;
        c.expected = 2;
        c.name = "one plane";
        cases.push_back(std::move(c));
    }
    {
        Case c;
        c.surface = VolumeField(1, 9, 9);
        for (int i = 0; i < 9; ++i) {
            c.surface.at(0, 4, i) = 1.0f;
            c.surface.at(0, i, 4) = 1.0f;
        }
        c.expected = 4;
        c.name = "two planes";
        cases.push_back(std::move(c));
    }
    {
        Case c;
        c.surface = VolumeField(5, 7, 7);
        for (int t = 0; t < 5; ++t)
            for (int y = 0; y < 7; ++y)
                for (int x = 0; x < 7; ++x)
                    if (t == 2 || y == 3 || x == 3) c.surface.at(t, y, x) = 1.0f;
        c.expected = 8;
        c.name = "three planes";
        cases.push_back(std::move(c));
    }
    for (const Case& c : cases) {
        const BasinLabeling a = watershed3d(c.surface);
        if (a.basin_count != c.expected) {
            detail = std::string(c.name) + ": " + std::to_string(a.basin_count) +
                     " basins, expected " + std::to_string(c.expected);
            return false;
        }
        for (int rerun = 0; rerun < 3; ++rerun) {
            const BasinLabeling b = watershed3d(c.surface);
            if (b.labels != a.labels || b.basin_count != a.basin_count) {
                detail = std::string(c.name) + ": rerun not bit-identical";
                return false;
            }
        }
    }
    detail = "plane-separated volumes give 2/4/8 basins; reruns bit-identical";
    return true;
}

// --- criterion 7: moving rectangle end to end ------------------------------

double best_label_frame_iou(const std::vector<SegmentationVolume>& levels,
                            const GroundTruth& gt, std::int32_t gt_id) {
    // For each hierarchy level and each single predicted label, the per-frame
    // IoU against the ground-truth object, minimized over frames (the label
    // must track the object in every frame); maximized over labels and levels.
    const std::size_t hw = static_cast<std::size_t>(gt.height) * gt.width;
    const std::size_t F = gt.annotated_frames.size();
    std::vector<char> gt_mask(F * hw, 0);
    std::vector<std::int64_t> gt_frame(F, 0);
    for (std::size_t fi = 0; fi < F; ++fi) {
        const auto& m = gt.labels[0][fi];
        for (std::size_t p = 0; p < hw; ++p)
            if (m[p] == gt_id) {
                gt_mask[fi * hw + p] = 1;
                ++gt_frame[fi];
            }
    }
    double best = 0.0;
    for (const SegmentationVolume& seg : levels) {
        std::map<std::int32_t, double> min_iou;
        for (std::size_t fi = 0; fi < F; ++fi) {
            std::map<std::int32_t, std::int64_t> inter, size;
            const std::int32_t* sp = seg.frame_ptr(gt.annotated_frames[fi]);
            for (std::size_t p = 0; p < hw; ++p) {
                ++size[sp[p]];
                if (gt_mask[fi * hw + p]) ++inter[sp[p]];
            }
            std::map<std::int32_t, double> cur;
            for (const auto& [label, cnt] : inter) {
                const double u = static_cast<double>(size[label]) +
                                 static_cast<double>(gt_frame[fi]) -
                                 static_cast<double>(cnt);
                cur[label] = static_cast<double>(cnt) / u;
            }
            if (fi == 0) {
                min_iou = std::move(cur);
            } else {
                for (auto it = min_iou.begin(); it != min_iou.end();) {
                    const auto f = cur.find(it->first);
                    if (f == cur.end()) {
                        it = min_iou.erase(it);
                    } else {
                        it->second = std::min(it->second, f->second);
                        ++it;
                    }
                }
            }
        }
        for (const auto& [label, v] : min_iou) best = std::max(best, v);
    }
    return best;
}

bool criterion7(std::string& detail) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto [video, gt] = synth_video(moving_rectangle_spec(10, 32, 32, 0.02, 7));
    PipelineConfig cfg;
    cfg.set("jobs", "4");
    cfg.validate();
    const PipelineResult res = run_segmentation(video, cfg);

    const double iou = best_label_frame_iou(res.segmentations, gt, 1);
    const Scores vsc = aggregate_scores({vpr(res.segmentations, gt)});
    const double secs = seconds_since(t0);
    std::ostringstream os;
    os << "min per-frame IoU=" << iou << " (need >= 0.9), VPR ODS=" << vsc.ods
       << " (need >= 0.9), " << secs << "s (limit 300)";
    detail = os.str();
    return iou >= 0.9 && vsc.ods >= 0.9 && secs <= 300.0;
}

// --- criterion 8: windowed vs full-video scores (reported, not gated) ------

bool criterion8(std::string& detail) {
    const auto [video, gt] = synth_video(moving_rectangle_spec(6, 24, 24, 0.02, 11));
    PipelineConfig cfg;
    cfg.set("scales", "1,0.5");
    cfg.set("windows", "3,3");
    cfg.set("scale_weights", "0.6,0.4");
    cfg.set("k", "12");
    cfg.set("samples", "4000");
    cfg.set("levels", "26");
    cfg.set("jobs", "4");
    cfg.validate();
    const PipelineResult windowed = run_segmentation(video, cfg);

    PipelineConfig full = cfg;
    full.set("full_video", "true");
    const PipelineResult whole = run_segmentation(video, full);

    const Scores wb = aggregate_scores({bpr(windowed.segmentations, gt)});
    const Scores wv = aggregate_scores({vpr(windowed.segmentations, gt)});
    const Scores fb = aggregate_scores({bpr(whole.segmentations, gt)});
    const Scores fv = aggregate_scores({vpr(whole.segmentations, gt)});
    std::ostringstream os;
    os << "windowed: bpr_ods=" << wb.ods << " vpr_ods=" << wv.ods
       << "; full-video: bpr_ods=" << fb.ods << " vpr_ods=" << fv.ods
       << " (reported, not gated)";
    detail = os.str();
    return true;
}

// --- criterion 9: metric identities ----------------------------------------

bool criterion9(std::string& detail) {
    SegmentationVolume seg(3, 8, 8);
    for (int t = 0; t < 3; ++t)
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) seg.at(t, y, x) = x > 3 ? 1 : 0;
    seg.region_count = 2;

    GroundTruth gt;
    gt.frames = 3;
    gt.height = 8;
    gt.width = 8;
    gt.annotated_frames = {0, 1, 2};
    gt.annotators = {"a0", "a1"};
    gt.labels.assign(2, {});
    for (int a = 0; a < 2; ++a)
        for (int t = 0; t < 3; ++t) {
            const std::int32_t* p = seg.frame_ptr(t);
            gt.labels[static_cast<std::size_t>(a)].emplace_back(p, p + 64);
        }

    const PrCurve b = bpr({seg}, gt);
    const PrCurve v = vpr({seg}, gt);
    if (b.points[0].precision != 1.0 || b.points[0].recall != 1.0 ||
        v.points[0].precision != 1.0 || v.points[0].recall != 1.0) {
        std::ostringstream os;
        os << "self-eval not exactly 1: bpr=(" << b.points[0].precision << ","
           << b.points[0].recall << ") vpr=(" << v.points[0].precision << ","
           << v.points[0].recall << ")";
        detail = os.str();
        return false;
    }

    // Degenerate inputs follow the pinned formulas exactly.
    SegmentationVolume flat(3, 8, 8);
    flat.region_count = 1;
    const PrCurve empty_pred = bpr({flat}, gt);
    if (empty_pred.points[0].precision != 1.0 || empty_pred.points[0].recall != 0.0 ||
        empty_pred.points[0].f != 0.0) {
        detail = "empty prediction must give precision 1, recall 0, F 0";
        return false;
    }
    GroundTruth flat_gt = gt;
    for (auto& ann : flat_gt.labels)
        for (auto& m : ann) std::fill(m.begin(), m.end(), 0);
    const PrCurve both_empty = bpr({flat}, flat_gt);
    if (both_empty.points[0].precision != 1.0 || both_empty.points[0].recall != 1.0) {
        detail = "mutually empty boundaries must give precision 1, recall 1";
        return false;
    }
    const PrCurve flat_vpr = vpr({flat}, flat_gt);
    if (flat_vpr.points[0].precision != 1.0 || flat_vpr.points[0].recall != 1.0) {
        detail = "identical single-region volumes must give vpr 1";
        return false;
    }
    detail = "self-eval bpr/vpr exactly 1.0; degenerate formulas hold exactly";
    return true;
}

// --- criterion 10: constant input -------------------------------------------

bool criterion10(std::string& detail) {
    VideoVolume v(5, 80, 80, 3);
    for (int t = 0; t < 5; ++t)
        for (int y = 0; y < 80; ++y)
            for (int x = 0; x < 80; ++x) {
                v.at(t, y, x, 0) = 0.42f;
                v.at(t, y, x, 1) = 0.58f;
                v.at(t, y, x, 2) = 0.63f;
            }
    PipelineConfig cfg;
    cfg.set("scales", "1");
    cfg.set("windows", "5");
    cfg.set("scale_weights", "1");
    cfg.set("reduction", "false");
    cfg.set("k", "16");
    cfg.set("tol", "1e-8");
    cfg.set("max_ops", "8000");
    cfg.set("levels", "11");
    cfg.set("jobs", "4");
    cfg.validate();
    const PipelineResult res = run_segmentation(v, cfg);

    float max_temporal = 0.0f;
    for (float x : res.boundary.channel[OrientedBoundaryVolume::kSpatial].v)
        max_temporal = std::max(max_temporal, std::fabs(x));
    bool quantized_zero = true;
    for (float x : res.boundary.channel[OrientedBoundaryVolume::kSpatial].v)
        if (std::lround(static_cast<double>(x) * 65535.0) != 0) quantized_zero = false;
    const std::int32_t top_regions = res.segmentations.back().region_count;
    std::ostringstream os;
    os << "max temporal=" << max_temporal
       << " (limit 1e-6), quantized zero=" << (quantized_zero ? "yes" : "no")
       << ", top-level regions=" << top_regions << " (need 1)";
    detail = os.str();
    return max_temporal <= 1e-6f && quantized_zero && top_regions == 1;
}

struct Criterion {
    int id;
    const char* description;
    bool (*fn)(std::string&);
};

const Criterion kCriteria[] = {
    {1, "windowed eigensolver matches a dense oracle on 50 random graphs", criterion1},
    {2, "graph reduction preserves every group-respecting normalized cut", criterion2},
    {3, "analytic spectra: two-node {0,2} and component-count zero multiplicity",
     criterion3},
    {4, "affinity matches discrete closed forms; independence gives zero", criterion4},
    {5, "hierarchies nest, are exactly ultrametric, contours separate two regions",
     criterion5},
    {6, "plane-separated volumes yield analytic basin counts, bit-identical reruns",
     criterion6},
    {7, "moving rectangle: object recovered as one spatio-temporal label", criterion7},
    {8, "windowed vs full-video benchmark scores emitted", criterion8},
    {9, "benchmark metrics score exactly 1.0 on self-evaluation", criterion9},
    {10, "constant input: silent temporal channel and a single top-level region",
     criterion10},
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

    int failures = 0;
    for (const Criterion& c : kCriteria) {
        if (!wanted.empty() &&
            std::find(wanted.begin(), wanted.end(), c.id) == wanted.end())
            continue;
        std::string detail;
        bool ok = false;
        try {
            ok = c.fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
            ok = false;
        }
        std::cout << "criterion " << c.id << (ok ? " PASS - " : " FAIL - ")
                  << c.description;
        if (!detail.empty()) std::cout << " [" << detail << "]";
        std::cout << std::endl;
        if (!ok) ++failures;
    }
    return failures;
}
