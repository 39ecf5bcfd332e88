#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "stseg/ground_truth.hpp"
#include "stseg/video_volume.hpp"

namespace stseg {

struct PrPoint {
  double precision = 0.0, recall = 0.0, f = 0.0;
};

struct PrCurve {
  std::vector<PrPoint> points;  // one per hierarchy level
};

struct Scores {
  double ods = 0.0, oss = 0.0, ap = 0.0;
};

struct BenchScores {
  Scores bpr, vpr;
};

inline double f_measure(double p, double r) {
  return p + r > 0 ? 2.0 * p * r / (p + r) : 0.0;
}

inline double default_boundary_tolerance(int height, int width) {
  return 0.0075 * std::sqrt(static_cast<double>(height) * height +
                            static_cast<double>(width) * width);
}

namespace detail {

// Boundary pixels of one frame: label differs from the right or down
// neighbor.
inline std::vector<std::pair<int, int>> boundary_pixels(const std::int32_t* labels,
                                                        int h, int w) {
  std::vector<std::pair<int, int>> out;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::int32_t l = labels[static_cast<std::size_t>(y) * w + x];
      if ((x + 1 < w && labels[static_cast<std::size_t>(y) * w + x + 1] != l) ||
          (y + 1 < h && labels[(static_cast<std::size_t>(y) + 1) * w + x] != l))
        out.emplace_back(y, x);
    }
  return out;
}

// Maximum one-to-one matching size between two point sets under a Euclidean
// distance tolerance (augmenting-path bipartite matching).
inline int match_boundaries(const std::vector<std::pair<int, int>>& a,
                            const std::vector<std::pair<int, int>>& b,
                            double tol) {
  if (a.empty() || b.empty()) return 0;
  const double tol2 = tol * tol;
  std::vector<std::vector<int>> adj(a.size());
  // Bucket b's points on a coarse grid for the candidate search.
  const int cell = std::max(1, static_cast<int>(std::floor(tol)) + 1);
  std::map<std::pair<int, int>, std::vector<int>> grid;
  for (std::size_t j = 0; j < b.size(); ++j)
    grid[{b[j].first / cell, b[j].second / cell}].push_back(static_cast<int>(j));
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int gy = a[i].first / cell, gx = a[i].second / cell;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        auto it = grid.find({gy + dy, gx + dx});
        if (it == grid.end()) continue;
        for (int j : it->second) {
          const double ddy = a[i].first - b[static_cast<std::size_t>(j)].first;
          const double ddx = a[i].second - b[static_cast<std::size_t>(j)].second;
          if (ddy * ddy + ddx * ddx <= tol2) adj[i].push_back(j);
        }
      }
  }
  std::vector<int> match_b(b.size(), -1);
  std::vector<char> seen;
  std::function<bool(int)> augment = [&](int i) -> bool {
    for (int j : adj[static_cast<std::size_t>(i)]) {
      if (seen[static_cast<std::size_t>(j)]) continue;
      seen[static_cast<std::size_t>(j)] = 1;
      if (match_b[static_cast<std::size_t>(j)] < 0 ||
          augment(match_b[static_cast<std::size_t>(j)])) {
        match_b[static_cast<std::size_t>(j)] = i;
        return true;
      }
    }
    return false;
  };
  int matched = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    seen.assign(b.size(), 0);
    if (augment(static_cast<int>(i))) ++matched;
  }
  return matched;
}

}  // namespace detail

// Boundary precision-recall over the hierarchy levels. Per annotated frame,
// predicted boundary pixels are matched one-to-one within tol_px: precision
// counts matches against the union of all annotators' boundaries, recall
// takes, per frame, the annotator with the highest matched fraction; both are
// pooled over frames as count ratios.
inline PrCurve bpr(const std::vector<SegmentationVolume>& levels,
                   const GroundTruth& gt, double tol_px = -1.0) {
  if (gt.empty()) throw InputError("bpr: empty ground truth");
  if (levels.empty()) throw InputError("bpr: no segmentation levels");
  const int H = gt.height, W = gt.width;
  if (tol_px < 0) tol_px = default_boundary_tolerance(H, W);

  // Ground-truth boundary sets, per annotator and per frame, plus unions.
  const std::size_t A = gt.annotators.size();
  const std::size_t F = gt.annotated_frames.size();
  std::vector<std::vector<std::vector<std::pair<int, int>>>> gtb(
      A, std::vector<std::vector<std::pair<int, int>>>(F));
  std::vector<std::vector<std::pair<int, int>>> gtu(F);
  for (std::size_t fi = 0; fi < F; ++fi) {
    std::vector<std::vector<char>> mask(static_cast<std::size_t>(H),
                                        std::vector<char>(static_cast<std::size_t>(W), 0));
    for (std::size_t a = 0; a < A; ++a) {
      gtb[a][fi] = detail::boundary_pixels(gt.labels[a][fi].data(), H, W);
      for (const auto& [y, x] : gtb[a][fi]) mask[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] = 1;
    }
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x)
        if (mask[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)])
          gtu[fi].emplace_back(y, x);
  }

  PrCurve curve;
  for (const SegmentationVolume& seg : levels) {
    if (seg.height != H || seg.width != W)
      throw InputError("bpr: segmentation/ground-truth size mismatch");
    double tp = 0.0, pred_total = 0.0, matched_gt = 0.0, gt_total = 0.0;
    for (std::size_t fi = 0; fi < F; ++fi) {
      const int t = gt.annotated_frames[fi];
      if (t < 0 || t >= seg.frames) throw InputError("bpr: annotated frame out of range");
      const auto pred = detail::boundary_pixels(seg.frame_ptr(t), H, W);
      pred_total += static_cast<double>(pred.size());
      tp += detail::match_boundaries(pred, gtu[fi], tol_px);
      double best_frac = -1.0;
      double best_matched = 0.0, best_count = 0.0;
      for (std::size_t a = 0; a < A; ++a) {
        const auto& g = gtb[a][fi];
        const double m = detail::match_boundaries(g, pred, tol_px);
        const double frac = g.empty() ? 1.0 : m / static_cast<double>(g.size());
        if (frac > best_frac) {
          best_frac = frac;
          best_matched = m;
          best_count = static_cast<double>(g.size());
        }
      }
      matched_gt += best_matched;
      gt_total += best_count;
    }
    PrPoint pt;
    pt.precision = pred_total > 0 ? tp / pred_total : 1.0;
    pt.recall = gt_total > 0 ? matched_gt / gt_total : 1.0;
    pt.f = f_measure(pt.precision, pt.recall);
    curve.points.push_back(pt);
  }
  return curve;
}

// Volume precision-recall: per annotator, precision = (1/N) sum over
// predicted segments of their best ground-truth overlap, recall the converse,
// over annotated frames only; averaged over annotators. Spatio-temporal
// labels matter: the same label across frames is one segment.
inline PrCurve vpr(const std::vector<SegmentationVolume>& levels,
                   const GroundTruth& gt) {
  if (gt.empty()) throw InputError("vpr: empty ground truth");
  if (levels.empty()) throw InputError("vpr: no segmentation levels");
  const int H = gt.height, W = gt.width;
  const std::size_t A = gt.annotators.size();
  const std::size_t F = gt.annotated_frames.size();
  const double N = static_cast<double>(F) * H * W;

  PrCurve curve;
  for (const SegmentationVolume& seg : levels) {
    if (seg.height != H || seg.width != W)
      throw InputError("vpr: segmentation/ground-truth size mismatch");
    double psum = 0.0, rsum = 0.0;
    for (std::size_t a = 0; a < A; ++a) {
      std::map<std::pair<std::int32_t, std::int32_t>, std::int64_t> inter;
      for (std::size_t fi = 0; fi < F; ++fi) {
        const int t = gt.annotated_frames[fi];
        if (t < 0 || t >= seg.frames)
          throw InputError("vpr: annotated frame out of range");
        const std::int32_t* sp = seg.frame_ptr(t);
        const auto& gm = gt.labels[a][fi];
        for (std::size_t p = 0; p < gm.size(); ++p) ++inter[{sp[p], gm[p]}];
      }
      std::map<std::int32_t, std::int64_t> best_s, best_g;
      for (const auto& [key, cnt] : inter) {
        auto& bs = best_s[key.first];
        bs = std::max(bs, cnt);
        auto& bg = best_g[key.second];
        bg = std::max(bg, cnt);
      }
      double p = 0.0, r = 0.0;
      for (const auto& [s, cnt] : best_s) p += static_cast<double>(cnt);
      for (const auto& [g, cnt] : best_g) r += static_cast<double>(cnt);
      psum += p / N;
      rsum += r / N;
    }
    PrPoint pt;
    pt.precision = psum / static_cast<double>(A);
    pt.recall = rsum / static_cast<double>(A);
    pt.f = f_measure(pt.precision, pt.recall);
    curve.points.push_back(pt);
  }
  return curve;
}

// ODS: best mean-F at one level shared across sequences; OSS: mean of each
// sequence's best F; AP: trapezoidal area under the recall-sorted curve of
// level-wise mean precision/recall, with the curve extended to recall 0.
inline Scores aggregate_scores(const std::vector<PrCurve>& sequences) {
  if (sequences.empty()) throw InputError("aggregate_scores: no sequences");
  const std::size_t L = sequences[0].points.size();
  for (const PrCurve& c : sequences)
    if (c.points.size() != L)
      throw InputError("aggregate_scores: level count mismatch across sequences");
  Scores sc;
  for (std::size_t l = 0; l < L; ++l) {
    double mf = 0.0;
    for (const PrCurve& c : sequences) mf += c.points[l].f;
    sc.ods = std::max(sc.ods, mf / static_cast<double>(sequences.size()));
  }
  for (const PrCurve& c : sequences) {
    double best = 0.0;
    for (const PrPoint& p : c.points) best = std::max(best, p.f);
    sc.oss += best / static_cast<double>(sequences.size());
  }
  std::vector<std::pair<double, double>> rp;  // (recall, precision)
  for (std::size_t l = 0; l < L; ++l) {
    double mr = 0.0, mp = 0.0;
    for (const PrCurve& c : sequences) {
      mr += c.points[l].recall;
      mp += c.points[l].precision;
    }
    rp.emplace_back(mr / static_cast<double>(sequences.size()),
                    mp / static_cast<double>(sequences.size()));
  }
  std::sort(rp.begin(), rp.end());
  double ap = 0.0;
  double prev_r = 0.0, prev_p = rp.empty() ? 0.0 : rp.front().second;
  for (const auto& [r, p] : rp) {
    ap += 0.5 * (p + prev_p) * (r - prev_r);
    prev_r = r;
    prev_p = p;
  }
  sc.ap = ap;
  return sc;
}

}  // namespace stseg
