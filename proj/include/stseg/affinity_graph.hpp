#pragma once

#include <cmath>
#include <vector>

#include "stseg/common.hpp"
#include "stseg/features.hpp"
#include "stseg/pmi_model.hpp"
#include "stseg/sparse_matrix.hpp"
#include "stseg/video_volume.hpp"

namespace stseg {

// Bijection voxel <-> node id for a frame range [t0, t0+len), frame-major.
struct NodeMap {
  int t0 = 0;
  int len = 0;
  int height = 0;
  int width = 0;

  NodeId n() const { return static_cast<NodeId>(len) * height * width; }
  NodeId node_of(int t, int y, int x) const {
    return (static_cast<NodeId>(t - t0) * height + y) * width + x;
  }
  VoxelIndex voxel_of(NodeId id) const {
    const NodeId hw = static_cast<NodeId>(height) * width;
    VoxelIndex v;
    v.t = t0 + static_cast<int>(id / hw);
    v.y = static_cast<int>((id % hw) / width);
    v.x = static_cast<int>(id % width);
    return v;
  }
};

struct AffinityParams {
  double r_intra = 5.0;   // intra-frame connection radius (pixels)
  double r_inter = 3.0;   // inter-frame spatial radius (pixels)
  double clamp_log = 10.0;  // log-affinity clamp: weights in [e^-c, e^c]
  bool reflect_boundary = true;  // mirrored temporal boundary condition
};

namespace detail {

// Offsets (dy,dx) with 0 < dy^2+dx^2 <= r^2, keeping one of each +/- pair
// (lexicographically positive representative).
inline std::vector<std::pair<int, int>> half_disk(double r) {
  std::vector<std::pair<int, int>> out;
  const int ri = static_cast<int>(std::floor(r));
  for (int dy = -ri; dy <= ri; ++dy)
    for (int dx = -ri; dx <= ri; ++dx) {
      if (dy == 0 && dx == 0) continue;
      if (dy * dy + dx * dx > r * r) continue;
      if (dy > 0 || (dy == 0 && dx > 0)) out.emplace_back(dy, dx);
    }
  return out;
}

// All offsets with dy^2+dx^2 <= r^2 including (0,0).
inline std::vector<std::pair<int, int>> full_disk(double r) {
  std::vector<std::pair<int, int>> out;
  const int ri = static_cast<int>(std::floor(r));
  for (int dy = -ri; dy <= ri; ++dy)
    for (int dx = -ri; dx <= ri; ++dx)
      if (dy * dy + dx * dx <= r * r) out.emplace_back(dy, dx);
  return out;
}

}  // namespace detail

// Precomputed per-frame affinity blocks in frame-local pixel ids. Assembling
// any frame range is then pure concatenation with id offsets, so windowed
// solves never re-evaluate the affinity model.
//
// Blocks per frame t:
//  - intra: unordered pixel pairs within frame t at distance <= r_intra,
//    weight from model t;
//  - inter: pairs (p in t, q in t+1) at spatial distance <= r_inter, weight =
//    mean of the evaluations under model t and model t+1 (the two directions
//    of the temporal edge);
//  - mirror / mirror_diag: the folded edges of a virtual reflected neighbor
//    frame (a copy of frame t wired like a real temporal neighbor). Applied
//    at the first and last frame of a range, this mirrored boundary gives
//    every frame the same temporal degree profile, which keeps the
//    eigenvectors of a static video exactly constant in time.
class FrameBlockCache {
 public:
  FrameBlockCache(const VideoVolume& v, const std::vector<PmiModel>& models,
                  const AffinityParams& params, int jobs = 1)
      : height_(v.height), width_(v.width), frames_(v.frames), params_(params) {
    if (static_cast<int>(models.size()) != v.frames)
      throw InputError("FrameBlockCache: need one model per frame");
    features_.resize(static_cast<std::size_t>(v.frames));
    intra_.resize(static_cast<std::size_t>(v.frames));
    inter_.resize(static_cast<std::size_t>(v.frames));
    mirror_.resize(static_cast<std::size_t>(v.frames));
    mirror_diag_.resize(static_cast<std::size_t>(v.frames));

    parallel_for(static_cast<std::size_t>(v.frames), jobs,
                 [&](std::size_t lo, std::size_t hi) {
                   for (std::size_t t = lo; t < hi; ++t)
                     features_[t] = compute_features(v, static_cast<int>(t));
                 });
    parallel_for(static_cast<std::size_t>(v.frames), jobs,
                 [&](std::size_t lo, std::size_t hi) {
                   for (std::size_t t = lo; t < hi; ++t)
                     build_frame(static_cast<int>(t), models);
                 });
  }

  int frames() const { return frames_; }
  int height() const { return height_; }
  int width() const { return width_; }
  const FeatureField& features(int t) const { return features_[static_cast<std::size_t>(t)]; }

  // Assembles the symmetric affinity matrix over frames [t0, t1) with
  // frame-major node ids. Self-loops (from the mirrored boundary) are
  // returned separately; they contribute to degrees, not to cuts.
  void assemble(int t0, int t1, SparseSymMatrix& w, std::vector<double>& self_loops,
                NodeMap& map) const {
    if (t0 < 0 || t1 > frames_ || t0 >= t1)
      throw InputError("FrameBlockCache::assemble: bad frame range");
    map.t0 = t0;
    map.len = t1 - t0;
    map.height = height_;
    map.width = width_;
    const NodeId hw = static_cast<NodeId>(height_) * width_;
    const NodeId n = map.n();

    std::vector<Triplet> edges;
    std::size_t budget = 0;
    for (int t = t0; t < t1; ++t) {
      budget += intra_[static_cast<std::size_t>(t)].size();
      if (t + 1 < t1) budget += inter_[static_cast<std::size_t>(t)].size();
    }
    budget += mirror_[static_cast<std::size_t>(t0)].size() +
              mirror_[static_cast<std::size_t>(t1 - 1)].size();
    edges.reserve(budget);

    for (int t = t0; t < t1; ++t) {
      const NodeId base = static_cast<NodeId>(t - t0) * hw;
      for (const Triplet& e : intra_[static_cast<std::size_t>(t)])
        edges.push_back({base + e.i, base + e.j, e.w});
      if (t + 1 < t1)
        for (const Triplet& e : inter_[static_cast<std::size_t>(t)])
          edges.push_back({base + e.i, base + hw + e.j, e.w});
    }
    self_loops.assign(static_cast<std::size_t>(n), 0.0);
    if (params_.reflect_boundary) {
      for (int side = 0; side < 2; ++side) {
        const int t = side == 0 ? t0 : t1 - 1;
        // A single frame is its own mirror on both sides; apply twice then.
        const NodeId base = static_cast<NodeId>(t - t0) * hw;
        for (const Triplet& e : mirror_[static_cast<std::size_t>(t)])
          edges.push_back({base + e.i, base + e.j, e.w});
        const auto& diag = mirror_diag_[static_cast<std::size_t>(t)];
        for (NodeId p = 0; p < hw; ++p)
          self_loops[static_cast<std::size_t>(base + p)] += diag[static_cast<std::size_t>(p)];
      }
    }
    w = SparseSymMatrix::from_edges(n, edges);
  }

 private:
  double edge_weight(double log_aff) const {
    return std::exp(clamp(log_aff, -params_.clamp_log, params_.clamp_log));
  }

  void build_frame(int t, const std::vector<PmiModel>& models) {
    const FeatureField& ff = features_[static_cast<std::size_t>(t)];
    const PmiModel& model = models[static_cast<std::size_t>(t)];
    const auto intra_off = detail::half_disk(params_.r_intra);
    const auto mirror_off = detail::half_disk(params_.r_inter);
    const auto inter_off = detail::full_disk(params_.r_inter);
    const NodeId W = width_;

    auto& intra = intra_[static_cast<std::size_t>(t)];
    intra.reserve(static_cast<std::size_t>(height_) * width_ * intra_off.size());
    for (int y = 0; y < height_; ++y)
      for (int x = 0; x < width_; ++x) {
        const NodeId p = y * W + x;
        for (const auto& [dy, dx] : intra_off) {
          const int qy = y + dy, qx = x + dx;
          if (qy < 0 || qy >= height_ || qx < 0 || qx >= width_) continue;
          const NodeId q = qy * W + qx;
          intra.push_back(
              {p, q, edge_weight(model.log_affinity(ff.at(y, x), ff.at(qy, qx)))});
        }
      }

    auto& mirror = mirror_[static_cast<std::size_t>(t)];
    auto& mdiag = mirror_diag_[static_cast<std::size_t>(t)];
    mdiag.assign(static_cast<std::size_t>(height_) * width_, 0.0);
    for (int y = 0; y < height_; ++y)
      for (int x = 0; x < width_; ++x) {
        const NodeId p = y * W + x;
        mdiag[static_cast<std::size_t>(p)] =
            edge_weight(model.log_affinity(ff.at(y, x), ff.at(y, x)));
        for (const auto& [dy, dx] : mirror_off) {
          const int qy = y + dy, qx = x + dx;
          if (qy < 0 || qy >= height_ || qx < 0 || qx >= width_) continue;
          const NodeId q = qy * W + qx;
          mirror.push_back(
              {p, q, edge_weight(model.log_affinity(ff.at(y, x), ff.at(qy, qx)))});
        }
      }

    if (t + 1 < frames_) {
      const FeatureField& fn = features_[static_cast<std::size_t>(t) + 1];
      const PmiModel& next = models[static_cast<std::size_t>(t) + 1];
      auto& inter = inter_[static_cast<std::size_t>(t)];
      inter.reserve(static_cast<std::size_t>(height_) * width_ * inter_off.size());
      for (int y = 0; y < height_; ++y)
        for (int x = 0; x < width_; ++x) {
          const NodeId p = y * W + x;
          for (const auto& [dy, dx] : inter_off) {
            const int qy = y + dy, qx = x + dx;
            if (qy < 0 || qy >= height_ || qx < 0 || qx >= width_) continue;
            const NodeId q = qy * W + qx;
            const double fwd = model.log_affinity(ff.at(y, x), fn.at(qy, qx));
            const double bwd = next.log_affinity(fn.at(qy, qx), ff.at(y, x));
            inter.push_back(
                {p, q, 0.5 * (edge_weight(fwd) + edge_weight(bwd))});
          }
        }
    }
  }

  int height_, width_, frames_;
  AffinityParams params_;
  std::vector<FeatureField> features_;
  std::vector<std::vector<Triplet>> intra_;
  std::vector<std::vector<Triplet>> inter_;
  std::vector<std::vector<Triplet>> mirror_;
  std::vector<std::vector<double>> mirror_diag_;
};

// Whole-video affinity matrix (convenience wrapper over the block cache).
inline void build_affinity_matrix(const VideoVolume& v,
                                  const std::vector<PmiModel>& models,
                                  const AffinityParams& params, SparseSymMatrix& w,
                                  std::vector<double>& self_loops, NodeMap& map,
                                  int jobs = 1) {
  FrameBlockCache cache(v, models, params, jobs);
  cache.assemble(0, v.frames, w, self_loops, map);
}

}  // namespace stseg
