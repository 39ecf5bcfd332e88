#pragma once

#include <algorithm>
#include <deque>
#include <numeric>
#include <vector>

#include "stseg/video_volume.hpp"

namespace stseg {

// Watershed basin labeling of a scalar volume. Labels are contiguous from 0;
// every voxel belongs to exactly one basin (zero-thickness boundaries live on
// the faces between voxels of different basins).
struct BasinLabeling {
  int frames = 0;
  int height = 0;
  int width = 0;
  std::int32_t basin_count = 0;
  std::vector<std::int32_t> labels;

  std::size_t index(int t, int y, int x) const {
    return (static_cast<std::size_t>(t) * height + y) * width + x;
  }
  std::int32_t at(int t, int y, int x) const { return labels[index(t, y, x)]; }
};

// Scalar topographic surface of a boundary volume: per voxel, the max over
// the eight spatial channels and the temporal channel, the latter scaled by
// the temporal anisotropy factor (1 = isotropic treatment of the time axis).
inline VolumeField boundary_surface(const OrientedBoundaryVolume& obv,
                                    double temporal_anisotropy = 1.0) {
  VolumeField s(obv.frames, obv.height, obv.width);
  const auto aniso = static_cast<float>(temporal_anisotropy);
  for (std::size_t i = 0; i < s.v.size(); ++i) {
    float m = 0.0f;
    for (int c = 0; c < OrientedBoundaryVolume::kSpatial; ++c)
      m = std::max(m, obv.channel[static_cast<std::size_t>(c)].v[i]);
    s.v[i] = std::max(m, aniso * obv.channel[OrientedBoundaryVolume::kSpatial].v[i]);
  }
  return s;
}

// Steepest-descent (drainage) watershed with 6-connectivity. Every voxel is
// assigned to the regional minimum its path of steepest descent reaches:
// voxels are swept in increasing surface order, each adopting the label of
// its lowest strictly-lower neighbor. Equal-value plateaus are resolved as a
// whole when the sweep first enters them: members are claimed breadth-first
// from the plateau's descending border, so each goes to the geodesically
// nearest point of drainage; plateaus with no descending border are the
// regional minima and seed new basins. Ridge crests therefore join the side
// their lower flank descends to, instead of whichever flood arrives first,
// which keeps dividing lines on the true crest even when blur makes one
// flank ramp higher than the other. Fully deterministic: neighbor order is
// t-, t+, y-, y+, x-, x+, and equal values resolve by voxel index.
inline BasinLabeling watershed3d(const VolumeField& surface) {
  const int T = surface.frames, H = surface.height, W = surface.width;
  const std::int64_t n = static_cast<std::int64_t>(T) * H * W;
  BasinLabeling out;
  out.frames = T;
  out.height = H;
  out.width = W;
  out.labels.assign(static_cast<std::size_t>(n), -1);
  if (n == 0) return out;

  const std::int64_t hw = static_cast<std::int64_t>(H) * W;
  const float* s = surface.v.data();
  auto for_neighbors = [&](std::int64_t v, auto&& fn) {
    const int t = static_cast<int>(v / hw);
    const int y = static_cast<int>((v % hw) / W);
    const int x = static_cast<int>(v % W);
    if (t > 0) fn(v - hw);
    if (t + 1 < T) fn(v + hw);
    if (y > 0) fn(v - W);
    if (y + 1 < H) fn(v + W);
    if (x > 0) fn(v - 1);
    if (x + 1 < W) fn(v + 1);
  };
  // Lowest strictly-lower neighbor (first in neighbor order on ties), or -1.
  auto descent = [&](std::int64_t v) {
    std::int64_t best = -1;
    float low = s[v];
    for_neighbors(v, [&](std::int64_t nb) {
      if (s[nb] < low) {
        low = s[nb];
        best = nb;
      }
    });
    return best;
  };

  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), std::int64_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::int64_t a, std::int64_t b) { return s[a] < s[b]; });

  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<std::int64_t> stack, members, drains;
  std::deque<std::int64_t> frontier;
  for (const std::int64_t v0 : order) {
    if (out.labels[static_cast<std::size_t>(v0)] >= 0) continue;
    if (const std::int64_t d = descent(v0); d >= 0) {
      out.labels[static_cast<std::size_t>(v0)] =
          out.labels[static_cast<std::size_t>(d)];
      continue;
    }
    if (seen[static_cast<std::size_t>(v0)]) continue;
    // First contact with an equal-value plateau: collect it and the subset
    // of members that have somewhere lower to drain to.
    const float level = s[v0];
    members.clear();
    drains.clear();
    stack.assign(1, v0);
    seen[static_cast<std::size_t>(v0)] = 1;
    while (!stack.empty()) {
      const std::int64_t v = stack.back();
      stack.pop_back();
      members.push_back(v);
      if (descent(v) >= 0) drains.push_back(v);
      for_neighbors(v, [&](std::int64_t nb) {
        if (s[nb] == level && !seen[static_cast<std::size_t>(nb)]) {
          seen[static_cast<std::size_t>(nb)] = 1;
          stack.push_back(nb);
        }
      });
    }
    if (drains.empty()) {
      for (const std::int64_t v : members)
        out.labels[static_cast<std::size_t>(v)] = out.basin_count;
      ++out.basin_count;
      continue;
    }
    // Claim members breadth-first from the draining border; ties between
    // equally near drains go to the lower voxel index.
    std::sort(drains.begin(), drains.end());
    frontier.clear();
    for (const std::int64_t v : drains) {
      auto& lab = out.labels[static_cast<std::size_t>(v)];
      if (lab < 0) lab = out.labels[static_cast<std::size_t>(descent(v))];
      frontier.push_back(v);
    }
    while (!frontier.empty()) {
      const std::int64_t v = frontier.front();
      frontier.pop_front();
      for_neighbors(v, [&](std::int64_t nb) {
        auto& lab = out.labels[static_cast<std::size_t>(nb)];
        if (s[nb] == level && lab < 0) {
          lab = out.labels[static_cast<std::size_t>(v)];
          frontier.push_back(nb);
        }
      });
    }
  }
  return out;
}

// Watershed of a boundary volume: drains the max-over-channels topographic
// surface.
inline BasinLabeling watershed3d(const OrientedBoundaryVolume& obv,
                                 double temporal_anisotropy = 1.0) {
  return watershed3d(boundary_surface(obv, temporal_anisotropy));
}

}  // namespace stseg
