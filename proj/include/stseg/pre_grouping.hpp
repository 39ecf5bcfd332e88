#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "stseg/features.hpp"
#include "stseg/oriented_boundaries.hpp"
#include "stseg/watershed3d.hpp"

namespace stseg {

// Per-frame vertex pre-grouping that replaces externally learned boundary
// probabilities: a color-gradient boundary prior, watershed basins as
// candidate groups, and singleton groups wherever the prior is high.

struct PreGroupingParams {
  double prior_sigma = 1.5;       // Gaussian-derivative scale for the prior
  double smooth_sigma = 1.0;      // post-smoothing of the prior
  double target_reduction = 13.0; // auto-tuning target for theta_b
  double theta_b = -1.0;          // boundary threshold; < 0 => auto-tune
};

/// Boundary prior for one frame: max over 8 orientations of the L2 (over
// L,a,b channels) directional-derivative magnitude, normalized to max 1 per
// frame and spatially smoothed.
inline std::vector<float> boundary_prior(const FeatureField& ff,
                                         const PreGroupingParams& par = {}) {
  const int H = ff.height, W = ff.width;
  const std::size_t hw = static_cast<std::size_t>(H) * W;
  detail::FilterBank fb(par.prior_sigma);
  std::vector<double> tmp, gx(hw), gy(hw);
  std::vector<std::vector<double>> gxs(3, std::vector<double>(hw));
  std::vector<std::vector<double>> gys(3, std::vector<double>(hw));
  std::vector<float> chan(hw);
  for (int c = 0; c < 3; ++c) {
    for (std::size_t p = 0; p < hw; ++p) chan[p] = ff.f[p * FeatureField::kDim + c];
    detail::filter_xy(chan.data(), H, W, fb.dgauss, fb.gauss, fb.radius, gxs[static_cast<std::size_t>(c)].data(), tmp);
    detail::filter_xy(chan.data(), H, W, fb.gauss, fb.dgauss, fb.radius, gys[static_cast<std::size_t>(c)].data(), tmp);
  }
  std::vector<float> prior(hw, 0.0f);
  for (int o = 0; o < OrientedBoundaryVolume::kSpatial; ++o) {
    const double ct = std::cos(OrientedBoundaryVolume::angle(o));
    const double st = std::sin(OrientedBoundaryVolume::angle(o));
    for (std::size_t p = 0; p < hw; ++p) {
      double m2 = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double d = ct * gxs[static_cast<std::size_t>(c)][p] + st * gys[static_cast<std::size_t>(c)][p];
        m2 += d * d;
      }
      prior[p] = std::max(prior[p], static_cast<float>(std::sqrt(m2)));
    }
  }
  float mx = 0.0f;
  for (float v : prior) mx = std::max(mx, v);
  if (mx > 0)
    for (float& v : prior) v /= mx;
  // Smooth the normalized prior.
  detail::FilterBank sm(par.smooth_sigma);
  std::vector<double> smoothed(hw);
  detail::filter_xy(prior.data(), H, W, sm.gauss, sm.gauss, sm.radius, smoothed.data(), tmp);
  for (std::size_t p = 0; p < hw; ++p)
    prior[p] = static_cast<float>(clamp(smoothed[p], 0.0, 1.0));
  return prior;
}

// Frame-local grouping: pixel -> group id (contiguous from 0).
struct FrameGroups {
  std::vector<std::int32_t> group_of;
  std::int32_t group_count = 0;
};

// Groups for one frame at a given threshold: pixels with prior > theta_b are
// singletons; the rest take their watershed basin of the prior surface,
// re-split into 4-connected components (removing the singleton pixels can
// disconnect a basin, and groups must stay spatially connected).
inline FrameGroups pre_group_frame(const std::vector<float>& prior, int H, int W,
                                   double theta_b) {
  const std::size_t hw = static_cast<std::size_t>(H) * W;
  VolumeField surf(1, H, W);
  std::copy(prior.begin(), prior.end(), surf.v.begin());
  BasinLabeling basins = watershed3d(surf);

  FrameGroups fg;
  fg.group_of.assign(hw, -1);
  std::vector<std::int64_t> stack;
  for (std::size_t p0 = 0; p0 < hw; ++p0) {
    if (fg.group_of[p0] >= 0) continue;
    if (prior[p0] > theta_b) {
      fg.group_of[p0] = fg.group_count++;
      continue;
    }
    // Flood the 4-connected same-basin, non-singleton component.
    const std::int32_t basin = basins.labels[p0];
    const std::int32_t gid = fg.group_count++;
    fg.group_of[p0] = gid;
    stack.assign(1, static_cast<std::int64_t>(p0));
    while (!stack.empty()) {
      const std::int64_t p = stack.back();
      stack.pop_back();
      const int y = static_cast<int>(p / W), x = static_cast<int>(p % W);
      const int ny[4] = {y - 1, y + 1, y, y};
      const int nx[4] = {x, x, x - 1, x + 1};
      for (int k = 0; k < 4; ++k) {
        if (ny[k] < 0 || ny[k] >= H || nx[k] < 0 || nx[k] >= W) continue;
        const std::size_t q = static_cast<std::size_t>(ny[k]) * W + nx[k];
        if (fg.group_of[q] >= 0 || prior[q] > theta_b || basins.labels[q] != basin)
          continue;
        fg.group_of[q] = gid;
        stack.push_back(static_cast<std::int64_t>(q));
      }
    }
  }
  return fg;
}

struct PreGrouping {
  std::vector<FrameGroups> frames;
  double theta_b = 0.0;
  double reduction_factor = 1.0;  // total pixels / total groups
};

// Pre-groups every frame, auto-tuning theta_b by bisection towards the
// target reduction factor unless a threshold was given. Larger theta_b means
// fewer singletons and a coarser grouping, so the reduction factor is
// monotone (non-strictly) increasing in theta_b.
inline PreGrouping pre_group(const std::vector<std::vector<float>>& priors, int H,
                             int W, const PreGroupingParams& par = {}, int jobs = 1) {
  PreGrouping out;
  const double total_pixels =
      static_cast<double>(priors.size()) * static_cast<double>(H) * W;
  auto grouping_at = [&](double theta) {
    std::vector<FrameGroups> fgs(priors.size());
    parallel_for(priors.size(), jobs, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t t = lo; t < hi; ++t)
        fgs[t] = pre_group_frame(priors[t], H, W, theta);
    });
    return fgs;
  };
  auto factor_of = [&](const std::vector<FrameGroups>& fgs) {
    double groups = 0.0;
    for (const FrameGroups& fg : fgs) groups += fg.group_count;
    return total_pixels / std::max(1.0, groups);
  };

  if (par.theta_b >= 0.0) {
    out.theta_b = par.theta_b;
    out.frames = grouping_at(par.theta_b);
    out.reduction_factor = factor_of(out.frames);
    return out;
  }

  double lo = 0.0, hi = 1.0;
  double best_err = std::numeric_limits<double>::infinity();
  std::vector<FrameGroups> best;
  double best_theta = 0.5;
  for (int iter = 0; iter < 20; ++iter) {
    const double mid = 0.5 * (lo + hi);
    std::vector<FrameGroups> fgs = grouping_at(mid);
    const double f = factor_of(fgs);
    const double err = std::fabs(f - par.target_reduction);
    if (err < best_err) {
      best_err = err;
      best = std::move(fgs);
      best_theta = mid;
    }
    if (f > par.target_reduction)
      hi = mid;  // too coarse: lower the threshold to get more singletons
    else
      lo = mid;
  }
  out.frames = std::move(best);
  out.theta_b = best_theta;
  out.reduction_factor = factor_of(out.frames);
  return out;
}

}  // namespace stseg
