#pragma once

#include <cmath>
#include <vector>

#include "stseg/common.hpp"
#include "stseg/resample.hpp"
#include "stseg/temporal_windows.hpp"
#include "stseg/video_volume.hpp"

namespace stseg {

struct BoundaryParams {
  double sigma_f = 1.5;        // Gaussian (derivative) filter scale in pixels
  double lambda_floor = 1e-8;  // eigenvalues at or below this are excluded
  double percentile = 0.999;   // per-scale rescale quantile
};

namespace detail {

struct FilterBank {
  std::vector<double> gauss;   // normalized smoothing taps
  std::vector<double> dgauss;  // derivative taps, unit response to unit ramp
  int radius = 0;

  explicit FilterBank(double sigma) {
    radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    gauss.resize(static_cast<std::size_t>(2 * radius + 1));
    dgauss.resize(gauss.size());
    double gsum = 0.0, dnorm = 0.0;
    for (int i = -radius; i <= radius; ++i) {
      const double g = std::exp(-0.5 * i * i / (sigma * sigma));
      gauss[static_cast<std::size_t>(i + radius)] = g;
      gsum += g;
      dnorm += i * i * g;
    }
    for (double& g : gauss) g /= gsum;
    for (int i = -radius; i <= radius; ++i)
      dgauss[static_cast<std::size_t>(i + radius)] = i * gauss[static_cast<std::size_t>(i + radius)] * gsum / dnorm;
  }
};

// Separable correlation along x then y with replicated borders.
inline void filter_xy(const float* src, int h, int w, const std::vector<double>& kx,
                      const std::vector<double>& ky, int radius, double* dst,
                      std::vector<double>& tmp) {
  tmp.resize(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += kx[static_cast<std::size_t>(i + radius)] *
               src[static_cast<std::size_t>(y) * w + clamp_index(x + i, w)];
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += ky[static_cast<std::size_t>(i + radius)] *
               tmp[static_cast<std::size_t>(clamp_index(y + i, h)) * w + x];
      dst[static_cast<std::size_t>(y) * w + x] = acc;
    }
}

}  // namespace detail

// Oriented boundary responses from the eigenvector volumes of one scale:
// per window and eigenvector, spatial channels are |directional derivative|
// at the 8 orientations and the temporal channel is the spatially smoothed
// |frame difference| after a robust gate (mean plus one standard deviation of
// the pair's absolute difference is subtracted and the result clamped at
// zero, so globally coherent eigenvector drift and per-pixel fluctuation
// between frames do not register as boundaries while localized changes well
// above the fluctuation level survive); responses are weighted by 1/sqrt(lambda),
// summed over eigenvectors, averaged uniformly over the windows covering each
// frame, and rescaled so the chosen percentile over all channels maps to 1.
inline OrientedBoundaryVolume oriented_gradients(const EigenStack& es,
                                                 const BoundaryParams& par = {},
                                                 int jobs = 1) {
  if (es.windows.empty()) throw InputError("oriented_gradients: empty eigenstack");
  const int T = es.frames, H = es.height, W = es.width;
  const std::size_t hw = static_cast<std::size_t>(H) * W;
  const int kS = OrientedBoundaryVolume::kSpatial;

  std::vector<std::vector<double>> acc(
      OrientedBoundaryVolume::kChannels,
      std::vector<double>(static_cast<std::size_t>(T) * hw, 0.0));
  std::vector<int> cover_spatial(static_cast<std::size_t>(T), 0);
  std::vector<int> cover_temporal(static_cast<std::size_t>(T), 0);
  for (const WindowEigen& we : es.windows) {
    for (int t = we.win.t0; t < we.win.t0 + we.win.len; ++t) {
      ++cover_spatial[static_cast<std::size_t>(t)];
      if (t + 1 < we.win.t0 + we.win.len) ++cover_temporal[static_cast<std::size_t>(t)];
    }
  }

  detail::FilterBank fb(par.sigma_f);
  double cos_t[OrientedBoundaryVolume::kSpatial], sin_t[OrientedBoundaryVolume::kSpatial];
  for (int o = 0; o < kS; ++o) {
    cos_t[o] = std::cos(OrientedBoundaryVolume::angle(o));
    sin_t[o] = std::sin(OrientedBoundaryVolume::angle(o));
  }

  // Window contributions are computed in parallel batches but merged one
  // window at a time in schedule order, so the result is bit-identical for
  // any degree of parallelism (and across reruns).
  const std::size_t batch = std::max<std::size_t>(1, static_cast<std::size_t>(jobs));
  std::vector<std::vector<std::vector<double>>> locals(batch);
  for (std::size_t b0 = 0; b0 < es.windows.size(); b0 += batch) {
    const std::size_t b1 = std::min(es.windows.size(), b0 + batch);
    parallel_for(b1 - b0, jobs, [&](std::size_t lo, std::size_t hi) {
      std::vector<double> tmp, gx(hw), gy(hw), dt(hw);
      std::vector<float> adiff(hw);
      for (std::size_t bi = lo; bi < hi; ++bi) {
        const WindowEigen& we = es.windows[b0 + bi];
        auto& local = locals[bi];
        local.assign(OrientedBoundaryVolume::kChannels,
                     std::vector<double>(static_cast<std::size_t>(we.win.len) * hw, 0.0));
        for (std::size_t j = 0; j < we.fields.size(); ++j) {
          const double lambda = we.eigenvalues[j];
          if (lambda <= par.lambda_floor) continue;
          const double weight = 1.0 / std::sqrt(lambda);
          const VolumeField& f = we.fields[j];
          for (int rt = 0; rt < we.win.len; ++rt) {
            const float* frame = f.frame_ptr(rt);
            detail::filter_xy(frame, H, W, fb.dgauss, fb.gauss, fb.radius, gx.data(), tmp);
            detail::filter_xy(frame, H, W, fb.gauss, fb.dgauss, fb.radius, gy.data(), tmp);
            for (int o = 0; o < kS; ++o) {
              double* dst = local[static_cast<std::size_t>(o)].data() +
                            static_cast<std::size_t>(rt) * hw;
              for (std::size_t p = 0; p < hw; ++p)
                dst[p] += weight * std::fabs(cos_t[o] * gx[p] + sin_t[o] * gy[p]);
            }
            if (rt + 1 < we.win.len) {
              const float* next = f.frame_ptr(rt + 1);
              double mean_diff = 0.0, sq_diff = 0.0;
              for (std::size_t p = 0; p < hw; ++p) {
                adiff[p] = std::fabs(next[p] - frame[p]);
                mean_diff += adiff[p];
                sq_diff += static_cast<double>(adiff[p]) * adiff[p];
              }
              mean_diff /= static_cast<double>(hw);
              const double var_diff =
                  std::max(0.0, sq_diff / static_cast<double>(hw) - mean_diff * mean_diff);
              const double gate = mean_diff + std::sqrt(var_diff);
              for (std::size_t p = 0; p < hw; ++p)
                adiff[p] = static_cast<float>(
                    std::max(0.0, static_cast<double>(adiff[p]) - gate));
              detail::filter_xy(adiff.data(), H, W, fb.gauss, fb.gauss, fb.radius,
                                dt.data(), tmp);
              double* dst = local[static_cast<std::size_t>(kS)].data() +
                            static_cast<std::size_t>(rt) * hw;
              for (std::size_t p = 0; p < hw; ++p) dst[p] += weight * dt[p];
            }
          }
        }
      }
    });
    for (std::size_t bi = 0; b0 + bi < b1; ++bi) {
      const WindowEigen& we = es.windows[b0 + bi];
      const auto& local = locals[bi];
      for (int c = 0; c < OrientedBoundaryVolume::kChannels; ++c)
        for (int rt = 0; rt < we.win.len; ++rt) {
          const double* src = local[static_cast<std::size_t>(c)].data() +
                              static_cast<std::size_t>(rt) * hw;
          double* dst = acc[static_cast<std::size_t>(c)].data() +
                        static_cast<std::size_t>(we.win.t0 + rt) * hw;
          for (std::size_t p = 0; p < hw; ++p) dst[p] += src[p];
        }
    }
  }

  OrientedBoundaryVolume obv(T, H, W, es.scale);
  obv.temporal_cover = cover_temporal;
  for (int c = 0; c < OrientedBoundaryVolume::kChannels; ++c) {
    const bool temporal = c == kS;
    for (int t = 0; t < T; ++t) {
      const int cover = temporal ? cover_temporal[static_cast<std::size_t>(t)]
                                 : cover_spatial[static_cast<std::size_t>(t)];
      float* dst = obv.channel[static_cast<std::size_t>(c)].frame_ptr(t);
      const double* src = acc[static_cast<std::size_t>(c)].data() +
                          static_cast<std::size_t>(t) * hw;
      if (cover == 0) continue;  // last frame's temporal channel stays 0
      const double inv = 1.0 / cover;
      for (std::size_t p = 0; p < hw; ++p) dst[p] = static_cast<float>(src[p] * inv);
    }
  }

  // Percentile rescale over all nine channels jointly.
  std::vector<float> pool;
  pool.reserve(static_cast<std::size_t>(OrientedBoundaryVolume::kChannels) * T * hw);
  for (const VolumeField& ch : obv.channel)
    pool.insert(pool.end(), ch.v.begin(), ch.v.end());
  const double q = percentile(std::move(pool), par.percentile);
  if (q > 0) {
    const float inv = static_cast<float>(1.0 / q);
    for (VolumeField& ch : obv.channel)
      for (float& x : ch.v) x = clamp(x * inv, 0.0f, 1.0f);
  }
  return obv;
}

// Upsample per-scale boundary volumes to the reference resolution and blend
// with the given weights (renormalized over the scales actually present).
// The temporal channel is additionally renormalized per frame pair over the
// scales whose window schedule covers that pair, so a pair that falls
// between one scale's windows is averaged over the remaining scales instead
// of being dragged down by zeros.
inline OrientedBoundaryVolume multiscale_aggregate(
    const std::vector<const OrientedBoundaryVolume*>& per_scale,
    const std::vector<double>& weights, int height, int width) {
  if (per_scale.empty()) throw InputError("multiscale_aggregate: no scales");
  if (weights.size() != per_scale.size())
    throw ConfigError("multiscale_aggregate: one weight per scale required");
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  if (wsum <= 0) throw ConfigError("multiscale_aggregate: weights must sum > 0");
  const int T = per_scale[0]->frames;
  OrientedBoundaryVolume out(T, height, width, 1.0);
  std::vector<double> cover_w(static_cast<std::size_t>(T), 0.0);
  const int kS = OrientedBoundaryVolume::kSpatial;
  for (std::size_t s = 0; s < per_scale.size(); ++s) {
    const OrientedBoundaryVolume& o = *per_scale[s];
    if (o.frames != T) throw InputError("multiscale_aggregate: frame count mismatch");
    const float w = static_cast<float>(weights[s] / wsum);
    for (int c = 0; c < OrientedBoundaryVolume::kChannels; ++c) {
      VolumeField up = upsample_field(o.channel[static_cast<std::size_t>(c)], height, width);
      float* dst = out.channel[static_cast<std::size_t>(c)].v.data();
      for (std::size_t i = 0; i < up.v.size(); ++i) dst[i] += w * up.v[i];
    }
    for (int t = 0; t + 1 < T; ++t)
      if (o.temporal_cover.empty() || o.temporal_cover[static_cast<std::size_t>(t)] > 0)
        cover_w[static_cast<std::size_t>(t)] += w;
  }
  VolumeField& temporal = out.channel[static_cast<std::size_t>(kS)];
  const std::size_t hw = static_cast<std::size_t>(height) * width;
  for (int t = 0; t + 1 < T; ++t) {
    const double cw = cover_w[static_cast<std::size_t>(t)];
    if (cw <= 0.0 || cw > 1.0 - 1e-9) continue;
    const float inv = static_cast<float>(1.0 / cw);
    float* dst = temporal.frame_ptr(t);
    for (std::size_t p = 0; p < hw; ++p) dst[p] *= inv;
  }
  for (VolumeField& ch : out.channel)
    for (float& x : ch.v) x = clamp(x, 0.0f, 1.0f);
  return out;
}

// Motion boundaries: spatial max gated by temporal change towards either
// neighboring frame ("edges of objects that do not move are removed").
inline VolumeField motion_boundaries(const OrientedBoundaryVolume& obv) {
  const int T = obv.frames, H = obv.height, W = obv.width;
  const std::size_t hw = static_cast<std::size_t>(H) * W;
  VolumeField motion(T, H, W);
  const VolumeField& temporal = obv.channel[OrientedBoundaryVolume::kSpatial];
  for (int t = 0; t < T; ++t) {
    float* dst = motion.frame_ptr(t);
    const float* tm = t > 0 ? temporal.frame_ptr(t - 1) : nullptr;
    const float* tp = t + 1 < T ? temporal.frame_ptr(t) : nullptr;
    for (std::size_t p = 0; p < hw; ++p) {
      float spatial = 0.0f;
      for (int o = 0; o < OrientedBoundaryVolume::kSpatial; ++o)
        spatial = std::max(spatial,
                           obv.channel[static_cast<std::size_t>(o)].frame_ptr(t)[p]);
      const float gate = std::max(tm ? tm[p] : 0.0f, tp ? tp[p] : 0.0f);
      dst[p] = spatial * gate;
    }
  }
  return motion;
}

}  // namespace stseg
