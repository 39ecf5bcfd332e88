#pragma once

#include <cmath>

#include "stseg/video_volume.hpp"

namespace stseg {

// Per-pixel feature vector: (L, a, b, v) where (L, a, b) is CIELAB rescaled
// to [0,1] and v is local luminance variance rescaled to [0,1].
struct FeatureField {
  static constexpr int kDim = 4;
  int t = 0;
  int height = 0;
  int width = 0;
  std::vector<float> f;  // interleaved, kDim per pixel

  FeatureField() = default;
  FeatureField(int frame, int h, int w)
      : t(frame), height(h), width(w),
        f(static_cast<std::size_t>(h) * w * kDim, 0.0f) {}

  const float* at(int y, int x) const {
    return f.data() + (static_cast<std::size_t>(y) * width + x) * kDim;
  }
  float* at(int y, int x) {
    return f.data() + (static_cast<std::size_t>(y) * width + x) * kDim;
  }
  const float* pixel(std::size_t p) const { return f.data() + p * kDim; }
};

namespace color {

inline double srgb_linearize(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

inline double lab_f(double t) {
  constexpr double d = 6.0 / 29.0;
  return t > d * d * d ? std::cbrt(t) : t / (3.0 * d * d) + 4.0 / 29.0;
}

// sRGB in [0,1] -> CIELAB (D65), then rescaled: L/100, (a+128)/255,
// (b+128)/255, clamped to [0,1].
inline void rgb_to_scaled_lab(double r, double g, double b, float out[3]) {
  const double rl = srgb_linearize(r);
  const double gl = srgb_linearize(g);
  const double bl = srgb_linearize(b);
  const double x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
  const double y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
  const double z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl;
  const double fx = lab_f(x / 0.95047);
  const double fy = lab_f(y);
  const double fz = lab_f(z / 1.08883);
  const double L = 116.0 * fy - 16.0;
  const double A = 500.0 * (fx - fy);
  const double B = 200.0 * (fy - fz);
  out[0] = static_cast<float>(clamp(L / 100.0, 0.0, 1.0));
  out[1] = static_cast<float>(clamp((A + 128.0) / 255.0, 0.0, 1.0));
  out[2] = static_cast<float>(clamp((B + 128.0) / 255.0, 0.0, 1.0));
}

}  // namespace color

// Rescale constant for the 3x3 local variance channel: typical
// natural-image variances of the [0,1] luminance land well below 0.25, so a
// factor 4 uses the channel range without saturating everywhere.
constexpr double kVarianceScale = 4.0;

inline FeatureField compute_features(const VideoVolume& v, int t) {
  if (t < 0 || t >= v.frames) throw InputError("compute_features: frame out of range");
  FeatureField ff(t, v.height, v.width);
  const float* frame = v.frame_ptr(t);
  const int H = v.height, W = v.width;

  // Color features.
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * W + x;
      double r, g, b;
      if (v.channels >= 3) {
        r = frame[p * v.channels + 0];
        g = frame[p * v.channels + 1];
        b = frame[p * v.channels + 2];
      } else {
        r = g = b = frame[p * v.channels];
      }
      color::rgb_to_scaled_lab(r, g, b, ff.at(y, x));
    }
  }

  // 3x3 population variance of the L feature, replicated borders.
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      double sum = 0.0, sum2 = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const double L = ff.at(clamp_index(y + dy, H), clamp_index(x + dx, W))[0];
          sum += L;
          sum2 += L * L;
        }
      const double mean = sum / 9.0;
      const double var = std::max(0.0, sum2 / 9.0 - mean * mean);
      ff.at(y, x)[3] = static_cast<float>(clamp(var * kVarianceScale, 0.0, 1.0));
    }
  }
  return ff;
}

}  // namespace stseg
