#pragma once

#include <cmath>

#include "stseg/video_volume.hpp"

namespace stseg {

// Spatial box downsampling by an integer factor. Output dims are
// ceil(H/f) x ceil(W/f); edge boxes average over the available pixels.
inline VideoVolume downsample(const VideoVolume& v, int factor) {
  if (factor <= 1) return v;
  const int oh = (v.height + factor - 1) / factor;
  const int ow = (v.width + factor - 1) / factor;
  if (oh < 2 || ow < 2)
    throw InputError("downsample: result would be smaller than 2x2");
  VideoVolume out(v.frames, oh, ow, v.channels, v.scale / factor);
  for (int t = 0; t < v.frames; ++t) {
    for (int oy = 0; oy < oh; ++oy) {
      const int y0 = oy * factor;
      const int y1 = std::min(v.height, y0 + factor);
      for (int ox = 0; ox < ow; ++ox) {
        const int x0 = ox * factor;
        const int x1 = std::min(v.width, x0 + factor);
        const float inv = 1.0f / static_cast<float>((y1 - y0) * (x1 - x0));
        for (int c = 0; c < v.channels; ++c) {
          float acc = 0.0f;
          for (int y = y0; y < y1; ++y)
            for (int x = x0; x < x1; ++x) acc += v.at(t, y, x, c);
          out.at(t, oy, ox, c) = acc * inv;
        }
      }
    }
  }
  return out;
}

// Bilinear upsampling of a scalar field to the given spatial size
// (pixel-center alignment; frames are preserved).
inline VolumeField upsample_field(const VolumeField& f, int oh, int ow) {
  if (oh == f.height && ow == f.width) return f;
  VolumeField out(f.frames, oh, ow);
  const double sy = static_cast<double>(f.height) / oh;
  const double sx = static_cast<double>(f.width) / ow;
  for (int t = 0; t < f.frames; ++t) {
    const float* src = f.frame_ptr(t);
    float* dst = out.frame_ptr(t);
    for (int oy = 0; oy < oh; ++oy) {
      const double fy = (oy + 0.5) * sy - 0.5;
      int y0 = static_cast<int>(std::floor(fy));
      double wy = fy - y0;
      if (y0 < 0) { y0 = 0; wy = 0.0; }
      if (y0 >= f.height - 1) { y0 = f.height > 1 ? f.height - 2 : 0; wy = f.height > 1 ? 1.0 : 0.0; }
      const int y1 = f.height > 1 ? y0 + 1 : y0;
      for (int ox = 0; ox < ow; ++ox) {
        const double fx = (ox + 0.5) * sx - 0.5;
        int x0 = static_cast<int>(std::floor(fx));
        double wx = fx - x0;
        if (x0 < 0) { x0 = 0; wx = 0.0; }
        if (x0 >= f.width - 1) { x0 = f.width > 1 ? f.width - 2 : 0; wx = f.width > 1 ? 1.0 : 0.0; }
        const int x1 = f.width > 1 ? x0 + 1 : x0;
        const double v00 = src[static_cast<std::size_t>(y0) * f.width + x0];
        const double v01 = src[static_cast<std::size_t>(y0) * f.width + x1];
        const double v10 = src[static_cast<std::size_t>(y1) * f.width + x0];
        const double v11 = src[static_cast<std::size_t>(y1) * f.width + x1];
        dst[static_cast<std::size_t>(oy) * ow + ox] = static_cast<float>(
            (1 - wy) * ((1 - wx) * v00 + wx * v01) + wy * ((1 - wx) * v10 + wx * v11));
      }
    }
  }
  return out;
}

}  // namespace stseg
