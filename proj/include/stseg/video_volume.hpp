#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stseg/common.hpp"

namespace stseg {

struct VoxelIndex {
  int t = 0, y = 0, x = 0;
};

// Dense multi-channel video volume, frame-major layout:
// data[((t*H + y)*W + x)*C + c]. Values are normalized to [0, 1].
struct VideoVolume {
  int frames = 0;
  int height = 0;
  int width = 0;
  int channels = 0;
  double scale = 1.0;  // spatial scale relative to the input (1, 0.5, 0.25, ...)
  std::vector<float> data;

  VideoVolume() = default;
  VideoVolume(int t, int h, int w, int c, double s = 1.0)
      : frames(t), height(h), width(w), channels(c), scale(s),
        data(static_cast<std::size_t>(t) * h * w * c, 0.0f) {}

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(frames) * height * width;
  }

  std::size_t index(int t, int y, int x, int c = 0) const {
    return ((static_cast<std::size_t>(t) * height + y) * width + x) * channels + c;
  }

  float& at(int t, int y, int x, int c = 0) { return data[index(t, y, x, c)]; }
  float at(int t, int y, int x, int c = 0) const { return data[index(t, y, x, c)]; }

  const float* frame_ptr(int t) const {
    return data.data() + static_cast<std::size_t>(t) * height * width * channels;
  }
  float* frame_ptr(int t) {
    return data.data() + static_cast<std::size_t>(t) * height * width * channels;
  }
};

// Single-channel scalar field over a video volume (eigenvector slices,
// boundary channels, watershed surfaces, ...).
struct VolumeField {
  int frames = 0;
  int height = 0;
  int width = 0;
  std::vector<float> v;

  VolumeField() = default;
  VolumeField(int t, int h, int w)
      : frames(t), height(h), width(w),
        v(static_cast<std::size_t>(t) * h * w, 0.0f) {}

  std::size_t size() const { return v.size(); }
  std::size_t index(int t, int y, int x) const {
    return (static_cast<std::size_t>(t) * height + y) * width + x;
  }
  float& at(int t, int y, int x) { return v[index(t, y, x)]; }
  float at(int t, int y, int x) const { return v[index(t, y, x)]; }

  const float* frame_ptr(int t) const {
    return v.data() + static_cast<std::size_t>(t) * height * width;
  }
  float* frame_ptr(int t) {
    return v.data() + static_cast<std::size_t>(t) * height * width;
  }
};

// Integer labeling of every voxel of a volume. Labels are contiguous
// starting at 0 unless stated otherwise by the producer.
struct SegmentationVolume {
  int frames = 0;
  int height = 0;
  int width = 0;
  std::int32_t region_count = 0;
  double threshold = 0.0;  // hierarchy level this segmentation was cut at
  std::vector<std::int32_t> labels;

  SegmentationVolume() = default;
  SegmentationVolume(int t, int h, int w)
      : frames(t), height(h), width(w),
        labels(static_cast<std::size_t>(t) * h * w, 0) {}

  std::size_t index(int t, int y, int x) const {
    return (static_cast<std::size_t>(t) * height + y) * width + x;
  }
  std::int32_t& at(int t, int y, int x) { return labels[index(t, y, x)]; }
  std::int32_t at(int t, int y, int x) const { return labels[index(t, y, x)]; }

  const std::int32_t* frame_ptr(int t) const {
    return labels.data() + static_cast<std::size_t>(t) * height * width;
  }
};

// Nine-channel oriented boundary strength volume: channels 0..7 are spatial
// orientations at angles o*pi/8 (measured from the x axis), channel 8 is the
// temporal boundary strength between frame t and t+1 (stored at frame t).
struct OrientedBoundaryVolume {
  static constexpr int kSpatial = 8;
  static constexpr int kChannels = 9;
  int frames = 0;
  int height = 0;
  int width = 0;
  double scale = 1.0;
  std::vector<VolumeField> channel;  // size kChannels
  // Frames whose temporal channel (pair t, t+1) was actually observed; empty
  // means every pair is covered. Producers whose temporal estimates have
  // gaps record them here so cross-scale blending can skip the gaps instead
  // of averaging in zeros.
  std::vector<int> temporal_cover;

  OrientedBoundaryVolume() = default;
  OrientedBoundaryVolume(int t, int h, int w, double s = 1.0)
      : frames(t), height(h), width(w), scale(s) {
    channel.reserve(kChannels);
    for (int c = 0; c < kChannels; ++c) channel.emplace_back(t, h, w);
  }

  // Orientation angle of spatial channel o.
  static double angle(int o) { return 3.14159265358979323846 * o / kSpatial; }
};

}  // namespace stseg
