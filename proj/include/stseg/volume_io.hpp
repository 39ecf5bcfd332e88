#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stseg/image_io.hpp"
#include "stseg/video_volume.hpp"

namespace stseg {

namespace fs = std::filesystem;

inline std::string frame_name(int t, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%05d.%s", t, ext);
  return buf;
}

namespace detail {

// Wildcard match supporting '*' and '?'.
inline bool glob_match(const char* pat, const char* s) {
  if (*pat == '\0') return *s == '\0';
  if (*pat == '*') return glob_match(pat + 1, s) || (*s != '\0' && glob_match(pat, s + 1));
  if (*s != '\0' && (*pat == '?' || *pat == *s)) return glob_match(pat + 1, s + 1);
  return false;
}

// Last run of digits in the filename stem, or -1 if none.
inline long long numeric_index(const std::string& name) {
  long long value = -1;
  for (std::size_t i = 0; i < name.size(); ++i) {
    if (std::isdigit(static_cast<unsigned char>(name[i]))) {
      long long v = 0;
      std::size_t j = i;
      while (j < name.size() && std::isdigit(static_cast<unsigned char>(name[j]))) {
        v = v * 10 + (name[j] - '0');
        ++j;
      }
      value = v;
      i = j;
    }
  }
  return value;
}

}  // namespace detail

// Loads a video volume from a directory of netpbm frames, ordered by the
// numeric index embedded in each filename (falling back to name order).
// All frames must agree in size and channel count.
inline VideoVolume load_frames(const std::string& dir,
                               const std::string& pattern = "") {
  std::vector<std::pair<std::string, std::string>> entries;  // (name, path)
  if (!fs::is_directory(dir)) throw InputError("not a directory: " + dir);
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string name = e.path().filename().string();
    const std::string ext = e.path().extension().string();
    if (!pattern.empty()) {
      if (!detail::glob_match(pattern.c_str(), name.c_str())) continue;
    } else if (ext != ".pgm" && ext != ".ppm" && ext != ".pnm") {
      continue;
    }
    entries.emplace_back(name, e.path().string());
  }
  if (entries.empty())
    throw InputError("no matching frames found in " + dir +
                     (pattern.empty() ? "" : " for pattern " + pattern));
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) {
              const long long ia = detail::numeric_index(a.first);
              const long long ib = detail::numeric_index(b.first);
              if (ia != ib) return ia < ib;
              return a.first < b.first;
            });
  std::vector<std::string> paths;
  paths.reserve(entries.size());
  for (auto& e : entries) paths.push_back(e.second);
  VideoVolume v;
  for (std::size_t t = 0; t < paths.size(); ++t) {
    ImageU16 img = read_pnm(paths[t]);
    if (t == 0) {
      v = VideoVolume(static_cast<int>(paths.size()), img.height, img.width,
                      img.channels);
    } else if (img.height != v.height || img.width != v.width ||
               img.channels != v.channels) {
      throw InputError("frame size/channel mismatch at " + paths[t]);
    }
    const float inv = 1.0f / static_cast<float>(img.maxval);
    float* dst = v.frame_ptr(static_cast<int>(t));
    for (std::size_t i = 0; i < img.data.size(); ++i)
      dst[i] = static_cast<float>(img.data[i]) * inv;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Output writing. Every volume written to disk is a directory of 16-bit
// grayscale frames plus a manifest.json describing shape and encoding.
// ---------------------------------------------------------------------------

inline void write_manifest(const std::string& dir, nlohmann::json j) {
  std::ofstream out(dir + "/manifest.json");
  if (!out) throw InputError("cannot write manifest in " + dir);
  out << j.dump(2) << "\n";
}

inline nlohmann::json read_manifest(const std::string& dir) {
  std::ifstream in(dir + "/manifest.json");
  if (!in) throw InputError("missing manifest.json in " + dir);
  nlohmann::json j;
  in >> j;
  return j;
}

// Label volume: one 16-bit PGM per frame, raw label values.
inline void write_outputs(const std::string& dir, const SegmentationVolume& seg) {
  fs::create_directories(dir);
  std::int32_t max_label = 0;
  for (auto l : seg.labels) max_label = std::max(max_label, l);
  if (max_label > 65535)
    throw InputError("segmentation has more than 65536 labels; cannot encode");
  nlohmann::json files = nlohmann::json::array();
  for (int t = 0; t < seg.frames; ++t) {
    ImageU16 img;
    img.height = seg.height;
    img.width = seg.width;
    img.channels = 1;
    img.maxval = 65535;
    img.data.resize(static_cast<std::size_t>(seg.height) * seg.width);
    const std::int32_t* src = seg.frame_ptr(t);
    for (std::size_t i = 0; i < img.data.size(); ++i)
      img.data[i] = static_cast<std::uint16_t>(src[i]);
    const std::string name = frame_name(t, "pgm");
    write_pnm(dir + "/" + name, img);
    files.push_back(name);
  }
  nlohmann::json j;
  j["type"] = "segmentation";
  j["frames"] = seg.frames;
  j["height"] = seg.height;
  j["width"] = seg.width;
  j["encoding"] = {{"kind", "label"}, {"scale", 1}};
  j["region_count"] = seg.region_count;
  j["threshold"] = seg.threshold;
  j["files"] = files;
  write_manifest(dir, j);
}

// Scalar volume in [0, 1]: quantized to 16 bits, step 1/65535.
inline void write_outputs(const std::string& dir, const VolumeField& field,
                          const std::string& kind = "scalar") {
  fs::create_directories(dir);
  nlohmann::json files = nlohmann::json::array();
  for (int t = 0; t < field.frames; ++t) {
    ImageU16 img;
    img.height = field.height;
    img.width = field.width;
    img.channels = 1;
    img.maxval = 65535;
    img.data.resize(static_cast<std::size_t>(field.height) * field.width);
    const float* src = field.frame_ptr(t);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
      const float c = clamp(src[i], 0.0f, 1.0f);
      img.data[i] = static_cast<std::uint16_t>(std::lround(c * 65535.0f));
    }
    const std::string name = frame_name(t, "pgm");
    write_pnm(dir + "/" + name, img);
    files.push_back(name);
  }
  nlohmann::json j;
  j["type"] = kind;
  j["frames"] = field.frames;
  j["height"] = field.height;
  j["width"] = field.width;
  j["encoding"] = {{"kind", "quantized"}, {"scale", 65535}, {"step", 1.0 / 65535.0}};
  j["files"] = files;
  write_manifest(dir, j);
}

inline SegmentationVolume read_label_volume(const std::string& dir) {
  nlohmann::json j = read_manifest(dir);
  if (j.value("type", "") != "segmentation")
    throw InputError("volume at " + dir + " is not a segmentation");
  SegmentationVolume seg(j["frames"].get<int>(), j["height"].get<int>(),
                         j["width"].get<int>());
  seg.threshold = j.value("threshold", 0.0);
  seg.region_count = j.value("region_count", 0);
  const auto files = j["files"];
  for (int t = 0; t < seg.frames; ++t) {
    ImageU16 img = read_pnm(dir + "/" + files[t].get<std::string>());
    if (img.height != seg.height || img.width != seg.width || img.channels != 1)
      throw InputError("label frame shape mismatch in " + dir);
    std::int32_t* dst = seg.labels.data() +
                        static_cast<std::size_t>(t) * seg.height * seg.width;
    for (std::size_t i = 0; i < img.data.size(); ++i) dst[i] = img.data[i];
  }
  return seg;
}

inline VolumeField read_scalar_volume(const std::string& dir) {
  nlohmann::json j = read_manifest(dir);
  VolumeField f(j["frames"].get<int>(), j["height"].get<int>(), j["width"].get<int>());
  const double scale = j["encoding"].value("scale", 65535);
  const auto files = j["files"];
  for (int t = 0; t < f.frames; ++t) {
    ImageU16 img = read_pnm(dir + "/" + files[t].get<std::string>());
    if (img.height != f.height || img.width != f.width || img.channels != 1)
      throw InputError("scalar frame shape mismatch in " + dir);
    float* dst = f.frame_ptr(t);
    for (std::size_t i = 0; i < img.data.size(); ++i)
      dst[i] = static_cast<float>(img.data[i] / scale);
  }
  return f;
}

// Writes a color video volume as PPM frames (used by the synthetic generator).
inline void write_video(const std::string& dir, const VideoVolume& v) {
  fs::create_directories(dir);
  if (v.channels != 1 && v.channels != 3)
    throw InputError("write_video: channels must be 1 or 3");
  for (int t = 0; t < v.frames; ++t) {
    ImageU16 img;
    img.height = v.height;
    img.width = v.width;
    img.channels = v.channels;
    img.maxval = 65535;
    img.data.resize(static_cast<std::size_t>(v.height) * v.width * v.channels);
    const float* src = v.frame_ptr(t);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
      const float c = clamp(src[i], 0.0f, 1.0f);
      img.data[i] = static_cast<std::uint16_t>(std::lround(c * 65535.0f));
    }
    write_pnm(dir + "/" + frame_name(t, v.channels == 3 ? "ppm" : "pgm"), img);
  }
}

}  // namespace stseg
