#pragma once

#include <algorithm>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stseg/image_io.hpp"
#include "stseg/video_volume.hpp"
#include "stseg/volume_io.hpp"

namespace stseg {

// Human (or synthetic) annotations: label maps for a subset of frames, from
// one or more annotators. Labels of one annotator are linked across frames:
// equal label means the same region over time.
struct GroundTruth {
  int frames = 0;
  int height = 0;
  int width = 0;
  std::vector<int> annotated_frames;    // sorted, unique
  std::vector<std::string> annotators;  // ids, e.g. "a0"
  // labels[annotator][i] is the H*W label map for annotated_frames[i].
  std::vector<std::vector<std::vector<std::int32_t>>> labels;

  bool empty() const { return annotated_frames.empty() || annotators.empty(); }

  const std::vector<std::int32_t>& map_of(std::size_t annotator,
                                          std::size_t frame_pos) const {
    return labels[annotator][frame_pos];
  }
};

inline void write_ground_truth(const std::string& dir, const GroundTruth& gt) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json j;
  j["frames"] = gt.frames;
  j["height"] = gt.height;
  j["width"] = gt.width;
  j["annotated_frames"] = gt.annotated_frames;
  j["annotators"] = gt.annotators;
  for (std::size_t a = 0; a < gt.annotators.size(); ++a) {
    const std::string adir = dir + "/" + gt.annotators[a];
    fs::create_directories(adir);
    for (std::size_t i = 0; i < gt.annotated_frames.size(); ++i) {
      ImageU16 img;
      img.height = gt.height;
      img.width = gt.width;
      img.channels = 1;
      img.maxval = 65535;
      img.data.resize(static_cast<std::size_t>(gt.height) * gt.width);
      const auto& m = gt.labels[a][i];
      for (std::size_t p = 0; p < m.size(); ++p)
        img.data[p] = static_cast<std::uint16_t>(m[p]);
      write_pnm(adir + "/" + frame_name(gt.annotated_frames[i], "pgm"), img);
    }
  }
  std::ofstream out(dir + "/gt.json");
  if (!out) throw InputError("cannot write gt.json in " + dir);
  out << j.dump(2) << "\n";
}

inline GroundTruth load_ground_truth(const std::string& dir) {
  std::ifstream in(dir + "/gt.json");
  if (!in) throw InputError("missing gt.json in " + dir);
  nlohmann::json j;
  in >> j;
  GroundTruth gt;
  gt.frames = j["frames"].get<int>();
  gt.height = j["height"].get<int>();
  gt.width = j["width"].get<int>();
  gt.annotated_frames = j["annotated_frames"].get<std::vector<int>>();
  gt.annotators = j["annotators"].get<std::vector<std::string>>();
  if (gt.annotated_frames.empty() || gt.annotators.empty())
    throw InputError("ground truth at " + dir + " has no annotations");
  if (!std::is_sorted(gt.annotated_frames.begin(), gt.annotated_frames.end()))
    std::sort(gt.annotated_frames.begin(), gt.annotated_frames.end());
  gt.labels.resize(gt.annotators.size());
  for (std::size_t a = 0; a < gt.annotators.size(); ++a) {
    gt.labels[a].resize(gt.annotated_frames.size());
    for (std::size_t i = 0; i < gt.annotated_frames.size(); ++i) {
      const std::string path =
          dir + "/" + gt.annotators[a] + "/" + frame_name(gt.annotated_frames[i], "pgm");
      ImageU16 img = read_pnm(path);
      if (img.height != gt.height || img.width != gt.width || img.channels != 1)
        throw InputError("ground-truth label map shape mismatch: " + path);
      auto& m = gt.labels[a][i];
      m.resize(img.data.size());
      for (std::size_t p = 0; p < img.data.size(); ++p) m[p] = img.data[p];
    }
  }
  return gt;
}

}  // namespace stseg
