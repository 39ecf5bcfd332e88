#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "stseg/video_volume.hpp"
#include "stseg/watershed3d.hpp"

namespace stseg {

// A face sits between voxel (t,y,x) and its +axis neighbor (axis 0=t, 1=y,
// 2=x). Faces between voxels of different basins are grouped into arcs, one
// arc per unordered basin pair.
struct Face {
  std::int32_t t = 0, y = 0, x = 0;
  std::uint8_t axis = 0;
};

struct ArcSet {
  struct Arc {
    std::int32_t a = 0, b = 0;        // basin pair, a < b
    std::size_t begin = 0, end = 0;   // face span in `faces`
    double weight = 0.0;              // mean oriented response (arc_weights)
  };
  std::vector<Face> faces;  // grouped by arc, scan order within each arc
  std::vector<Arc> arcs;    // sorted by (a, b)
};

inline ArcSet collect_arcs(const BasinLabeling& b) {
  const int T = b.frames, H = b.height, W = b.width;
  std::vector<std::pair<std::uint64_t, Face>> tagged;
  auto key = [](std::int32_t u, std::int32_t v) {
    if (u > v) std::swap(u, v);
    return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint32_t>(v);
  };
  for (int t = 0; t < T; ++t)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        const std::int32_t l = b.at(t, y, x);
        if (t + 1 < T && b.at(t + 1, y, x) != l)
          tagged.push_back({key(l, b.at(t + 1, y, x)),
                            {static_cast<std::int32_t>(t), static_cast<std::int32_t>(y),
                             static_cast<std::int32_t>(x), 0}});
        if (y + 1 < H && b.at(t, y + 1, x) != l)
          tagged.push_back({key(l, b.at(t, y + 1, x)),
                            {static_cast<std::int32_t>(t), static_cast<std::int32_t>(y),
                             static_cast<std::int32_t>(x), 1}});
        if (x + 1 < W && b.at(t, y, x + 1) != l)
          tagged.push_back({key(l, b.at(t, y, x + 1)),
                            {static_cast<std::int32_t>(t), static_cast<std::int32_t>(y),
                             static_cast<std::int32_t>(x), 2}});
      }
  std::stable_sort(tagged.begin(), tagged.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  ArcSet out;
  out.faces.reserve(tagged.size());
  for (std::size_t s = 0; s < tagged.size();) {
    std::size_t e = s;
    while (e < tagged.size() && tagged[e].first == tagged[s].first) ++e;
    ArcSet::Arc arc;
    arc.a = static_cast<std::int32_t>(tagged[s].first >> 32);
    arc.b = static_cast<std::int32_t>(tagged[s].first & 0xffffffffu);
    arc.begin = out.faces.size();
    for (std::size_t i = s; i < e; ++i) out.faces.push_back(tagged[i].second);
    arc.end = out.faces.size();
    out.arcs.push_back(arc);
    s = e;
  }
  return out;
}

namespace detail {

// Spatial channel whose orientation is nearest to the angle theta (an
// in-frame normal direction, taken mod pi).
inline int orientation_channel(double ny, double nx) {
  double theta = std::atan2(ny, nx);
  if (theta < 0) theta += 3.14159265358979323846;
  const double step = 3.14159265358979323846 / OrientedBoundaryVolume::kSpatial;
  return static_cast<int>(std::lround(theta / step)) % OrientedBoundaryVolume::kSpatial;
}

}  // namespace detail

// Per-face oriented response and per-arc mean. Temporal faces read the
// temporal channel at the earlier frame; spatial faces read the spatial
// channel nearest to the local arc normal, estimated by summing signed face
// normals (oriented from the lower- to the higher-labelled basin) over the
// same arc's faces within radius 2.5 in the same frame.
inline void arc_weights(ArcSet& arcs, const BasinLabeling& b,
                        const OrientedBoundaryVolume& obv,
                        std::vector<double>* face_values_out = nullptr) {
  std::vector<double> face_values(arcs.faces.size(), 0.0);
  const double kNeighborRadius2 = 2.5 * 2.5;

  for (ArcSet::Arc& arc : arcs.arcs) {
    // Per-face center coordinates and signed normals for the spatial faces,
    // bucketed per frame (faces are stored in t-major scan order).
    std::size_t i = arc.begin;
    while (i < arc.end) {
      const std::int32_t t = arcs.faces[i].t;
      std::size_t j = i;
      while (j < arc.end && arcs.faces[j].t == t) ++j;
      // Spatial faces of this frame.
      std::vector<std::size_t> ids;
      std::vector<double> cy, cx, ny, nx;
      for (std::size_t f = i; f < j; ++f) {
        const Face& face = arcs.faces[f];
        if (face.axis == 0) {
          face_values[f] = obv.channel[OrientedBoundaryVolume::kSpatial].at(
              face.t, face.y, face.x);
          continue;
        }
        ids.push_back(f);
        if (face.axis == 2) {
          cy.push_back(face.y);
          cx.push_back(face.x + 0.5);
          const bool fwd = b.at(face.t, face.y, face.x) < b.at(face.t, face.y, face.x + 1);
          ny.push_back(0.0);
          nx.push_back(fwd ? 1.0 : -1.0);
        } else {
          cy.push_back(face.y + 0.5);
          cx.push_back(face.x);
          const bool fwd = b.at(face.t, face.y, face.x) < b.at(face.t, face.y + 1, face.x);
          ny.push_back(fwd ? 1.0 : -1.0);
          nx.push_back(0.0);
        }
      }
      for (std::size_t u = 0; u < ids.size(); ++u) {
        double sy = 0.0, sx = 0.0;
        for (std::size_t v = 0; v < ids.size(); ++v) {
          const double dy = cy[u] - cy[v], dx = cx[u] - cx[v];
          if (dy * dy + dx * dx <= kNeighborRadius2) {
            sy += ny[v];
            sx += nx[v];
          }
        }
        int o;
        if (sy * sy + sx * sx < 1e-18) {
          // Balanced neighborhood: fall back to the face's own normal.
          o = arcs.faces[ids[u]].axis == 2 ? 0 : OrientedBoundaryVolume::kSpatial / 2;
        } else {
          o = detail::orientation_channel(sy, sx);
        }
        const Face& face = arcs.faces[ids[u]];
        const int oy = face.axis == 1 ? face.y + 1 : face.y;
        const int ox = face.axis == 2 ? face.x + 1 : face.x;
        face_values[ids[u]] = 0.5 * (obv.channel[static_cast<std::size_t>(o)].at(face.t, face.y, face.x) +
                                     obv.channel[static_cast<std::size_t>(o)].at(face.t, oy, ox));
      }
      i = j;
    }
    double acc = 0.0;
    for (std::size_t f = arc.begin; f < arc.end; ++f) acc += face_values[f];
    arc.weight = acc / static_cast<double>(arc.end - arc.begin);
  }
  if (face_values_out) *face_values_out = std::move(face_values);
}

// Binary merge tree over basins. Entity ids: leaves 0..B-1, internal node i
// is entity B+i. Saliencies are non-decreasing in merge order (monotone
// lifting), which makes the merge levels an ultrametric on the basins.
struct MergeTree {
  std::int32_t leaves = 0;
  struct Node {
    std::int32_t left = 0, right = 0;  // entity ids
    double saliency = 0.0;
  };
  std::vector<Node> nodes;

  double max_saliency() const {
    return nodes.empty() ? 0.0 : nodes.back().saliency;
  }
};

struct UcmHierarchy {
  MergeTree tree;
  std::vector<double> face_saliency;  // aligned with ArcSet::faces; the level
                                      // at which the face's two basins merge
};

// Greedy agglomeration: always dissolve the arc with the smallest current
// weight; merged arcs combine by face-count-weighted mean; saliency is the
// running max of merge weights. Deterministic via lexicographic (weight,
// entity pair) ordering.
inline UcmHierarchy build_ucm(const BasinLabeling& b, const ArcSet& arcs) {
  const std::int64_t B = b.basin_count;
  UcmHierarchy out;
  out.tree.leaves = static_cast<std::int32_t>(B);
  out.face_saliency.assign(arcs.faces.size(), 0.0);
  if (B <= 1) return out;

  struct ArcState {
    double wsum = 0.0;  // sum of face values
    std::vector<std::uint32_t> faces;
  };
  auto pack = [](std::int64_t u, std::int64_t v) {
    if (u > v) std::swap(u, v);
    return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint64_t>(v);
  };
  std::map<std::uint64_t, ArcState> live;
  std::vector<std::set<std::int64_t>> adj(static_cast<std::size_t>(2 * B - 1));
  using Entry = std::tuple<double, std::int64_t, std::int64_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> pq;

  for (const ArcSet::Arc& arc : arcs.arcs) {
    ArcState st;
    st.wsum = arc.weight * static_cast<double>(arc.end - arc.begin);
    st.faces.reserve(arc.end - arc.begin);
    for (std::size_t f = arc.begin; f < arc.end; ++f)
      st.faces.push_back(static_cast<std::uint32_t>(f));
    live.emplace(pack(arc.a, arc.b), std::move(st));
    adj[static_cast<std::size_t>(arc.a)].insert(arc.b);
    adj[static_cast<std::size_t>(arc.b)].insert(arc.a);
    pq.emplace(arc.weight, arc.a, arc.b);
  }

  double running_max = 0.0;
  std::int64_t merges = 0;
  while (merges < B - 1) {
    if (pq.empty())
      throw NumericError("build_ucm: region adjacency graph is disconnected");
    const auto [w, u, v] = pq.top();
    pq.pop();
    auto it = live.find(pack(u, v));
    if (it == live.end()) continue;  // stale: arc already dissolved/rebuilt
    const double cur = it->second.wsum / static_cast<double>(it->second.faces.size());
    if (cur != w) continue;  // stale: weight changed by a rebuild

    const std::int64_t e = B + merges;
    ++merges;
    running_max = std::max(running_max, w);
    out.tree.nodes.push_back({static_cast<std::int32_t>(u), static_cast<std::int32_t>(v),
                              running_max});
    for (std::uint32_t f : it->second.faces) out.face_saliency[f] = running_max;
    live.erase(it);
    adj[static_cast<std::size_t>(u)].erase(v);
    adj[static_cast<std::size_t>(v)].erase(u);

    std::set<std::int64_t> neighbors;
    neighbors.insert(adj[static_cast<std::size_t>(u)].begin(), adj[static_cast<std::size_t>(u)].end());
    neighbors.insert(adj[static_cast<std::size_t>(v)].begin(), adj[static_cast<std::size_t>(v)].end());
    for (std::int64_t c : neighbors) {
      ArcState merged;
      for (std::int64_t side : {u, v}) {
        auto old = live.find(pack(side, c));
        if (old == live.end()) continue;
        merged.wsum += old->second.wsum;
        if (merged.faces.empty())
          merged.faces = std::move(old->second.faces);
        else
          merged.faces.insert(merged.faces.end(), old->second.faces.begin(),
                              old->second.faces.end());
        live.erase(old);
        adj[static_cast<std::size_t>(c)].erase(side);
      }
      const double nw = merged.wsum / static_cast<double>(merged.faces.size());
      pq.emplace(nw, c, e);
      adj[static_cast<std::size_t>(c)].insert(e);
      adj[static_cast<std::size_t>(e)].insert(c);
      live.emplace(pack(c, e), std::move(merged));
    }
    adj[static_cast<std::size_t>(u)].clear();
    adj[static_cast<std::size_t>(v)].clear();
  }
  return out;
}

// Cut the tree at level lambda: merges with saliency < lambda are applied.
inline SegmentationVolume threshold_segmentation(const MergeTree& tree,
                                                 const BasinLabeling& b,
                                                 double lambda) {
  const std::int32_t B = tree.leaves;
  const std::size_t entities = static_cast<std::size_t>(2 * std::max<std::int32_t>(B, 1) - 1);
  std::vector<std::int32_t> parent(entities);
  for (std::size_t i = 0; i < entities; ++i) parent[i] = static_cast<std::int32_t>(i);
  std::function<std::int32_t(std::int32_t)> find = [&](std::int32_t x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    if (!(tree.nodes[i].saliency < lambda)) continue;
    const std::int32_t e = B + static_cast<std::int32_t>(i);
    parent[static_cast<std::size_t>(find(tree.nodes[i].left))] = e;
    parent[static_cast<std::size_t>(find(tree.nodes[i].right))] = e;
  }

  std::vector<std::int32_t> leaf_region(static_cast<std::size_t>(B), -1);
  std::vector<std::int32_t> root_label(entities, -1);
  SegmentationVolume seg(b.frames, b.height, b.width);
  seg.threshold = lambda;
  std::int32_t next = 0;
  for (std::size_t p = 0; p < b.labels.size(); ++p) {
    const std::int32_t leaf = b.labels[p];
    std::int32_t lbl = leaf_region[static_cast<std::size_t>(leaf)];
    if (lbl < 0) {
      const std::int32_t root = find(leaf);
      if (root_label[static_cast<std::size_t>(root)] < 0)
        root_label[static_cast<std::size_t>(root)] = next++;
      lbl = root_label[static_cast<std::size_t>(root)];
      leaf_region[static_cast<std::size_t>(leaf)] = lbl;
    }
    seg.labels[p] = lbl;
  }
  seg.region_count = next;
  return seg;
}

// Merge level of two basins (the saliency of their lowest common ancestor);
// this is the ultrametric the hierarchy represents. O(tree height).
inline double merge_level(const MergeTree& tree, std::int32_t a, std::int32_t b) {
  if (a == b) return 0.0;
  const std::int32_t B = tree.leaves;
  std::vector<std::int32_t> up(static_cast<std::size_t>(2 * B - 1), -1);
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    up[static_cast<std::size_t>(tree.nodes[i].left)] = static_cast<std::int32_t>(i);
    up[static_cast<std::size_t>(tree.nodes[i].right)] = static_cast<std::int32_t>(i);
  }
  std::vector<char> seen(tree.nodes.size(), 0);
  std::int32_t e = a;
  while (true) {
    const std::int32_t n = up[static_cast<std::size_t>(e)];
    if (n < 0) break;
    seen[static_cast<std::size_t>(n)] = 1;
    e = B + n;
  }
  e = b;
  while (true) {
    const std::int32_t n = up[static_cast<std::size_t>(e)];
    if (n < 0) throw NumericError("merge_level: basins never merge");
    if (seen[static_cast<std::size_t>(n)]) return tree.nodes[static_cast<std::size_t>(n)].saliency;
    e = B + n;
  }
}

struct UcmRaster {
  VolumeField spatial;   // per frame, doubled grid 2H x 2W
  VolumeField temporal;  // per frame, H x W; frame t = faces between t and t+1
};

inline UcmRaster rasterize_ucm(const MergeTree& tree, const BasinLabeling& b,
                               const ArcSet& arcs,
                               const std::vector<double>& face_saliency) {
  (void)tree;
  const int T = b.frames, H = b.height, W = b.width;
  UcmRaster r;
  r.spatial = VolumeField(T, 2 * H, 2 * W);
  r.temporal = VolumeField(T, H, W);
  for (std::size_t f = 0; f < arcs.faces.size(); ++f) {
    const Face& face = arcs.faces[f];
    const float s = static_cast<float>(face_saliency[f]);
    if (face.axis == 0) {
      float& dst = r.temporal.at(face.t, face.y, face.x);
      dst = std::max(dst, s);
    } else if (face.axis == 1) {
      float& dst = r.spatial.at(face.t, 2 * face.y + 1, 2 * face.x);
      dst = std::max(dst, s);
    } else {
      float& dst = r.spatial.at(face.t, 2 * face.y, 2 * face.x + 1);
      dst = std::max(dst, s);
    }
  }
  // Junction pixels (odd, odd): max of the up-to-four adjacent face pixels.
  for (int t = 0; t < T; ++t)
    for (int y = 1; y < 2 * H; y += 2)
      for (int x = 1; x < 2 * W; x += 2) {
        float m = r.spatial.at(t, y, x - 1);
        if (x + 1 < 2 * W) m = std::max(m, r.spatial.at(t, y, x + 1));
        m = std::max(m, r.spatial.at(t, y - 1, x));
        if (y + 1 < 2 * H) m = std::max(m, r.spatial.at(t, y + 1, x));
        r.spatial.at(t, y, x) = m;
      }
  return r;
}

// Rescales all saliencies so the maximum lands just below 1: the top level
// of a uniform threshold grid over [0,1] then merges everything (a single
// region), while level 0 reproduces the basins.
inline double normalize_saliencies(UcmHierarchy& h) {
  const double m = h.tree.max_saliency();
  if (m <= 0) return 1.0;
  const double factor = 1.0 / (m * (1.0 + 1e-6));
  for (auto& n : h.tree.nodes) n.saliency *= factor;
  for (double& s : h.face_saliency) s *= factor;
  return factor;
}

inline nlohmann::json merge_tree_json(const MergeTree& tree) {
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    nodes.push_back({{"id", tree.leaves + static_cast<std::int64_t>(i)},
                     {"children", {tree.nodes[i].left, tree.nodes[i].right}},
                     {"saliency", tree.nodes[i].saliency}});
  }
  return nlohmann::json{{"leaves", tree.leaves}, {"nodes", nodes}};
}

}  // namespace stseg
