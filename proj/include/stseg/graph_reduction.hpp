#pragma once

#include <vector>

#include "stseg/sparse_matrix.hpp"

namespace stseg {

// Graph reduction over a node partition. Inter-group weights are the sums of
// the crossing edge weights; the weight collapsed inside a group (plus any
// self-loops carried by its nodes) becomes the group's self-loop. With
// volumes computed including self-loops, the normalized cut of every
// group-respecting partition is unchanged: cuts are sums of the same crossing
// weights, and group degrees are the exact sums of member degrees.
struct GraphReduction {
  std::vector<NodeId> group_of;        // node -> group id (0..group_count-1)
  NodeId group_count = 0;
  std::vector<std::int64_t> sizes;     // nodes per group
  SparseSymMatrix reduced;             // inter-group weights
  std::vector<double> self_loops;      // per-group collapsed weight
};

inline GraphReduction reduce_graph(const SparseSymMatrix& w,
                                   const std::vector<NodeId>& group_of,
                                   const std::vector<double>& node_self_loops = {}) {
  const std::size_t n = static_cast<std::size_t>(w.n());
  if (group_of.size() != n)
    throw InputError("reduce_graph: group map size mismatch");
  GraphReduction red;
  red.group_of = group_of;
  NodeId ng = 0;
  for (NodeId g : group_of) {
    if (g < 0) throw InputError("reduce_graph: negative group id");
    ng = std::max(ng, g + 1);
  }
  red.group_count = ng;
  red.sizes.assign(static_cast<std::size_t>(ng), 0);
  for (NodeId g : group_of) ++red.sizes[static_cast<std::size_t>(g)];
  for (std::int64_t s : red.sizes)
    if (s == 0) throw InputError("reduce_graph: empty group id (non-contiguous partition)");

  red.self_loops.assign(static_cast<std::size_t>(ng), 0.0);
  if (!node_self_loops.empty()) {
    if (node_self_loops.size() != n)
      throw InputError("reduce_graph: self-loop vector size mismatch");
    for (std::size_t i = 0; i < n; ++i)
      red.self_loops[static_cast<std::size_t>(group_of[i])] += node_self_loops[i];
  }

  std::vector<Triplet> edges;
  for (NodeId r = 0; r < w.n(); ++r) {
    const NodeId gr = group_of[static_cast<std::size_t>(r)];
    for (std::size_t k = w.row_begin(r); k < w.row_end(r); ++k) {
      const NodeId gc = group_of[static_cast<std::size_t>(w.col(k))];
      if (gr == gc) {
        // Both orders of each intra-group pair pass through here, so the
        // collapsed self-loop accumulates the full ordered sum.
        red.self_loops[static_cast<std::size_t>(gr)] += w.val(k);
      } else if (gr < gc) {
        edges.push_back({gr, gc, w.val(k)});
      }
    }
  }
  red.reduced = SparseSymMatrix::from_edges(ng, edges);
  return red;
}

}  // namespace stseg
