#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <vector>

#include "stseg/common.hpp"

namespace stseg {

using NodeId = std::int64_t;

struct Triplet {
  NodeId i = 0, j = 0;
  double w = 0.0;
};

// Symmetric sparse matrix in CSR form. Every stored entry appears in both
// (i,j) and (j,i); the diagonal is never stored (self-loops are carried
// separately by consumers that need them).
class SparseSymMatrix {
 public:
  SparseSymMatrix() = default;

  // Builds from an edge list with one entry per unordered pair. Duplicate
  // pairs are summed. Entries are mirrored, stable-sorted and merged so that
  // the (i,j) and (j,i) sums are accumulated in the same order and therefore
  // bitwise equal.
  static SparseSymMatrix from_edges(NodeId n, const std::vector<Triplet>& edges) {
    SparseSymMatrix m;
    m.n_ = n;
    std::vector<Triplet> both;
    both.reserve(edges.size() * 2);
    for (const Triplet& e : edges) {
      if (e.i == e.j) throw InputError("SparseSymMatrix: self-loop in edge list");
      if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n)
        throw InputError("SparseSymMatrix: node id out of range");
      if (!(e.w > 0.0) || !std::isfinite(e.w))
        throw InputError("SparseSymMatrix: weights must be finite and > 0");
      both.push_back(e);
      both.push_back({e.j, e.i, e.w});
    }
    std::stable_sort(both.begin(), both.end(), [](const Triplet& a, const Triplet& b) {
      return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    m.row_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
    for (std::size_t s = 0; s < both.size();) {
      std::size_t e = s + 1;
      double w = both[s].w;
      while (e < both.size() && both[e].i == both[s].i && both[e].j == both[s].j)
        w += both[e++].w;
      m.col_.push_back(both[s].j);
      m.val_.push_back(w);
      ++m.row_ptr_[static_cast<std::size_t>(both[s].i) + 1];
      s = e;
    }
    for (std::size_t r = 0; r < static_cast<std::size_t>(n); ++r)
      m.row_ptr_[r + 1] += m.row_ptr_[r];
    return m;
  }

  NodeId n() const { return n_; }
  std::size_t nnz() const { return col_.size(); }

  std::size_t row_begin(NodeId r) const { return static_cast<std::size_t>(row_ptr_[static_cast<std::size_t>(r)]); }
  std::size_t row_end(NodeId r) const { return static_cast<std::size_t>(row_ptr_[static_cast<std::size_t>(r) + 1]); }
  NodeId col(std::size_t k) const { return col_[k]; }
  double val(std::size_t k) const { return val_[k]; }

  // y = W x
  void matvec(const double* x, double* y) const {
    for (NodeId r = 0; r < n_; ++r) {
      double acc = 0.0;
      for (std::size_t k = row_begin(r); k < row_end(r); ++k)
        acc += val_[k] * x[col_[k]];
      y[r] = acc;
    }
  }

  // Row sums (degrees without self-loops).
  std::vector<double> degrees() const {
    std::vector<double> d(static_cast<std::size_t>(n_), 0.0);
    for (NodeId r = 0; r < n_; ++r) {
      double acc = 0.0;
      for (std::size_t k = row_begin(r); k < row_end(r); ++k) acc += val_[k];
      d[static_cast<std::size_t>(r)] = acc;
    }
    return d;
  }

  // Sum of weights between node sets A and B (each node at most once,
  // membership given by flags). Counts each ordered (a in A, b in B) pair.
  double cut(const std::vector<char>& in_a, const std::vector<char>& in_b) const {
    double acc = 0.0;
    for (NodeId r = 0; r < n_; ++r) {
      if (!in_a[static_cast<std::size_t>(r)]) continue;
      for (std::size_t k = row_begin(r); k < row_end(r); ++k)
        if (in_b[static_cast<std::size_t>(col_[k])]) acc += val_[k];
    }
    return acc;
  }

  // Debug text dump: "n nnz" header then one "i j w" line per stored entry
  // with i < j.
  void write_triplets(std::ostream& out) const {
    std::size_t upper = 0;
    for (NodeId r = 0; r < n_; ++r)
      for (std::size_t k = row_begin(r); k < row_end(r); ++k)
        if (col_[k] > r) ++upper;
    out << n_ << " " << upper << "\n";
    out.precision(17);
    for (NodeId r = 0; r < n_; ++r)
      for (std::size_t k = row_begin(r); k < row_end(r); ++k)
        if (col_[k] > r) out << r << " " << col_[k] << " " << val_[k] << "\n";
  }

  static SparseSymMatrix read_triplets(std::istream& in) {
    NodeId n = 0;
    std::size_t cnt = 0;
    if (!(in >> n >> cnt)) throw InputError("triplet stream: bad header");
    std::vector<Triplet> edges(cnt);
    for (std::size_t k = 0; k < cnt; ++k)
      if (!(in >> edges[k].i >> edges[k].j >> edges[k].w))
        throw InputError("triplet stream: truncated");
    return from_edges(n, edges);
  }

 private:
  NodeId n_ = 0;
  std::vector<std::int64_t> row_ptr_;
  std::vector<NodeId> col_;
  std::vector<double> val_;
};

}  // namespace stseg
