#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "stseg/sparse_matrix.hpp"

namespace stseg {

// Matrix-free normalized Laplacian L = I - D^{-1/2} (W + S) D^{-1/2} where
// S is an optional non-negative diagonal of self-loop weights and
// D = diag(row sums of W + S). Self-loops arise from graph reduction (the
// collapsed intra-group weight) and from mirrored temporal boundaries; they
// shift degrees and the quadratic form but are never "cut", which is what
// keeps normalized-cut values of the reduced graph exact.
class NormalizedLaplacian {
 public:
  explicit NormalizedLaplacian(const SparseSymMatrix& w,
                               std::vector<double> self_loops = {})
      : w_(&w), self_(std::move(self_loops)) {
    const std::size_t n = static_cast<std::size_t>(w.n());
    if (self_.empty()) self_.assign(n, 0.0);
    if (self_.size() != n)
      throw InputError("NormalizedLaplacian: self-loop vector size mismatch");
    degree_ = w.degrees();
    dinv_sqrt_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      degree_[i] += self_[i];
      if (!(degree_[i] > 0.0))
        throw InputError("NormalizedLaplacian: isolated node " + std::to_string(i) +
                         " (zero degree)");
      dinv_sqrt_[i] = 1.0 / std::sqrt(degree_[i]);
    }
  }

  NodeId n() const { return w_->n(); }
  const std::vector<double>& degrees() const { return degree_; }
  const std::vector<double>& dinv_sqrt() const { return dinv_sqrt_; }
  const SparseSymMatrix& weights() const { return *w_; }
  const std::vector<double>& self_loops() const { return self_; }

  // y = L x
  void apply(const double* x, double* y) const {
    const std::size_t n = static_cast<std::size_t>(w_->n());
    scratch_.resize(n);
    for (std::size_t i = 0; i < n; ++i) scratch_[i] = dinv_sqrt_[i] * x[i];
    w_->matvec(scratch_.data(), y);
    for (std::size_t i = 0; i < n; ++i) {
      const double norm_wx = (y[i] + self_[i] * scratch_[i]) * dinv_sqrt_[i];
      y[i] = x[i] - norm_wx;
    }
  }

 private:
  const SparseSymMatrix* w_;
  std::vector<double> self_;
  std::vector<double> degree_;
  std::vector<double> dinv_sqrt_;
  mutable std::vector<double> scratch_;
};

inline NormalizedLaplacian build_laplacian(const SparseSymMatrix& w,
                                           std::vector<double> self_loops = {}) {
  return NormalizedLaplacian(w, std::move(self_loops));
}

// Normalized cut of a bipartition (A = flagged nodes, B = complement):
// cut(A,B)/vol(A) + cut(A,B)/vol(B), volumes including self-loops.
inline double normalized_cut(const SparseSymMatrix& w, const std::vector<char>& in_a,
                             const std::vector<double>& self_loops = {}) {
  const std::size_t n = static_cast<std::size_t>(w.n());
  std::vector<char> in_b(n);
  for (std::size_t i = 0; i < n; ++i) in_b[i] = !in_a[i];
  const double cut = w.cut(in_a, in_b);
  std::vector<double> deg = w.degrees();
  if (!self_loops.empty())
    for (std::size_t i = 0; i < n; ++i) deg[i] += self_loops[i];
  double vol_a = 0.0, vol_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) (in_a[i] ? vol_a : vol_b) += deg[i];
  if (vol_a <= 0.0 || vol_b <= 0.0)
    throw NumericError("normalized_cut: empty side of bipartition");
  return cut / vol_a + cut / vol_b;
}

}  // namespace stseg
