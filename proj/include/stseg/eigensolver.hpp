#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "stseg/common.hpp"
#include "stseg/laplacian.hpp"

namespace stseg {

struct EigSolveOptions {
  int k = 20;
  double tol = 1e-6;        // residual ||L v - lambda v|| per returned pair
  int max_ops = 2000;       // operator-application budget
  std::uint64_t seed = 12345;
  int block_pad = 8;        // extra block columns beyond k
};

struct EigSolveResult {
  bool converged = false;
  int iterations = 0;
  int operator_applications = 0;
  std::vector<double> eigenvalues;  // ascending, size k
  std::vector<double> residuals;    // size k
  Eigen::MatrixXd vectors;          // n x k, orthonormal columns
};

namespace detail {

// Orthonormalizes the columns of v against the columns of against (twice,
// for stability) and internally via column-pivoted QR; rank-deficient
// directions are dropped. Returns a matrix with orthonormal columns.
inline Eigen::MatrixXd orthonormalize(Eigen::MatrixXd v,
                                      const Eigen::MatrixXd* against) {
  if (v.cols() == 0) return v;
  for (int pass = 0; pass < 2; ++pass)
    if (against && against->cols() > 0) v -= (*against) * (against->transpose() * v);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(v);
  const double thresh = 1e-10 * std::max(1.0, qr.matrixQR().diagonal().cwiseAbs().maxCoeff());
  int rank = 0;
  const int maxr = static_cast<int>(std::min(v.rows(), v.cols()));
  for (int i = 0; i < maxr; ++i)
    if (std::abs(qr.matrixQR()(i, i)) > thresh) ++rank; else break;
  if (rank == 0) return Eigen::MatrixXd(v.rows(), 0);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(v.rows(), rank);
  // One more pass against the fixed basis: householder application can leak
  // tiny components back in.
  if (against && against->cols() > 0) {
    q -= (*against) * (against->transpose() * q);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr2(q);
    q = qr2.householderQ() * Eigen::MatrixXd::Identity(q.rows(), rank);
  }
  return q;
}

}  // namespace detail

// Smallest-k eigenpairs of the normalized Laplacian by blocked
// locally-optimal preconditioned conjugate gradient (basis variant: the
// trial space [X W P] is kept orthonormal and the Rayleigh-Ritz problem is
// solved densely). Deterministic for a fixed seed.
inline EigSolveResult solve_smallest_k(const NormalizedLaplacian& op,
                                       const EigSolveOptions& opt = {}) {
  const int n = static_cast<int>(op.n());
  const int k = opt.k;
  if (k <= 0) throw ConfigError("solve_smallest_k: k must be positive");
  if (n < k) throw InputError("solve_smallest_k: need n >= k");

  const int m = std::min(n, k + std::max(opt.block_pad, k / 4));
  EigSolveResult res;

  auto apply_block = [&](const Eigen::MatrixXd& x) {
    Eigen::MatrixXd y(x.rows(), x.cols());
    for (int c = 0; c < x.cols(); ++c) {
      Eigen::VectorXd xc = x.col(c);
      Eigen::VectorXd yc(x.rows());
      op.apply(xc.data(), yc.data());
      y.col(c) = yc;
      ++res.operator_applications;
    }
    return y;
  };

  // Deterministic random start.
  Rng rng(opt.seed);
  Eigen::MatrixXd x(n, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) x(i, j) = rng.normal();
  x = detail::orthonormalize(std::move(x), nullptr);
  Eigen::MatrixXd ax = apply_block(x);

  Eigen::VectorXd theta;
  {
    Eigen::MatrixXd g = x.transpose() * ax;
    g = 0.5 * (g + g.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    theta = es.eigenvalues();
    x = (x * es.eigenvectors()).eval();
    ax = (ax * es.eigenvectors()).eval();
  }

  Eigen::MatrixXd p(n, 0);
  double best_worst_res = std::numeric_limits<double>::infinity();
  int stagnant = 0;

  for (int iter = 0;; ++iter) {
    Eigen::MatrixXd r = ax - x * theta.asDiagonal();
    Eigen::VectorXd rnorm(m);
    for (int c = 0; c < m; ++c) rnorm(c) = r.col(c).norm();
    double worst = 0.0;
    for (int c = 0; c < k; ++c) worst = std::max(worst, rnorm(c));

    res.iterations = iter;
    res.eigenvalues.assign(theta.data(), theta.data() + k);
    res.residuals.assign(rnorm.data(), rnorm.data() + k);
    res.vectors = x.leftCols(k);

    if (worst <= opt.tol) {
      res.converged = true;
      break;
    }
    if (res.operator_applications >= opt.max_ops) break;
    if (worst < best_worst_res * 0.999) {
      best_worst_res = worst;
      stagnant = 0;
    } else if (++stagnant > 40) {
      break;  // no progress; report achieved residuals
    }

    // New search directions: residuals plus the previous step, made
    // orthonormal to the current Ritz block.
    Eigen::MatrixXd v(n, r.cols() + p.cols());
    v << r, p;
    v = detail::orthonormalize(std::move(v), &x);
    if (v.cols() == 0) break;  // subspace exhausted (n small): nothing to add
    Eigen::MatrixXd av = apply_block(v);

    const int sm = static_cast<int>(x.cols() + v.cols());
    Eigen::MatrixXd s(n, sm), as(n, sm);
    s << x, v;
    as << ax, av;
    Eigen::MatrixXd g = s.transpose() * as;
    g = 0.5 * (g + g.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    const int keep = std::min(m, sm);
    Eigen::MatrixXd c = es.eigenvectors().leftCols(keep);
    theta = es.eigenvalues().head(keep);
    Eigen::MatrixXd xn = s * c;
    Eigen::MatrixXd axn = as * c;
    // The implicit conjugate-direction block: the part of the new Ritz
    // vectors that came from v.
    p = v * c.bottomRows(v.cols());
    x = std::move(xn);
    ax = std::move(axn);
  }
  return res;
}

}  // namespace stseg
