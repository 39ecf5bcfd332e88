#pragma once

#include <functional>
#include <string>
#include <vector>

#include "stseg/eigensolver.hpp"
#include "stseg/video_volume.hpp"

namespace stseg {

struct TemporalWindow {
  int t0 = 0;
  int len = 0;
};

// Overlapping windows [t0, t0+len), stride 1; a single clamped window when
// the sequence is shorter than the window length.
inline std::vector<TemporalWindow> window_schedule(int frames, int len) {
  if (frames < 1) throw InputError("window_schedule: need at least one frame");
  if (len < 1) throw ConfigError("window_schedule: window length must be >= 1");
  std::vector<TemporalWindow> out;
  if (frames <= len) {
    out.push_back({0, frames});
    return out;
  }
  for (int t0 = 0; t0 + len <= frames; ++t0) out.push_back({t0, len});
  return out;
}

// One eigenproblem instance: the affinity matrix restricted to a frame range
// plus the voxel <-> node correspondence used to lift solutions back to
// pixels. Reduced graphs map several pixels of a frame to one node.
struct WindowProblem {
  SparseSymMatrix w;
  std::vector<double> self_loops;
  int len = 0, height = 0, width = 0;
  std::vector<std::vector<NodeId>> pixel_node;  // [rel_frame][pixel] -> node
};

using WindowProblemBuilder = std::function<WindowProblem(const TemporalWindow&)>;

struct WindowEigen {
  TemporalWindow win;
  bool converged = false;
  int iterations = 0;
  int operator_applications = 0;
  std::vector<double> eigenvalues;   // ascending (storage order)
  std::vector<double> residuals;
  std::vector<VolumeField> fields;   // lifted indicator approximations
  // Cross-window correspondence: slot s of every window refers to
  // fields[slot_index[s]] with orientation slot_sign[s].
  std::vector<int> slot_index;
  std::vector<double> slot_sign;
};

struct EigenStack {
  int frames = 0, height = 0, width = 0, k = 0;
  double scale = 1.0;
  std::vector<WindowEigen> windows;
};

namespace detail {

// Greedy matching of this window's eigenvectors to the previous window's
// slots by absolute correlation over the overlapping frames; the sign makes
// the matched correlation non-negative.
inline void align_to_previous(const WindowEigen& prev, WindowEigen& cur) {
  const int k = static_cast<int>(cur.fields.size());
  cur.slot_index.resize(static_cast<std::size_t>(k));
  cur.slot_sign.assign(static_cast<std::size_t>(k), 1.0);
  const int lo = std::max(prev.win.t0, cur.win.t0);
  const int hi = std::min(prev.win.t0 + prev.win.len, cur.win.t0 + cur.win.len);
  std::vector<char> used(static_cast<std::size_t>(k), 0);
  if (lo >= hi) {  // no overlap: identity mapping
    for (int s = 0; s < k; ++s) cur.slot_index[static_cast<std::size_t>(s)] = s;
    return;
  }
  for (int s = 0; s < k; ++s) {
    const VolumeField& pf = prev.fields[static_cast<std::size_t>(prev.slot_index[static_cast<std::size_t>(s)])];
    const double psign = prev.slot_sign[static_cast<std::size_t>(s)];
    double best = -1.0;
    int best_j = -1;
    double best_corr = 0.0;
    for (int j = 0; j < k; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const VolumeField& cf = cur.fields[static_cast<std::size_t>(j)];
      double dot = 0.0, np = 0.0, nc = 0.0;
      for (int t = lo; t < hi; ++t) {
        const float* a = pf.frame_ptr(t - prev.win.t0);
        const float* b = cf.frame_ptr(t - cur.win.t0);
        const std::size_t cnt = static_cast<std::size_t>(pf.height) * pf.width;
        for (std::size_t i = 0; i < cnt; ++i) {
          dot += static_cast<double>(a[i]) * b[i];
          np += static_cast<double>(a[i]) * a[i];
          nc += static_cast<double>(b[i]) * b[i];
        }
      }
      const double denom = std::sqrt(np * nc);
      const double corr = denom > 0 ? dot / denom : 0.0;
      if (std::fabs(corr) > best) {
        best = std::fabs(corr);
        best_j = j;
        best_corr = corr;
      }
    }
    used[static_cast<std::size_t>(best_j)] = 1;
    cur.slot_index[static_cast<std::size_t>(s)] = best_j;
    cur.slot_sign[static_cast<std::size_t>(s)] =
        psign * (best_corr < 0 ? -1.0 : 1.0);
  }
}

}  // namespace detail

// Solves the windowed eigenproblems and lifts eigenvectors to voxel volumes:
// x = D^{-1/2} v broadcast over each node's pixels (the normalized-cut
// indicator approximation).
inline EigenStack solve_windows(const WindowProblemBuilder& builder,
                                const std::vector<TemporalWindow>& schedule,
                                int frames, int height, int width,
                                const EigSolveOptions& base_options,
                                std::uint64_t seed, int jobs = 1) {
  EigenStack stack;
  stack.frames = frames;
  stack.height = height;
  stack.width = width;
  stack.k = base_options.k;
  stack.windows.resize(schedule.size());

  parallel_for(schedule.size(), jobs, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t wi = lo; wi < hi; ++wi) {
      const TemporalWindow& win = schedule[wi];
      try {
        WindowProblem prob = builder(win);
        NormalizedLaplacian lap(prob.w, prob.self_loops);
        EigSolveOptions opt = base_options;
        opt.k = std::min<int>(opt.k, static_cast<int>(lap.n()));
        opt.seed = mix_seed(seed, wi);
        EigSolveResult sol = solve_smallest_k(lap, opt);

        WindowEigen we;
        we.win = win;
        we.converged = sol.converged;
        we.iterations = sol.iterations;
        we.operator_applications = sol.operator_applications;
        we.eigenvalues = sol.eigenvalues;
        we.residuals = sol.residuals;
        const auto& dinv = lap.dinv_sqrt();
        for (int j = 0; j < opt.k; ++j) {
          VolumeField f(prob.len, prob.height, prob.width);
          for (int t = 0; t < prob.len; ++t) {
            const auto& pn = prob.pixel_node[static_cast<std::size_t>(t)];
            float* dst = f.frame_ptr(t);
            for (std::size_t p = 0; p < pn.size(); ++p) {
              const NodeId node = pn[p];
              dst[p] = static_cast<float>(sol.vectors(node, j) *
                                          dinv[static_cast<std::size_t>(node)]);
            }
          }
          we.fields.push_back(std::move(f));
        }
        we.slot_index.resize(we.fields.size());
        for (std::size_t s = 0; s < we.fields.size(); ++s)
          we.slot_index[s] = static_cast<int>(s);
        we.slot_sign.assign(we.fields.size(), 1.0);
        stack.windows[wi] = std::move(we);
      } catch (const std::exception& e) {
        throw NumericError("window t0=" + std::to_string(win.t0) + ": " + e.what());
      }
    }
  });

  for (std::size_t wi = 1; wi < stack.windows.size(); ++wi)
    detail::align_to_previous(stack.windows[wi - 1], stack.windows[wi]);
  return stack;
}

}  // namespace stseg
