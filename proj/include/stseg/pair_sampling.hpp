#pragma once

#include <array>
#include <cmath>

#include "stseg/common.hpp"
#include "stseg/features.hpp"

namespace stseg {

struct PairSamplingParams {
  double d0 = 1.0;        // minimum pair distance
  double d_max = 8.0;     // maximum pair distance
  double mu_d = 2.0;      // mean of the distance law
  double sigma_d = 1.5;   // std of the distance law
};

// Feature pairs drawn at random locations with random offsets whose length
// follows a truncated Normal(mu_d, sigma_d) on [d0, d_max]. Drawing the
// distance from this law realizes the distance weighting of the affinity
// model by importance sampling.
struct PairSampleSet {
  struct Pair {
    std::array<float, FeatureField::kDim> a;
    std::array<float, FeatureField::kDim> b;
    float dist;
  };
  int t = 0;
  std::uint64_t seed = 0;
  std::vector<Pair> pairs;
};

inline PairSampleSet sample_pairs(const FeatureField& ff, int n, std::uint64_t seed,
                                  const PairSamplingParams& par = {}) {
  if (ff.height < 8 || ff.width < 8)
    throw InputError("sample_pairs: frame must be at least 8x8");
  if (par.d0 <= 0 || par.d_max < par.d0)
    throw ConfigError("sample_pairs: invalid distance bounds");
  PairSampleSet ps;
  ps.t = ff.t;
  ps.seed = seed;
  ps.pairs.reserve(static_cast<std::size_t>(n));
  Rng rng(seed);
  constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
  int guard = 0;
  while (static_cast<int>(ps.pairs.size()) < n) {
    if (++guard > 1000 * n)
      throw InputError("sample_pairs: cannot place pairs inside the frame");
    const int y0 = static_cast<int>(rng.uniform_int(0, ff.height - 1));
    const int x0 = static_cast<int>(rng.uniform_int(0, ff.width - 1));
    // Truncated normal via rejection.
    double d = rng.normal(par.mu_d, par.sigma_d);
    if (d < par.d0 || d > par.d_max) continue;
    const double phi = rng.uniform(0.0, kTwoPi);
    const int y1 = static_cast<int>(std::lround(y0 + d * std::sin(phi)));
    const int x1 = static_cast<int>(std::lround(x0 + d * std::cos(phi)));
    if (y1 < 0 || y1 >= ff.height || x1 < 0 || x1 >= ff.width) continue;
    const double dy = y1 - y0, dx = x1 - x0;
    const double actual = std::sqrt(dy * dy + dx * dx);
    if (actual < par.d0 || actual > par.d_max) continue;
    PairSampleSet::Pair pr;
    const float* fa = ff.at(y0, x0);
    const float* fb = ff.at(y1, x1);
    for (int c = 0; c < FeatureField::kDim; ++c) {
      pr.a[c] = fa[c];
      pr.b[c] = fb[c];
    }
    pr.dist = static_cast<float>(actual);
    ps.pairs.push_back(pr);
  }
  return ps;
}

}  // namespace stseg
