#pragma once

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "stseg/common.hpp"
#include "stseg/pair_sampling.hpp"

namespace stseg {

struct PmiParams {
  double rho = 1.25;           // PMI exponent
  int grid = 64;               // cache resolution per feature axis
  double density_floor = 1e-10;  // floor before division / log
  double delta_pmi = 2.0;      // magnitude used by degenerate (delta) models
};

// The 4-dim feature vector is reduced to three scalar channel groups before
// density estimation; the final PMI is the sum of per-group PMIs. This keeps
// every density cache two-dimensional (value at pixel 1 x value at pixel 2).
enum class FeatureGroup : int { luminance = 0, chroma = 1, variance = 2 };
constexpr int kGroupCount = 3;

inline double group_value(const float f[FeatureField::kDim], FeatureGroup g) {
  switch (g) {
    case FeatureGroup::luminance:
      return f[0];
    case FeatureGroup::chroma: {
      // Chroma magnitude relative to the neutral point, normalized so the
      // corner of the (a,b) square maps to 1.
      const double da = f[1] - 0.5, db = f[2] - 0.5;
      return clamp(std::sqrt(da * da + db * db) / 0.7071067811865476, 0.0, 1.0);
    }
    case FeatureGroup::variance:
      return f[3];
  }
  return 0.0;
}

// Symmetric 2D kernel-density cache over [0,1]^2 for one channel group, with
// its summed marginal. Grid cells are centered at (i+0.5)/G.
struct GroupDensity {
  int grid = 0;
  bool delta = false;       // degenerate samples: evaluate by equality test
  double bandwidth = 0.0;
  std::vector<double> joint;     // grid*grid, joint[i*grid+j]
  std::vector<double> marginal;  // grid

  static GroupDensity delta_model(int g) {
    GroupDensity d;
    d.grid = g;
    d.delta = true;
    return d;
  }

  // Gaussian-kernel KDE over the sample pairs (each pair contributes in one
  // order; symmetry comes from adding the transpose, which also makes the
  // cache bitwise symmetric). Bandwidth: Scott's rule on the pooled values.
  static GroupDensity fit(const std::vector<std::pair<double, double>>& samples,
                          int g) {
    GroupDensity d;
    d.grid = g;
    const std::size_t n = samples.size();
    if (n == 0) throw InputError("GroupDensity::fit: no samples");

    double sum = 0.0, sum2 = 0.0;
    for (const auto& s : samples) {
      sum += s.first + s.second;
      sum2 += s.first * s.first + s.second * s.second;
    }
    const double m = 2.0 * static_cast<double>(n);
    const double mean = sum / m;
    const double var = std::max(0.0, sum2 / m - mean * mean);
    const double sigma = std::sqrt(var);
    if (sigma < 1e-7) return delta_model(g);

    // Scott's rule for a 2D KDE with m pooled observations, floored at half
    // a grid cell so the kernel stays resolvable on the cache.
    double h = sigma * std::pow(m, -1.0 / 6.0);
    h = std::max(h, 0.5 / g);
    d.bandwidth = h;

    d.joint.assign(static_cast<std::size_t>(g) * g, 0.0);
    const double cell = 1.0 / g;
    const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * h * g)));
    std::vector<double> wa(static_cast<std::size_t>(2 * radius + 1));
    std::vector<double> wb(static_cast<std::size_t>(2 * radius + 1));
    for (const auto& s : samples) {
      const int ia = static_cast<int>(std::floor(s.first * g));
      const int ib = static_cast<int>(std::floor(s.second * g));
      int a_lo = std::max(0, ia - radius), a_hi = std::min(g - 1, ia + radius);
      int b_lo = std::max(0, ib - radius), b_hi = std::min(g - 1, ib + radius);
      for (int i = a_lo; i <= a_hi; ++i) {
        const double u = (i + 0.5) * cell - s.first;
        wa[static_cast<std::size_t>(i - a_lo)] = std::exp(-0.5 * u * u / (h * h));
      }
      for (int j = b_lo; j <= b_hi; ++j) {
        const double u = (j + 0.5) * cell - s.second;
        wb[static_cast<std::size_t>(j - b_lo)] = std::exp(-0.5 * u * u / (h * h));
      }
      for (int i = a_lo; i <= a_hi; ++i) {
        double* row = d.joint.data() + static_cast<std::size_t>(i) * g;
        const double wi = wa[static_cast<std::size_t>(i - a_lo)];
        for (int j = b_lo; j <= b_hi; ++j)
          row[j] += wi * wb[static_cast<std::size_t>(j - b_lo)];
      }
    }

    // Symmetrize (includes each pair in both orders) and normalize so the
    // cache integrates to 1 over [0,1]^2.
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < i; ++j) {
        const double v = d.joint[static_cast<std::size_t>(i) * g + j] +
                         d.joint[static_cast<std::size_t>(j) * g + i];
        d.joint[static_cast<std::size_t>(i) * g + j] = v;
        d.joint[static_cast<std::size_t>(j) * g + i] = v;
      }
    for (int i = 0; i < g; ++i)
      d.joint[static_cast<std::size_t>(i) * g + i] *= 2.0;
    double total = 0.0;
    for (double v : d.joint) total += v;
    if (total <= 0) return delta_model(g);
    const double norm = 1.0 / (total * cell * cell);
    for (double& v : d.joint) v *= norm;

    d.marginal.assign(static_cast<std::size_t>(g), 0.0);
    for (int i = 0; i < g; ++i) {
      double acc = 0.0;
      const double* row = d.joint.data() + static_cast<std::size_t>(i) * g;
      for (int j = 0; j < g; ++j) acc += row[j];
      d.marginal[static_cast<std::size_t>(i)] = acc * cell;
    }
    return d;
  }

  // Bilinear interpolation over cell centers, constant beyond the border
  // cells. Arguments are put in canonical order first so evaluation is
  // bitwise symmetric.
  double joint_at(double a, double b) const {
    const double lo = std::min(a, b), hi = std::max(a, b);
    const int g = grid;
    double pa = lo * g - 0.5, pb = hi * g - 0.5;
    int ia = static_cast<int>(std::floor(pa));
    int ib = static_cast<int>(std::floor(pb));
    double fa = pa - ia, fb = pb - ib;
    if (ia < 0) { ia = 0; fa = 0.0; }
    if (ia > g - 2) { ia = g - 2; fa = 1.0; }
    if (ib < 0) { ib = 0; fb = 0.0; }
    if (ib > g - 2) { ib = g - 2; fb = 1.0; }
    const double* r0 = joint.data() + static_cast<std::size_t>(ia) * g;
    const double* r1 = r0 + g;
    return (1 - fa) * ((1 - fb) * r0[ib] + fb * r0[ib + 1]) +
           fa * ((1 - fb) * r1[ib] + fb * r1[ib + 1]);
  }

  double marginal_at(double a) const {
    const int g = grid;
    double p = a * g - 0.5;
    int i = static_cast<int>(std::floor(p));
    double f = p - i;
    if (i < 0) { i = 0; f = 0.0; }
    if (i > g - 2) { i = g - 2; f = 1.0; }
    return (1 - f) * marginal[static_cast<std::size_t>(i)] +
           f * marginal[static_cast<std::size_t>(i) + 1];
  }
};

class PmiModel {
 public:
  PmiModel() = default;

  static PmiModel fit(const PairSampleSet& ps, const PmiParams& params = {}) {
    if (ps.pairs.empty()) throw InputError("PmiModel::fit: empty sample set");
    PmiModel m;
    m.params_ = params;
    std::vector<std::pair<double, double>> vals(ps.pairs.size());
    for (int g = 0; g < kGroupCount; ++g) {
      const auto grp = static_cast<FeatureGroup>(g);
      for (std::size_t i = 0; i < ps.pairs.size(); ++i)
        vals[i] = {group_value(ps.pairs[i].a.data(), grp),
                   group_value(ps.pairs[i].b.data(), grp)};
      m.groups_[static_cast<std::size_t>(g)] = GroupDensity::fit(vals, params.grid);
    }
    return m;
  }

  // Test/diagnostic constructor: inject per-group caches directly.
  static PmiModel from_group_densities(std::array<GroupDensity, kGroupCount> groups,
                                       const PmiParams& params = {}) {
    PmiModel m;
    m.params_ = params;
    m.groups_ = std::move(groups);
    return m;
  }

  const PmiParams& params() const { return params_; }
  const GroupDensity& group(int g) const { return groups_[static_cast<std::size_t>(g)]; }

  // PMI of one channel group at the given scalar pair. Arguments are put in
  // canonical order so the result is bitwise symmetric in (a, b).
  double group_pmi(int g, double a, double b) const {
    if (a > b) std::swap(a, b);
    const GroupDensity& d = groups_[static_cast<std::size_t>(g)];
    if (d.delta) {
      const double tol = 1.0 / std::max(1, d.grid);
      return std::fabs(a - b) <= tol ? params_.delta_pmi : -params_.delta_pmi;
    }
    const double eps = params_.density_floor;
    const double j = std::max(d.joint_at(a, b), eps);
    const double ma = std::max(d.marginal_at(a), eps);
    const double mb = std::max(d.marginal_at(b), eps);
    return params_.rho * std::log(j) - std::log(ma) - std::log(mb);
  }

  double log_affinity(const float f1[FeatureField::kDim],
                      const float f2[FeatureField::kDim]) const {
    double acc = 0.0;
    for (int g = 0; g < kGroupCount; ++g) {
      const auto grp = static_cast<FeatureGroup>(g);
      acc += group_pmi(g, group_value(f1, grp), group_value(f2, grp));
    }
    return acc;
  }

  double affinity(const float f1[FeatureField::kDim],
                  const float f2[FeatureField::kDim]) const {
    return std::exp(log_affinity(f1, f2));
  }

 private:
  PmiParams params_;
  std::array<GroupDensity, kGroupCount> groups_;
};

inline double pmi_affinity(const PmiModel& m, const float f1[FeatureField::kDim],
                           const float f2[FeatureField::kDim]) {
  return m.affinity(f1, f2);
}

}  // namespace stseg
