#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "eprb/data.hpp"

namespace eprb {

using CorrelationQuartet = std::array<double, 4>;

inline CorrelationQuartet correlations(const Quartet& q) {
  CorrelationQuartet c{};
  for (std::size_t s = 0; s < 4; ++s) c[s] = summary(q[s]).e12;
  return c;
}

// Max over placements of the single minus sign in |Ci - Cj + Ck + Cl|.
inline double chsh_function(const CorrelationQuartet& c) {
  const double total = c[0] + c[1] + c[2] + c[3];
  double best = 0.0;
  for (double ci : c) best = std::max(best, std::abs(total - 2.0 * ci));
  return best;
}

struct BoundReport {
  double s_chsh = 0.0;
  double lhs_minus = 0.0;  // |C1 - C2| + |C3 + C4|
  double lhs_plus = 0.0;   // |C1 + C2| + |C3 - C4|
  double bound = 4.0;      // 4 - 2 delta
  bool satisfied = true;
  std::vector<std::string> violations;
};

inline BoundReport model_free_check(const CorrelationQuartet& c, double delta, double tol = 1e-12) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw InvalidArgument("delta must lie in [0,1]");
  BoundReport r;
  r.s_chsh = chsh_function(c);
  r.lhs_minus = std::abs(c[0] - c[1]) + std::abs(c[2] + c[3]);
  r.lhs_plus = std::abs(c[0] + c[1]) + std::abs(c[2] - c[3]);
  r.bound = 4.0 - 2.0 * delta;
  if (r.lhs_minus > r.bound + tol) r.violations.push_back("|C1-C2|+|C3+C4|");
  if (r.lhs_plus > r.bound + tol) r.violations.push_back("|C1+C2|+|C3-C4|");
  if (r.s_chsh > r.bound + tol) r.violations.push_back("S_CHSH");
  r.satisfied = std::max(r.lhs_minus, r.lhs_plus) <= r.bound + tol;
  return r;
}

// |ci +- cj| <= 3 - 2 delta +- ck for every assignment of the three values.
inline bool bell_triple_check(double c1, double c2, double c3, double delta, double tol = 1e-12) {
  const std::array<double, 3> c{c1, c2, c3};
  const double base = 3.0 - 2.0 * delta;
  for (int k = 0; k < 3; ++k) {
    const double ci = c[(k + 1) % 3], cj = c[(k + 2) % 3], ck = c[k];
    if (std::abs(ci + cj) > base + ck + tol) return false;
    if (std::abs(ci - cj) > base - ck + tol) return false;
  }
  return true;
}

struct EberhardResult {
  double N = 0.0;                       // common number of trials
  std::array<std::int64_t, 4> rescaled{};  // nint(N * count_s / trials_s)
  std::int64_t J = 0;
  double j_over_n = 0.0;
  double delta_upper = 1.0;
};

// counts = (N_ac^{++}, N_ad^{+0}, N_bc^{0+}, N_bd^{++}).
inline EberhardResult eberhard_counts(const std::array<std::int64_t, 4>& counts,
                                      const std::array<std::int64_t, 4>& trials) {
  EberhardResult r;
  long double total = 0;
  for (std::size_t s = 0; s < 4; ++s) {
    if (trials[s] <= 0) throw InvalidArgument("number of trials must be positive");
    if (counts[s] < 0 || counts[s] > trials[s]) throw InvalidArgument("counts must lie in [0, trials]");
    total += static_cast<long double>(trials[s]);
  }
  const long double n = total / 4;
  for (std::size_t s = 0; s < 4; ++s) {
    r.rescaled[s] = std::llround(n * static_cast<long double>(counts[s]) / static_cast<long double>(trials[s]));
  }
  r.N = static_cast<double>(n);
  r.J = r.rescaled[0] - r.rescaled[1] - r.rescaled[2] - r.rescaled[3];
  r.j_over_n = static_cast<double>(static_cast<long double>(r.J) / n);
  r.delta_upper = 1.0 - r.j_over_n;
  return r;
}

// -1/2 + (xy/4)(C1 - C2 + C3 + C4)
inline double ch_data(const std::array<FrequencyTable, 4>& f, int x, int y) {
  CorrelationQuartet c{};
  for (std::size_t s = 0; s < 4; ++s) c[s] = summary(f[s]).e12;
  return -0.5 + 0.25 * x * y * (c[0] - c[1] + c[2] + c[3]);
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty(double tol = 0.0) const { return lo > hi + tol; }
  double mid() const { return 0.5 * (lo + hi); }
};

// Allowed range of ch_data for a given delta.
inline Interval ch_bounds(double delta) { return {-1.0 - (1.0 - delta) / 2.0, (1.0 - delta) / 2.0}; }

// |xy +- xz| <= 1 +- yz and |xz - xw + yz + yw| <= 2 for reals in [-1,1].
inline bool basic_inequality_witness(double x, double y, double z, double w, double tol = 1e-12) {
  for (double v : {x, y, z, w}) {
    if (!(v >= -1.0 && v <= 1.0)) throw InvalidArgument("basic inequality inputs must lie in [-1,1]");
  }
  const bool triple = std::abs(x * y + x * z) <= 1.0 + y * z + tol && std::abs(x * y - x * z) <= 1.0 - y * z + tol;
  const bool chsh = std::abs(x * z - x * w + y * z + y * w) <= 2.0 + tol;
  return triple && chsh;
}

}  // namespace eprb
