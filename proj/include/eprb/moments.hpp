#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "eprb/error.hpp"
#include "eprb/inequalities.hpp"

namespace eprb {

// Tables of two-valued variables are indexed with the first variable in the
// most significant bit; a clear bit means +1.
template <std::size_t K>
int spin_of(std::size_t cell, std::size_t var) {
  return ((cell >> (K - 1 - var)) & 1U) ? -1 : 1;
}

template <std::size_t K>
using Table = std::array<double, (std::size_t{1} << K)>;

// Moments indexed by variable subsets: bit (K-1-v) set means variable v is
// in the product. Index 0 is the normalisation.
template <std::size_t K>
Table<K> moments_of(const Table<K>& f) {
  Table<K> m{};
  for (std::size_t sub = 0; sub < m.size(); ++sub) {
    double acc = 0.0;
    for (std::size_t cell = 0; cell < f.size(); ++cell) {
      int sign = 1;
      for (std::size_t v = 0; v < K; ++v)
        if ((sub >> (K - 1 - v)) & 1U) sign *= spin_of<K>(cell, v);
      acc += sign * f[cell];
    }
    m[sub] = acc;
  }
  return m;
}

template <std::size_t K>
Table<K> table_from_moments(const Table<K>& m) {
  Table<K> f{};
  const double norm = static_cast<double>(f.size());
  for (std::size_t cell = 0; cell < f.size(); ++cell) {
    double acc = 0.0;
    for (std::size_t sub = 0; sub < m.size(); ++sub) {
      int sign = 1;
      for (std::size_t v = 0; v < K; ++v)
        if ((sub >> (K - 1 - v)) & 1U) sign *= spin_of<K>(cell, v);
      acc += sign * m[sub];
    }
    f[cell] = acc / norm;
  }
  return f;
}

struct MomentSet2 {
  double k1 = 0, k2 = 0, k12 = 0;
};

using Bivariate = Table<2>;

inline Bivariate bivariate(const MomentSet2& m) { return table_from_moments<2>({1.0, m.k2, m.k1, m.k12}); }

inline MomentSet2 moments(const Bivariate& f) {
  const auto k = moments_of<2>(f);
  return {k[2], k[1], k[3]};
}

struct TheoremIResult {
  bool exists = false;
  std::optional<Bivariate> f;
};

inline TheoremIResult theorem_I(const MomentSet2& m, double tol = 1e-12) {
  TheoremIResult r;
  r.exists = std::abs(m.k1) <= 1 + tol && std::abs(m.k2) <= 1 + tol && std::abs(m.k12) <= 1 + tol &&
             std::abs(m.k1 + m.k2) <= 1 + m.k12 + tol && std::abs(m.k1 - m.k2) <= 1 - m.k12 + tol;
  if (r.exists) {
    auto f = bivariate(m);
    for (double v : f)
      if (v < -tol) throw Error("theorem I: bivariate negative although inequalities hold");
    for (double& v : f) v = std::max(v, 0.0);
    r.f = f;
  }
  return r;
}

struct MomentSet3 {
  double k1 = 0, k2 = 0, k3 = 0, k12 = 0, k13 = 0, k23 = 0;
  std::optional<double> k123;
};

using Trivariate = Table<3>;

inline Trivariate trivariate(const MomentSet3& m, double k123) {
  // subset bits: x1 -> 4, x2 -> 2, x3 -> 1
  Table<3> k{};
  k[0] = 1.0;
  k[4] = m.k1;
  k[2] = m.k2;
  k[1] = m.k3;
  k[6] = m.k12;
  k[5] = m.k13;
  k[3] = m.k23;
  k[7] = k123;
  return table_from_moments<3>(k);
}

inline MomentSet3 moments(const Trivariate& f) {
  const auto k = moments_of<3>(f);
  return {k[4], k[2], k[1], k[6], k[5], k[3], k[7]};
}

class NoTrivariate : public Error {
 public:
  using Error::Error;
};

// First violated inequality among the single, pair and Boole-Bell
// conditions for a trivariate, if any.
inline std::optional<std::string> three3_violation(const MomentSet3& m, double tol = 1e-12) {
  auto check = [&](bool ok, const char* what) -> std::optional<std::string> {
    if (!ok) return std::string(what);
    return std::nullopt;
  };
  const std::pair<double, const char*> singles[] = {{m.k1, "|K1|<=1"},   {m.k2, "|K2|<=1"},   {m.k3, "|K3|<=1"},
                                                    {m.k12, "|K12|<=1"}, {m.k13, "|K13|<=1"}, {m.k23, "|K23|<=1"}};
  for (auto [v, name] : singles)
    if (auto e = check(std::abs(v) <= 1 + tol, name)) return e;
  struct Pair {
    double a, b, c;
    const char* plus;
    const char* minus;
  };
  const Pair pairs[] = {
      {m.k1, m.k2, m.k12, "|K1+K2|<=1+K12", "|K1-K2|<=1-K12"},
      {m.k1, m.k3, m.k13, "|K1+K3|<=1+K13", "|K1-K3|<=1-K13"},
      {m.k2, m.k3, m.k23, "|K2+K3|<=1+K23", "|K2-K3|<=1-K23"},
      {m.k12, m.k13, m.k23, "|K12+K13|<=1+K23", "|K12-K13|<=1-K23"},
  };
  for (const auto& p : pairs) {
    if (auto e = check(std::abs(p.a + p.b) <= 1 + p.c + tol, p.plus)) return e;
    if (auto e = check(std::abs(p.a - p.b) <= 1 - p.c + tol, p.minus)) return e;
  }
  return std::nullopt;
}

// Bounds on the third moment without validity checks.
inline Interval k123_bounds(const MomentSet3& m) {
  const double lhs = std::max(-1 - m.k3 - m.k12 + std::abs(m.k1 + m.k2 + m.k13 + m.k23),
                              -1 + m.k3 + m.k12 + std::abs(m.k1 - m.k2 - m.k13 + m.k23));
  const double rhs = std::min(1 - m.k3 + m.k12 - std::abs(m.k1 + m.k2 - m.k13 - m.k23),
                              1 + m.k3 - m.k12 - std::abs(m.k1 - m.k2 + m.k13 - m.k23));
  return {lhs, rhs};
}

inline Interval k123_interval(const MomentSet3& m, double tol = 1e-12) {
  if (auto v = three3_violation(m, tol)) throw NoTrivariate("no trivariate exists: violates " + *v);
  auto iv = k123_bounds(m);
  if (iv.lo > iv.hi) {
    if (iv.lo > iv.hi + tol) throw Error("k123 interval inverted although inequalities hold");
    iv.lo = iv.hi = iv.mid();
  }
  return iv;
}

class EmptyInterval : public Error {
 public:
  using Error::Error;
};

struct MomentSet4 {
  double k1 = 0, k2 = 0, k3 = 0, k4 = 0;
  double k13 = 0, k14 = 0, k23 = 0, k24 = 0;
};

inline Interval lemma_I_bounds(const MomentSet4& m) {
  const double lo = -1 + std::max({std::abs(m.k13 + m.k14), std::abs(m.k23 + m.k24), std::abs(m.k3 + m.k4)});
  const double hi = 1 - std::max({std::abs(m.k13 - m.k14), std::abs(m.k23 - m.k24), std::abs(m.k3 - m.k4)});
  return {lo, hi};
}

inline Interval lemma_I_interval(const MomentSet4& m, double tol = 1e-12) {
  const double minus_plus = std::abs(m.k13 - m.k14) + std::abs(m.k23 + m.k24);
  const double plus_minus = std::abs(m.k13 + m.k14) + std::abs(m.k23 - m.k24);
  std::string bad;
  if (minus_plus > 2 + tol) bad = "|K13-K14|+|K23+K24| = " + std::to_string(minus_plus) + " > 2";
  else if (plus_minus > 2 + tol) bad = "|K13+K14|+|K23-K24| = " + std::to_string(plus_minus) + " > 2";
  auto iv = lemma_I_bounds(m);
  if (!bad.empty() || iv.lo > iv.hi + tol) {
    if (bad.empty()) bad = "lower bound " + std::to_string(iv.lo) + " exceeds upper bound " + std::to_string(iv.hi);
    throw EmptyInterval("empty interval: no joint distribution (" + bad + ")");
  }
  if (iv.lo > iv.hi) iv.lo = iv.hi = iv.mid();
  return iv;
}

using Quadrivariate = Table<4>;

// Fine's construction from f2(x1,x3,x4) and f1(x2,x3,x4).
inline Quadrivariate fine_quadrivariate(const Trivariate& f2, const Trivariate& f1, double tol = 1e-12) {
  double s2 = 0, s1 = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    if (f2[i] < -tol || f1[i] < -tol) throw InvalidArgument("trivariates must be nonnegative");
    s2 += f2[i];
    s1 += f1[i];
  }
  if (std::abs(s2 - 1) > tol || std::abs(s1 - 1) > tol) throw InvalidArgument("trivariates must be normalised");
  // (x3,x4) marginals: index = 2*b3 + b4, i.e. the low two bits.
  std::array<double, 4> m2{}, m1{};
  for (std::size_t i = 0; i < 8; ++i) {
    m2[i & 3U] += f2[i];
    m1[i & 3U] += f1[i];
  }
  double dev = 0;
  for (std::size_t j = 0; j < 4; ++j) dev = std::max(dev, std::abs(m2[j] - m1[j]));
  if (dev > tol) throw InvalidArgument("incompatible (x3,x4) marginals, max deviation " + std::to_string(dev));

  Quadrivariate f{};
  for (std::size_t cell = 0; cell < 16; ++cell) {
    const std::size_t b1 = (cell >> 3) & 1U, b2 = (cell >> 2) & 1U, b34 = cell & 3U;
    const double denom = m2[b34];
    if (denom > 0) f[cell] = std::max(f2[(b1 << 2) | b34], 0.0) * std::max(f1[(b2 << 2) | b34], 0.0) / denom;
  }
  return f;
}

struct FineResult {
  Interval k34_interval, k134_interval, k234_interval;
  double k34 = 0, k134 = 0, k234 = 0;
  Quadrivariate f{};
  Table<4> moments{};  // all 16 moments of f
  double k12 = 0;      // free moment, read from the constructed table
  double max_marginal_error = 0;
};

// Moments of a quadrivariate as subset index with x1 -> 8, x2 -> 4, x3 -> 2, x4 -> 1.
inline MomentSet4 observed_moments(const Table<4>& k) {
  return {k[8], k[4], k[2], k[1], k[10], k[9], k[6], k[5]};
}

// Runs Lemma I, picks midpoints for the free moments, builds both
// trivariates and Fine's quadrivariate, then checks the marginal moments.
inline FineResult pipeline_fine(const MomentSet4& m, double tol = 1e-12) {
  FineResult r;
  r.k34_interval = lemma_I_interval(m, tol);
  r.k34 = r.k34_interval.mid();

  MomentSet3 a{m.k1, m.k3, m.k4, m.k13, m.k14, r.k34, std::nullopt};
  MomentSet3 b{m.k2, m.k3, m.k4, m.k23, m.k24, r.k34, std::nullopt};
  r.k134_interval = k123_interval(a, tol);
  r.k234_interval = k123_interval(b, tol);
  r.k134 = r.k134_interval.mid();
  r.k234 = r.k234_interval.mid();

  auto f2 = trivariate(a, r.k134);
  auto f1 = trivariate(b, r.k234);
  for (auto* t : {&f2, &f1})
    for (double& v : *t) {
      if (v < -tol) throw Error("midpoint trivariate negative: internal error");
      v = std::max(v, 0.0);
    }
  r.f = fine_quadrivariate(f2, f1, 1e-10);
  r.moments = moments_of<4>(r.f);
  r.k12 = r.moments[12];

  const auto got = observed_moments(r.moments);
  const double want[] = {m.k1, m.k2, m.k3, m.k4, m.k13, m.k14, m.k23, m.k24, r.k34};
  const double have[] = {got.k1, got.k2, got.k3, got.k4, got.k13, got.k14, got.k23, got.k24, r.moments[3]};
  for (std::size_t i = 0; i < 9; ++i) r.max_marginal_error = std::max(r.max_marginal_error, std::abs(want[i] - have[i]));
  if (r.max_marginal_error > tol) {
    throw Error("quadrivariate does not reproduce the input moments (error " + std::to_string(r.max_marginal_error) + ")");
  }
  return r;
}

// Four bivariates over (x1,x3), (x1,x4), (x2,x3), (x2,x4).
inline FineResult pipeline_fine(const Bivariate& f13, const Bivariate& f14, const Bivariate& f23,
                                const Bivariate& f24, double tol = 1e-12) {
  const auto a = moments(f13), b = moments(f14), c = moments(f23), d = moments(f24);
  const double dev = std::max({std::abs(a.k1 - b.k1), std::abs(c.k1 - d.k1), std::abs(a.k2 - c.k2), std::abs(b.k2 - d.k2)});
  if (dev > tol) throw InvalidArgument("bivariates are not pairwise compatible (deviation " + std::to_string(dev) + ")");
  for (const auto* mm : {&a, &b, &c, &d})
    if (!theorem_I(*mm, tol).exists) throw InvalidArgument("input bivariate violates theorem I");
  return pipeline_fine(MomentSet4{a.k1, c.k1, a.k2, b.k2, a.k12, b.k12, c.k12, d.k12}, tol);
}

}  // namespace eprb
