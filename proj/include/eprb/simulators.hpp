#pragma once

// Generative models. Every generator is a pure function of its arguments and
// a RandomStream; quartet generators give condition s its own substream s of
// the caller's seed so that the four datasets do not depend on each other's
// sizes.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "eprb/data.hpp"
#include "eprb/inequalities.hpp"
#include "eprb/random.hpp"
#include "eprb/timetag.hpp"

namespace eprb {

// Cell probabilities in the order (+,+), (+,-), (-,+), (-,-).
using CellProbs = std::array<double, 4>;

inline CellProbs checked_cells(CellProbs p, const char* who) {
  double sum = 0;
  for (double& v : p) {
    if (v < -1e-12) throw InvalidArgument(std::string(who) + ": negative cell probability " + std::to_string(v));
    v = std::max(v, 0.0);
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument(std::string(who) + ": cell probabilities do not sum to 1");
  return p;
}

inline OutcomePair draw_cell(const CellProbs& p, RandomStream& rng) {
  const double u = rng.uniform();
  double acc = p[0];
  if (u < acc) return {1, 1};
  acc += p[1];
  if (u < acc) return {1, -1};
  acc += p[2];
  if (u < acc) return {-1, 1};
  return {-1, -1};
}

inline PairDataSet sample_cells(const ConditionLabel& cond, std::size_t n, const CellProbs& probs, RandomStream& rng) {
  const auto p = checked_cells(probs, "sample_cells");
  PairDataSet d;
  d.condition = cond;
  d.pairs.reserve(n);
  for (std::size_t k = 0; k < n; ++k) d.pairs.push_back(draw_cell(p, rng));
  return d;
}

// (1 - q x y a.c)/4; q = 1 is the singlet.
inline CellProbs singlet_cells(const ConditionLabel& cond, double q = 1.0) {
  const double ac = overlap(cond.setting1, cond.setting2);
  return {(1 - q * ac) / 4, (1 + q * ac) / 4, (1 + q * ac) / 4, (1 - q * ac) / 4};
}

inline PairDataSet sample_singlet(const ConditionLabel& cond, std::size_t n, double q, RandomStream& rng) {
  const auto p = singlet_cells(cond, q);
  for (double v : p)
    if (v < -1e-12) throw InvalidArgument("sample_singlet: q = " + std::to_string(q) + " gives a negative cell probability");
  return sample_cells(cond, n, p, rng);
}

inline Quartet sample_singlet(const Settings4& s, std::size_t n, double q, const RandomStream& rng) {
  Quartet out;
  for (int k = 1; k <= 4; ++k) {
    auto sub = rng.substream(static_cast<std::uint64_t>(k));
    out[k - 1] = sample_singlet(s.condition(k), n, q, sub);
  }
  return out;
}

// Zero single-particle averages and correlation E_s per condition.
inline Quartet sample_correlations(const CorrelationQuartet& E, std::size_t n, const RandomStream& rng,
                                   const Settings4& labels = Settings4::photon_degrees(0, 45, 22.5, 67.5)) {
  Quartet out;
  for (int k = 1; k <= 4; ++k) {
    const double e = E[k - 1];
    if (std::abs(e) > 1) throw InvalidArgument("correlation outside [-1,1]");
    auto sub = rng.substream(static_cast<std::uint64_t>(k));
    out[k - 1] = sample_cells(labels.condition(k), n, {(1 + e) / 4, (1 - e) / 4, (1 - e) / 4, (1 + e) / 4}, sub);
  }
  return out;
}

inline PairDataSet sample_product(const ConditionLabel& cond, std::size_t n, const Vec3& M1, const Vec3& M2,
                                  RandomStream& rng) {
  if (norm(M1) > 1 + 1e-12 || norm(M2) > 1 + 1e-12) throw InvalidArgument("product state vectors must have norm <= 1");
  const double p1 = (1 + dot(cond.setting1.bloch(), M1)) / 2;
  const double p2 = (1 + dot(cond.setting2.bloch(), M2)) / 2;
  PairDataSet d;
  d.condition = cond;
  d.pairs.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto a = static_cast<std::int8_t>(rng.sign(p1));
    const auto b = static_cast<std::int8_t>(rng.sign(p2));
    d.pairs.push_back({a, b});
  }
  return d;
}

namespace detail {

inline int sign_of(double v) { return v >= 0 ? 1 : -1; }

inline OutcomePair bell_toy_pair(double a, double c, bool malus, RandomStream& rng) {
  if (!malus) {
    const double lambda = rng.angle();
    return {static_cast<std::int8_t>(sign_of(std::cos(2 * (lambda - a)))),
            static_cast<std::int8_t>(-sign_of(std::cos(2 * (lambda - c))))};
  }
  const double phi = rng.angle();
  const double r = rng.uniform(), rp = rng.uniform();
  return {static_cast<std::int8_t>(sign_of(1 + std::cos(2 * (phi - a)) - 2 * r)),
          static_cast<std::int8_t>(-sign_of(1 + std::cos(2 * (phi - c)) - 2 * rp))};
}

}  // namespace detail

// Bell's toy model (sign of cos 2(lambda - a)) or its Malus-compliant variant.
inline PairDataSet bell_toy(const ConditionLabel& cond, std::size_t n, RandomStream& rng, bool malus) {
  PairDataSet d;
  d.condition = cond;
  d.pairs.reserve(n);
  const double a = cond.setting1.angle(), c = cond.setting2.angle();
  for (std::size_t k = 0; k < n; ++k) d.pairs.push_back(detail::bell_toy_pair(a, c, malus, rng));
  return d;
}

// With cfd set, all four conditions replay the same hidden variables, so
// every index forms a quadruple.
inline Quartet bell_toy(const Settings4& s, std::size_t n, const RandomStream& rng, bool malus, bool cfd = false) {
  Quartet out;
  for (int k = 1; k <= 4; ++k) {
    auto sub = rng.substream(cfd ? 1 : static_cast<std::uint64_t>(k));
    out[k - 1] = bell_toy(s.condition(k), n, sub, malus);
  }
  return out;
}

inline double bell_toy_correlation(double theta, bool malus) {
  if (malus) return -0.5 * std::cos(2 * theta);
  return -1 + 2 / std::numbers::pi * std::acos(std::clamp(std::cos(2 * theta), -1.0, 1.0));
}

enum class Intensity { exp, constant };

// Monte Carlo over the beam polarization phi and the intensity r. e1 and e2
// are normalized intensity differences, e12 their correlation.
inline SummaryStats maxwell_correlation(const ConditionLabel& cond, std::size_t n, double phi0, Intensity intensity,
                                        RandomStream& rng) {
  if (n == 0) throw InvalidArgument("n must be positive");
  const double a = cond.setting1.angle(), c = cond.setting2.angle();
  double s1 = 0, s2 = 0, s12 = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double phi = std::numbers::pi * rng.uniform();
    const double r = intensity == Intensity::exp ? rng.exponential() : 1.0;
    const double u = r * std::cos(2 * (phi - a));
    const double v = r * std::cos(2 * (phi - c + phi0));
    s1 += u;
    s2 += v;
    s12 += u * v;
  }
  const double N = static_cast<double>(n);
  return {s1 / N, s2 / N, s12 / N};
}

struct SpinDensity {
  enum class Kind { exp4, two_delta, custom } kind = Kind::exp4;
  // Custom atoms (S, mass of mu at S).
  std::vector<std::pair<double, double>> atoms;
};

// Moments int S^k mu(S) dS for k = 2 and 4.
inline std::pair<double, double> spin_density_moments(const SpinDensity& mu) {
  switch (mu.kind) {
    case SpinDensity::Kind::exp4:
    case SpinDensity::Kind::two_delta: return {1.0, 3.0};
    case SpinDensity::Kind::custom: break;
  }
  double m2 = 0, m4 = 0;
  for (auto [S, w] : mu.atoms) {
    if (S < 0 || w < 0) throw InvalidArgument("spin density atoms need S >= 0 and nonnegative mass");
    m2 += S * S * w;
    m4 += S * S * S * S * w;
  }
  return {m2, m4};
}

inline double draw_spin_length(const SpinDensity& mu, RandomStream& rng) {
  switch (mu.kind) {
    case SpinDensity::Kind::exp4:
      // S^2 * 4 exp(-2S) is a Gamma(3, rate 2) density.
      return -std::log(rng.uniform_open0() * rng.uniform_open0() * rng.uniform_open0()) / 2;
    case SpinDensity::Kind::two_delta: return rng.uniform() < 1.0 / 3.0 ? 1.0 : 2.0;
    case SpinDensity::Kind::custom: break;
  }
  double u = rng.uniform(), acc = 0;
  for (auto [S, w] : mu.atoms) {
    acc += S * S * w;
    if (u < acc) return S;
  }
  return mu.atoms.back().first;
}

inline Vec3 uniform_on_sphere(RandomStream& rng) {
  const double z = 2 * rng.uniform() - 1;
  const double phi = rng.angle();
  const double rho = std::sqrt(std::max(0.0, 1 - z * z));
  return {rho * std::cos(phi), rho * std::sin(phi), z};
}

// Perfectly anticorrelated classical spins S1 = -S2 of random length.
inline SummaryStats classical_spins(const ConditionLabel& cond, std::size_t n, const SpinDensity& mu,
                                    RandomStream& rng) {
  if (n == 0) throw InvalidArgument("n must be positive");
  const auto [m2, m4] = spin_density_moments(mu);
  (void)m4;
  if (std::abs(m2 - 1) > 1e-6) throw InvalidArgument("spin density is not normalized: int S^2 mu = " + std::to_string(m2));
  if (mu.kind == SpinDensity::Kind::custom && mu.atoms.empty()) throw InvalidArgument("custom spin density has no atoms");
  const Vec3& a = cond.setting1.bloch();
  const Vec3& c = cond.setting2.bloch();
  double s1 = 0, s2 = 0, s12 = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double S = draw_spin_length(mu, rng);
    const Vec3 dir = uniform_on_sphere(rng);
    const double u = S * dot(a, dir);
    const double v = -S * dot(c, dir);
    s1 += u;
    s2 += v;
    s12 += u * v;
  }
  const double N = static_cast<double>(n);
  return {s1 / N, s2 / N, s12 / N};
}

// Fixed spin vectors M1, M2 (product-state analogue).
inline SummaryStats classical_spins_fixed(const ConditionLabel& cond, const Vec3& M1, const Vec3& M2) {
  const double u = dot(cond.setting1.bloch(), M1), v = dot(cond.setting2.bloch(), M2);
  return {u, v, u * v};
}

// Cascaded filtering: (S1,S3) from the singlet law for (a,c), then S2 and
// S4 by projection probabilities (1 + s S1 a.b)/2 and (1 + s S3 c.d)/2.
// The four datasets share the emission index.
inline Quartet eeprb_generate(const Settings4& s, std::size_t n, RandomStream& rng) {
  const auto first = checked_cells(singlet_cells(s.condition(1)), "eeprb_generate");
  const double ab = overlap(s.a, s.b), cd = overlap(s.c, s.d);
  Quartet out;
  for (int k = 1; k <= 4; ++k) {
    out[k - 1].condition = s.condition(k);
    out[k - 1].pairs.reserve(n);
  }
  for (std::size_t k = 0; k < n; ++k) {
    const auto p = draw_cell(first, rng);
    const int S1 = p.a, S3 = p.b;
    const int S2 = rng.sign((1 + S1 * ab) / 2);
    const int S4 = rng.sign((1 + S3 * cd) / 2);
    auto push = [&](int i, int x, int y) {
      out[i].pairs.push_back({static_cast<std::int8_t>(x), static_cast<std::int8_t>(y)});
    };
    push(0, S1, S3);
    push(1, S1, S4);
    push(2, S2, S3);
    push(3, S2, S4);
  }
  return out;
}

enum class LambdaRule { periodic, uniform };

struct FiniteLambdaData {
  Quartet data;
  std::array<std::vector<std::int64_t>, 4> lambdas;  // 1-based
};

// Deterministic outcome tables A(x, lambda), B(y, lambda) over K values of
// lambda, drawn once per run from substream 5. Periodic runs start at a
// random phase and step lambda -> lambda mod K + 1.
inline FiniteLambdaData finite_lambda(const Settings4& s, std::size_t n, std::int64_t K, LambdaRule rule,
                                      const RandomStream& rng) {
  if (K < 1) throw InvalidArgument("K must be at least 1");
  const auto k = static_cast<std::size_t>(K);
  auto table_rng = rng.substream(5);
  std::array<std::vector<std::int8_t>, 2> A, B;
  for (auto* t : {&A, &B})
    for (auto& row : *t) {
      row.resize(k);
      for (auto& v : row) v = static_cast<std::int8_t>(table_rng.sign(0.5));
    }
  FiniteLambdaData out;
  for (int c = 1; c <= 4; ++c) {
    auto sub = rng.substream(static_cast<std::uint64_t>(c));
    const int i = (c - 1) / 2, j = (c - 1) % 2;
    auto& d = out.data[c - 1];
    auto& lam = out.lambdas[c - 1];
    d.condition = s.condition(c);
    d.pairs.reserve(n);
    lam.reserve(n);
    std::int64_t current = static_cast<std::int64_t>(sub.below(k)) + 1;
    for (std::size_t m = 0; m < n; ++m) {
      if (rule == LambdaRule::uniform) current = static_cast<std::int64_t>(sub.below(k)) + 1;
      lam.push_back(current);
      const auto idx = static_cast<std::size_t>(current - 1);
      d.pairs.push_back({A[i][idx], B[j][idx]});
      if (rule == LambdaRule::periodic) current = current % K + 1;
    }
  }
  return out;
}

struct FactorizationCheck {
  double integral = 0;
  double min_factor = 0;
};

// The factorized representation of -cos 2(a-c) with "probabilities"
// (1 - x sqrt2 cos 2(a-phi))/2 and (1 - y sqrt2 cos 2(c-phi+pi/2))/2.
inline FactorizationCheck quasiprob_factorization_check(double a, double c) {
  const double r2 = std::numbers::sqrt2;
  auto f1 = [&](int x, double phi) { return (1 - x * r2 * std::cos(2 * (a - phi))) / 2; };
  auto f2 = [&](int y, double phi) { return (1 - y * r2 * std::cos(2 * (c - phi + std::numbers::pi / 2))) / 2; };
  auto integrand = [&](double phi) {
    double acc = 0;
    for (int x : {1, -1})
      for (int y : {1, -1}) acc += x * y * f1(x, phi) * f2(y, phi);
    return acc;
  };
  FactorizationCheck r;
  double err = 0;
  // The integrand has period pi/2; split there so each panel is one period.
  for (int k = 0; k < 4; ++k) {
    r.integral += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        integrand, k * std::numbers::pi / 2, (k + 1) * std::numbers::pi / 2, 10, 1e-14, &err);
  }
  r.integral /= 2 * std::numbers::pi;

  std::vector<double> phis = {a, a + std::numbers::pi / 2, c, c + std::numbers::pi / 2};
  for (int k = 0; k < 3600; ++k) phis.push_back(2 * std::numbers::pi * k / 3600);
  r.min_factor = 1.0;
  for (double phi : phis)
    for (int x : {1, -1}) r.min_factor = std::min({r.min_factor, f1(x, phi), f2(x, phi)});
  return r;
}

// Whole-experiment configuration used by the command-line tool.
enum class ModelKind {
  singlet,
  product,
  bell_toy,
  bell_toy_malus,
  timetag,
  local_threshold,
  maxwell,
  classical_spins,
  eeprb,
  finite_lambda
};

struct ModelConfig {
  ModelKind kind = ModelKind::singlet;
  double q = 1.0;
  Vec3 M1{0, 0, 0}, M2{0, 0, 0};
  bool cfd = false;
  TimetagConfig tpm;
  double W = 1.0;
  double phi0 = std::numbers::pi / 2;
  Intensity intensity = Intensity::exp;
  SpinDensity mu;
  std::int64_t K = 1;
  LambdaRule rule = LambdaRule::periodic;
};

inline ModelKind parse_model(const std::string& name) {
  static const std::pair<const char*, ModelKind> names[] = {
      {"singlet", ModelKind::singlet},
      {"product", ModelKind::product},
      {"bell_toy", ModelKind::bell_toy},
      {"bell_toy_malus", ModelKind::bell_toy_malus},
      {"timetag", ModelKind::timetag},
      {"local_threshold", ModelKind::local_threshold},
      {"maxwell", ModelKind::maxwell},
      {"classical_spins", ModelKind::classical_spins},
      {"eeprb", ModelKind::eeprb},
      {"finite_lambda", ModelKind::finite_lambda},
  };
  for (auto [n, k] : names)
    if (name == n) return k;
  throw InvalidArgument("unknown model '" + name + "'");
}

struct GeneratedData {
  std::optional<Quartet> pairs;
  std::optional<RawPair> raw;
  std::optional<std::array<std::vector<std::int64_t>, 4>> lambdas;
  std::optional<std::array<SummaryStats, 4>> stats;
};

inline GeneratedData generate(const ModelConfig& cfg, const Settings4& s, std::size_t n, std::uint64_t seed) {
  const RandomStream root(seed, 0);
  GeneratedData out;
  auto per_condition = [&](auto&& make) {
    Quartet q;
    for (int k = 1; k <= 4; ++k) {
      auto sub = root.substream(static_cast<std::uint64_t>(k));
      q[k - 1] = make(s.condition(k), sub);
    }
    return q;
  };
  switch (cfg.kind) {
    case ModelKind::singlet: out.pairs = sample_singlet(s, n, cfg.q, root); break;
    case ModelKind::product:
      out.pairs = per_condition([&](const ConditionLabel& c, RandomStream& r) { return sample_product(c, n, cfg.M1, cfg.M2, r); });
      break;
    case ModelKind::bell_toy: out.pairs = bell_toy(s, n, root, false, cfg.cfd); break;
    case ModelKind::bell_toy_malus: out.pairs = bell_toy(s, n, root, true, cfg.cfd); break;
    case ModelKind::timetag: {
      auto r = root.substream(1);
      out.raw = timetag_raw(s, n, cfg.tpm, r);
      break;
    }
    case ModelKind::local_threshold: {
      auto r = root.substream(1);
      out.pairs = local_threshold(s, n, cfg.tpm, cfg.W, r);
      break;
    }
    case ModelKind::maxwell:
    case ModelKind::classical_spins: {
      std::array<SummaryStats, 4> st;
      for (int k = 1; k <= 4; ++k) {
        auto sub = root.substream(static_cast<std::uint64_t>(k));
        st[k - 1] = cfg.kind == ModelKind::maxwell ? maxwell_correlation(s.condition(k), n, cfg.phi0, cfg.intensity, sub)
                                                   : classical_spins(s.condition(k), n, cfg.mu, sub);
      }
      out.stats = st;
      break;
    }
    case ModelKind::eeprb: {
      auto r = root.substream(1);
      out.pairs = eeprb_generate(s, n, r);
      break;
    }
    case ModelKind::finite_lambda: {
      auto f = finite_lambda(s, n, cfg.K, cfg.rule, root);
      out.pairs = std::move(f.data);
      out.lambdas = std::move(f.lambdas);
      break;
    }
  }
  return out;
}

}  // namespace eprb
