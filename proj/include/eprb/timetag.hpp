#pragma once

// Stochastic time-tag model: Malus-law outcomes plus setting-dependent
// detection delays, and the correlations it produces after coincidence
// selection.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "eprb/data.hpp"
#include "eprb/random.hpp"

namespace eprb {

enum class SourceMode { anti, parallel };

inline void require_even_d(int d) {
  if (d < 0 || d % 2 != 0) throw InvalidArgument("d must be a nonnegative even integer, got " + std::to_string(d));
}

// Maximum delay T(delta) = T0 |sin 2 delta|^d, with T = T0 for d = 0.
inline double max_delay(double delta, int d, double T0) {
  if (d == 0) return T0;
  return T0 * std::pow(std::abs(std::sin(2.0 * delta)), d);
}

// Probability that |t - t'| <= W for t ~ U[0,A], t' ~ U[0,B].
inline double coincidence_weight(double A, double B, double W) {
  if (A <= 0.0 && B <= 0.0) return 1.0;
  if (A <= 0.0) return std::min(1.0, W / B);
  if (B <= 0.0) return std::min(1.0, W / A);
  // Area of {t - t' > W} inside the rectangle.
  auto tail = [W](double p, double q) {
    const double L = std::max(0.0, p - W);
    const double m = std::min(q, L);
    return L * m - 0.5 * m * m;
  };
  const double w = (A * B - tail(A, B) - tail(B, A)) / (A * B);
  return std::clamp(w, 0.0, 1.0);
}

// Probability that a single station's delay is at most W.
inline double local_weight(double T, double W) { return T <= W ? 1.0 : W / T; }

enum class WRegime { w_to_zero, w_ge_T0 };

// Closed forms of E12 for theta = a - c in the W -> 0 limit, or the
// uncorrelated-weight result for W >= T0.
inline double tpm_correlation_analytic(double theta, int d, WRegime regime, SourceMode mode = SourceMode::anti) {
  require_even_d(d);
  if (d > 8) throw InvalidArgument("closed forms exist for d in {0,2,4,6,8}");
  const double c2 = std::cos(2 * theta);
  double e = 0.0;
  if (regime == WRegime::w_ge_T0 || d == 0) {
    e = -0.5 * c2;
  } else if (d == 2) {
    const double s2 = std::sin(2 * theta);
    const double t = std::abs(std::tan(theta));
    // sin^2(2 theta) ln|tan theta| vanishes at the poles of the logarithm.
    const double log_term = (t == 0.0 || !std::isfinite(t)) ? 0.0 : 0.5 * s2 * s2 * std::log(t);
    e = std::numbers::pi / 4 * s2 * c2 - c2 + log_term;
  } else if (d == 4) {
    e = -c2;
  } else if (d == 6) {
    e = -0.5 * c2 * (1.0 + 24.0 / (19.0 + 5.0 * std::cos(4 * theta)));
  } else {
    e = -(53.0 * c2 + 7.0 * std::cos(6 * theta)) / (39.0 + 21.0 * std::cos(4 * theta));
  }
  return mode == SourceMode::anti ? e : -e;
}

class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double estimate, double error)
      : Error(what), estimate_(estimate), error_(error) {}
  double estimate() const { return estimate_; }
  double error() const { return error_; }

 private:
  double estimate_;
  double error_;
};

namespace detail {

struct QuadResult {
  double value = 0;
  double error = 0;
};

// Globally adaptive Gauss-Kronrod over [0, pi), starting from the given
// breakpoints: the panel with the largest error estimate is bisected until the
// summed estimate drops below abs_tol.
inline QuadResult integrate_split(const std::function<double(double)>& f, std::vector<double> pts, double abs_tol,
                                  std::size_t max_panels = 400000) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  pts.push_back(0.0);
  for (double& p : pts) {
    p = std::fmod(p, std::numbers::pi);
    if (p < 0) p += std::numbers::pi;
  }
  pts.push_back(std::numbers::pi);
  std::sort(pts.begin(), pts.end());

  struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
  };
  auto make = [&](double a, double b) {
    Panel p{a, b, 0, 0};
    p.value = GK::integrate(f, a, b, 0, 0.0, &p.error);
    return p;
  };
  std::priority_queue<Panel> heap;
  QuadResult r;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (pts[i + 1] - pts[i] < 1e-15) continue;
    auto p = make(pts[i], pts[i + 1]);
    r.value += p.value;
    r.error += p.error;
    heap.push(p);
  }
  while (r.error > abs_tol && heap.size() < max_panels) {
    const Panel worst = heap.top();
    if (worst.b - worst.a < 1e-14) break;
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const auto l = make(worst.a, mid), h = make(mid, worst.b);
    r.value += l.value + h.value - worst.value;
    r.error += l.error + h.error - worst.error;
    heap.push(l);
    heap.push(h);
  }
  // Re-sum to shed the rounding drift of the running totals.
  r.value = r.error = 0;
  for (; !heap.empty(); heap.pop()) {
    r.value += heap.top().value;
    r.error += heap.top().error;
  }
  return r;
}

// Breakpoints around a zero z of a delay law: the saturation radius where
// T = W and a geometric ladder below and above it.
inline void add_ladder(std::vector<double>& pts, double z, int d, double W, double T0) {
  pts.push_back(z);
  if (d == 0) return;
  double r = W >= T0 ? 0.25 : 0.5 * std::asin(std::pow(W / T0, 1.0 / d));
  if (!(r > 0)) r = 1e-12;
  for (double s = r; s < 0.7; s *= 2.0) {
    pts.push_back(z + s);
    pts.push_back(z - s);
  }
  for (double s = r / 2; s > 1e-10; s /= 2.0) {
    pts.push_back(z + s);
    pts.push_back(z - s);
  }
}

inline double weighted_correlation(double theta, int d, double W, double T0, SourceMode mode,
                                   const std::function<double(double, double)>& weight, const char* what) {
  // a = 0, c = -theta; zeta = xi + pi/2 (anti) or xi (parallel).
  const double a = 0.0, c = -theta;
  const double shift = mode == SourceMode::anti ? std::numbers::pi / 2 : 0.0;
  auto w = [&](double xi) { return weight(max_delay(xi - a, d, T0), max_delay(xi + shift - c, d, T0)); };
  auto num = [&](double xi) { return std::cos(2 * (xi - a)) * std::cos(2 * (xi + shift - c)) * w(xi); };

  std::vector<double> pts;
  for (int k = 0; k < 2; ++k) {
    add_ladder(pts, a + k * std::numbers::pi / 2, d, W, T0);
    add_ladder(pts, c - shift + k * std::numbers::pi / 2, d, W, T0);
  }
  // Relative target on the weight; the numerator is bounded by it.
  auto D = integrate_split(w, pts, 0.0, 0);
  D = integrate_split(w, pts, 1e-10 * D.value);
  if (!(D.value > 0)) throw QuadratureError(std::string(what) + ": zero total weight", 0.0, D.error);
  const auto N = integrate_split(num, pts, 1e-10 * D.value);
  const double e = N.value / D.value;
  const double err = (N.error + std::abs(e) * D.error) / D.value;
  if (!(err <= 1e-8)) {
    throw QuadratureError(std::string(what) + ": tolerance 1e-8 not reached (estimate " + std::to_string(e) +
                              ", error " + std::to_string(err) + ")",
                          e, err);
  }
  return e;
}

}  // namespace detail

// E12 from the coincidence-weighted model at finite window W, by
// quadrature of the exact overlap weight.
inline double tpm_correlation_numeric(double theta, int d, double W, double T0 = 1.0,
                                      SourceMode mode = SourceMode::anti) {
  require_even_d(d);
  if (!(W >= 0)) throw InvalidArgument("W must be nonnegative");
  if (!(T0 > 0)) throw InvalidArgument("T0 must be positive");
  if (W == 0.0) {
    // Leading-order weight 2W / max(T1, T2); the factor W cancels.
    const double r = std::remainder(theta, std::numbers::pi / 2);
    if (d > 0 && std::abs(r) < 1e-15) {
      // Both delay laws vanish at the same xi and the weight concentrates there.
      const double e = -std::cos(2 * theta);
      return mode == SourceMode::anti ? e : -e;
    }
    return detail::weighted_correlation(theta, d, 0.0, T0, mode,
                                        [](double A, double B) { return 1.0 / std::max({A, B, 1e-300}); },
                                        "tpm_correlation_numeric");
  }
  return detail::weighted_correlation(theta, d, W, T0, mode,
                                      [W](double A, double B) { return coincidence_weight(A, B, W); },
                                      "tpm_correlation_numeric");
}

// Same integral with the product of the two local threshold weights.
inline double local_threshold_correlation_numeric(double theta, int d, double W, double T0 = 1.0,
                                                  SourceMode mode = SourceMode::anti) {
  require_even_d(d);
  if (!(W > 0)) throw InvalidArgument("W must be positive");
  return detail::weighted_correlation(
      theta, d, W, T0, mode, [W](double A, double B) { return local_weight(A, W) * local_weight(B, W); },
      "local_threshold_correlation_numeric");
}

struct TimetagConfig {
  int d = 4;
  double T0 = 1.0;
  SourceMode mode = SourceMode::anti;
};

inline void require_photon(const Direction& dir) {
  if (!dir.is_photon()) throw InvalidArgument("the time-tag model needs photon polarizer settings");
}

namespace detail {

struct Emission {
  RawEvent left, right;
};

inline Emission emit(const Direction& a, const Direction& c, int r1, int r2, const TimetagConfig& cfg,
                     RandomStream& rng) {
  const double xi = std::numbers::pi * rng.uniform();
  const double zeta = cfg.mode == SourceMode::anti ? xi + std::numbers::pi / 2 : xi;
  Emission e;
  e.left.r = static_cast<std::int8_t>(r1);
  e.right.r = static_cast<std::int8_t>(r2);
  e.left.x = static_cast<std::int8_t>(rng.sign(0.5 * (1 + std::cos(2 * (xi - a.angle())))));
  e.right.x = static_cast<std::int8_t>(rng.sign(0.5 * (1 + std::cos(2 * (zeta - c.angle())))));
  e.left.t = rng.uniform() * max_delay(xi - a.angle(), cfg.d, cfg.T0);
  e.right.t = rng.uniform() * max_delay(zeta - c.angle(), cfg.d, cfg.T0);
  return e;
}

}  // namespace detail

struct RawPair {
  RawStream left{1, {}};
  RawStream right{2, {}};
};

// Four settings chosen per emission by two fair bits: r1 picks a/b, r2 picks c/d.
inline RawPair timetag_raw(const Settings4& s, std::size_t n, const TimetagConfig& cfg, RandomStream& rng) {
  require_even_d(cfg.d);
  if (!(cfg.T0 > 0)) throw InvalidArgument("T0 must be positive");
  for (const auto* dir : {&s.a, &s.b, &s.c, &s.d}) require_photon(*dir);
  RawPair out;
  out.left.events.reserve(n);
  out.right.events.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const int r1 = rng.bernoulli(0.5) ? 1 : 0;
    const int r2 = rng.bernoulli(0.5) ? 1 : 0;
    const auto e = detail::emit(r1 ? s.b : s.a, r2 ? s.d : s.c, r1, r2, cfg, rng);
    out.left.events.push_back(e.left);
    out.right.events.push_back(e.right);
  }
  return out;
}

// Single condition: every event carries r = 0.
inline RawPair timetag_raw(const ConditionLabel& cond, std::size_t n, const TimetagConfig& cfg, RandomStream& rng) {
  require_even_d(cfg.d);
  if (!(cfg.T0 > 0)) throw InvalidArgument("T0 must be positive");
  require_photon(cond.setting1);
  require_photon(cond.setting2);
  RawPair out;
  out.left.events.reserve(n);
  out.right.events.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto e = detail::emit(cond.setting1, cond.setting2, 0, 0, cfg, rng);
    out.left.events.push_back(e.left);
    out.right.events.push_back(e.right);
  }
  return out;
}

// Each station keeps its own event iff its delay is at most W; pairs kept on
// both sides form the dataset.
inline PairDataSet local_threshold(const ConditionLabel& cond, std::size_t n, const TimetagConfig& cfg, double W,
                                   RandomStream& rng) {
  if (!(W >= 0)) throw InvalidArgument("W must be nonnegative");
  require_even_d(cfg.d);
  require_photon(cond.setting1);
  require_photon(cond.setting2);
  PairDataSet out;
  out.condition = cond;
  for (std::size_t k = 0; k < n; ++k) {
    const auto e = detail::emit(cond.setting1, cond.setting2, 0, 0, cfg, rng);
    if (e.left.t <= W && e.right.t <= W) out.pairs.push_back({e.left.x, e.right.x});
  }
  if (out.pairs.empty()) throw Error("local threshold kept no pairs");
  return out;
}

inline Quartet local_threshold(const Settings4& s, std::size_t n, const TimetagConfig& cfg, double W,
                               RandomStream& rng) {
  if (!(W >= 0)) throw InvalidArgument("W must be nonnegative");
  const auto raw = timetag_raw(s, n, cfg, rng);
  Quartet q;
  for (int k = 1; k <= 4; ++k) q[k - 1].condition = s.condition(k);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& l = raw.left.events[k];
    const auto& r = raw.right.events[k];
    if (l.t <= W && r.t <= W) q[2 * l.r + r.r].pairs.push_back({l.x, r.x});
  }
  for (const auto& d : q)
    if (d.pairs.empty()) throw Error("local threshold kept no pairs for condition " + std::to_string(d.condition.s));
  return truncate_equal(q);
}

}  // namespace eprb
