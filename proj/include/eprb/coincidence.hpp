#pragma once

// Time-coincidence pairing of two raw station streams, W-scans of the
// resulting correlations and the single-particle drift diagnostic.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "eprb/data.hpp"
#include "eprb/inequalities.hpp"
#include "eprb/timetag.hpp"

namespace eprb {

enum class Pairing { emission_indexed, nearest_tag };

struct CoincidenceConfig {
  double W = std::numeric_limits<double>::infinity();
  Pairing pairing = Pairing::emission_indexed;
};

struct PairingResult {
  Quartet data;                      // after truncate_equal
  std::array<std::size_t, 4> kept{};  // per condition, before truncation
};

inline void require_valid(const CoincidenceConfig& cfg) {
  if (!(cfg.W >= 0)) throw InvalidArgument("coincidence window W must be nonnegative");
}

namespace detail {

inline int route(const RawEvent& l, const RawEvent& r) {
  if ((l.r != 0 && l.r != 1) || (r.r != 0 && r.r != 1)) throw InvalidArgument("setting bits must be 0 or 1");
  return 2 * l.r + r.r;
}

inline void require_kept(const std::array<std::size_t, 4>& kept) {
  if (std::all_of(kept.begin(), kept.end(), [](std::size_t k) { return k > 0; })) return;
  std::string msg = "no coincidences for some setting, kept counts:";
  for (auto k : kept) msg += " " + std::to_string(k);
  throw Error(msg);
}

// Index pairs (left, right) accepted under the configuration, in left order.
inline std::vector<std::pair<std::size_t, std::size_t>> match(const RawStream& s1, const RawStream& s2,
                                                              const CoincidenceConfig& cfg) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (cfg.pairing == Pairing::emission_indexed) {
    if (s1.events.size() != s2.events.size())
      throw InvalidArgument("emission-indexed pairing needs streams of equal length");
    for (std::size_t k = 0; k < s1.events.size(); ++k)
      if (std::abs(s1.events[k].t - s2.events[k].t) <= cfg.W) out.emplace_back(k, k);
    return out;
  }
  // Greedy nearest tag over left events in time order; ties go to the
  // earlier right event.
  std::set<std::pair<double, std::size_t>> free;
  for (std::size_t k = 0; k < s2.events.size(); ++k) free.emplace(s2.events[k].t, k);
  std::vector<std::size_t> order(s1.events.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return s1.events[i].t < s1.events[j].t; });
  for (std::size_t i : order) {
    if (free.empty()) break;
    const double t = s1.events[i].t;
    auto hi = free.lower_bound({t, 0});
    auto best = free.end();
    if (hi != free.end()) best = hi;
    if (hi != free.begin()) {
      auto lo = std::prev(hi);
      if (best == free.end() || t - lo->first <= best->first - t) best = lo;
    }
    if (std::abs(best->first - t) <= cfg.W) {
      out.emplace_back(i, best->second);
      free.erase(best);
    }
  }
  return out;
}

}  // namespace detail

inline PairingResult pair_events_detailed(const RawStream& s1, const RawStream& s2, const CoincidenceConfig& cfg,
                                          const Settings4& labels = Settings4::photon_degrees(0, 45, 22.5, 67.5)) {
  require_valid(cfg);
  PairingResult res;
  Quartet all;
  for (int k = 1; k <= 4; ++k) all[k - 1].condition = labels.condition(k);
  for (auto [i, j] : detail::match(s1, s2, cfg)) {
    const auto& l = s1.events[i];
    const auto& r = s2.events[j];
    all[detail::route(l, r)].pairs.push_back({l.x, r.x});
  }
  for (int k = 0; k < 4; ++k) res.kept[k] = all[k].size();
  detail::require_kept(res.kept);
  res.data = truncate_equal(all);
  return res;
}

inline Quartet pair_events(const RawStream& s1, const RawStream& s2, const CoincidenceConfig& cfg,
                           const Settings4& labels = Settings4::photon_degrees(0, 45, 22.5, 67.5)) {
  return pair_events_detailed(s1, s2, cfg, labels).data;
}

// Shifts emission k to time k * spacing so that tags of different emissions
// can be told apart by a nearest-tag matcher.
inline RawPair with_emission_clock(RawPair raw, double spacing) {
  for (auto* s : {&raw.left, &raw.right})
    for (std::size_t k = 0; k < s->events.size(); ++k) s->events[k].t += static_cast<double>(k) * spacing;
  return raw;
}

struct WScanRow {
  double W = 0;
  double S = 0;
  std::array<double, 4> e12{}, e1{}, e2{};
  std::array<std::size_t, 4> kept{};
  std::size_t n_used = 0;
};

namespace detail {

inline WScanRow scan_row(const std::vector<std::pair<std::size_t, std::size_t>>& matched, const RawStream& s1,
                         const RawStream& s2, double W) {
  WScanRow row;
  row.W = W;
  for (auto [i, j] : matched) ++row.kept[route(s1.events[i], s2.events[j])];
  require_kept(row.kept);
  row.n_used = *std::min_element(row.kept.begin(), row.kept.end());
  std::array<std::size_t, 4> used{};
  std::array<std::int64_t, 4> a{}, b{}, ab{};
  for (auto [i, j] : matched) {
    const auto& l = s1.events[i];
    const auto& r = s2.events[j];
    const int s = route(l, r);
    if (used[s] == row.n_used) continue;
    ++used[s];
    a[s] += l.x;
    b[s] += r.x;
    ab[s] += l.x * r.x;
  }
  const double n = static_cast<double>(row.n_used);
  for (int s = 0; s < 4; ++s) {
    row.e1[s] = static_cast<double>(a[s]) / n;
    row.e2[s] = static_cast<double>(b[s]) / n;
    row.e12[s] = static_cast<double>(ab[s]) / n;
  }
  row.S = chsh_function(row.e12);
  return row;
}

}  // namespace detail

inline std::vector<WScanRow> w_scan(const RawStream& s1, const RawStream& s2, const std::vector<double>& grid,
                                    Pairing pairing = Pairing::emission_indexed) {
  if (grid.empty()) throw InvalidArgument("W grid is empty");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] >= 0)) throw InvalidArgument("W grid values must be nonnegative");
    if (k > 0 && !(grid[k] > grid[k - 1])) throw InvalidArgument("W grid must be strictly increasing");
  }
  std::vector<WScanRow> rows;
  rows.reserve(grid.size());
  for (double W : grid) rows.push_back(detail::scan_row(detail::match(s1, s2, {W, pairing}), s1, s2, W));
  return rows;
}

// Log-spaced grid lo..hi with n points, as written on the command line "lo:hi:n".
inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0) || !(hi >= lo) || n == 0) throw InvalidArgument("log grid needs 0 < lo <= hi and n >= 1");
  std::vector<double> g;
  if (n == 1) return {lo};
  for (std::size_t k = 0; k < n; ++k)
    g.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(n - 1)));
  g.back() = hi;
  return g;
}

struct DriftEntry {
  double W = 0;
  int station = 1;
  char setting = 'a';
  double spread = 0;  // |e(remote setting 1) - e(remote setting 2)|
  double sigma = 0;
  bool flagged = false;
};

struct DriftReport {
  std::vector<DriftEntry> entries;
  std::size_t flags = 0;
};

// A single-particle average should not depend on the remote setting; spreads
// beyond five standard deviations are flagged.
inline DriftReport drift_diagnostic(const std::vector<WScanRow>& rows) {
  if (rows.size() < 2) throw InvalidArgument("drift diagnostic needs at least two scan rows");
  DriftReport rep;
  struct Spec {
    int station;
    char setting;
    int s1, s2;  // 0-based conditions sharing the local setting
  };
  constexpr Spec specs[] = {{1, 'a', 0, 1}, {1, 'b', 2, 3}, {2, 'c', 0, 2}, {2, 'd', 1, 3}};
  for (const auto& row : rows) {
    const double n = static_cast<double>(row.n_used);
    for (const auto& sp : specs) {
      const auto& e = sp.station == 1 ? row.e1 : row.e2;
      const double u = e[sp.s1], v = e[sp.s2];
      DriftEntry d{row.W, sp.station, sp.setting, std::abs(u - v),
                   std::sqrt(std::max(0.0, (1 - u * u) / n) + std::max(0.0, (1 - v * v) / n)), false};
      d.flagged = d.spread > 5 * d.sigma;
      rep.flags += d.flagged ? 1 : 0;
      rep.entries.push_back(d);
    }
  }
  return rep;
}

}  // namespace eprb
