#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "eprb/error.hpp"

namespace eprb {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& u, const Vec3& v) {
  return u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

// Unit vector in the x-y plane.
inline Vec3 planar(double angle) { return {std::cos(angle), std::sin(angle), 0.0}; }

inline double deg(double degrees) { return degrees * std::numbers::pi / 180.0; }

// A measurement setting. Spin models use a 3D unit vector; photon models use
// a polarizer angle. Both are mapped to a Bloch vector so that the overlap of
// two settings is a dot product (cos 2(a-c) for photons).
class Direction {
 public:
  enum class Kind { spin3d, photon2d };

  static Direction spin(const Vec3& v) {
    const double n = norm(v);
    if (std::abs(n - 1.0) > 1e-12) {
      throw InvalidArgument("spin direction must have unit norm, got " + std::to_string(n));
    }
    Direction d;
    d.kind_ = Kind::spin3d;
    d.vec_ = v;
    d.angle_ = std::atan2(v[1], v[0]);
    if (d.angle_ < 0) d.angle_ += 2 * std::numbers::pi;
    return d;
  }

  // Convenience: a spin direction in the x-y plane at the given angle.
  static Direction spin_planar(double angle) { return spin(planar(angle)); }

  static Direction photon(double angle) {
    if (!std::isfinite(angle)) throw InvalidArgument("photon angle must be finite");
    Direction d;
    d.kind_ = Kind::photon2d;
    d.angle_ = std::fmod(angle, 2 * std::numbers::pi);
    if (d.angle_ < 0) d.angle_ += 2 * std::numbers::pi;
    if (d.angle_ >= 2 * std::numbers::pi) d.angle_ = 0.0;
    d.vec_ = {std::cos(2 * d.angle_), std::sin(2 * d.angle_), 0.0};
    return d;
  }

  Kind kind() const { return kind_; }
  bool is_photon() const { return kind_ == Kind::photon2d; }
  // Polarizer angle for photons, azimuth for spins; always in [0, 2pi).
  double angle() const { return angle_; }
  // Spin vector, or (cos 2a, sin 2a, 0) for a photon polarizer.
  const Vec3& bloch() const { return vec_; }

 private:
  Kind kind_ = Kind::spin3d;
  double angle_ = 0.0;
  Vec3 vec_{0.0, 0.0, 1.0};
};

inline double overlap(const Direction& a, const Direction& c) { return dot(a.bloch(), c.bloch()); }

struct OutcomePair {
  std::int8_t a = 1;
  std::int8_t b = 1;
};

inline bool operator==(const OutcomePair& l, const OutcomePair& r) { return l.a == r.a && l.b == r.b; }

struct ConditionLabel {
  int s = 1;
  Direction setting1;
  Direction setting2;
};

// The four settings of an EPRB experiment. Condition s = 1..4 is
// (a,c), (a,d), (b,c), (b,d).
struct Settings4 {
  Direction a, b, c, d;

  ConditionLabel condition(int s) const {
    switch (s) {
      case 1: return {1, a, c};
      case 2: return {2, a, d};
      case 3: return {3, b, c};
      case 4: return {4, b, d};
      default: throw InvalidArgument("condition index must be in 1..4");
    }
  }

  static Settings4 photon_degrees(double a, double b, double c, double d) {
    return {Direction::photon(deg(a)), Direction::photon(deg(b)), Direction::photon(deg(c)),
            Direction::photon(deg(d))};
  }
  static Settings4 planar_spin_degrees(double a, double b, double c, double d) {
    return {Direction::spin_planar(deg(a)), Direction::spin_planar(deg(b)),
            Direction::spin_planar(deg(c)), Direction::spin_planar(deg(d))};
  }
};

struct PairDataSet {
  ConditionLabel condition;
  std::vector<OutcomePair> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

using Quartet = std::array<PairDataSet, 4>;

// Index 0 <-> +1, index 1 <-> -1.
inline int sign_index(int v) { return v == 1 ? 0 : 1; }
inline int index_sign(int i) { return i == 0 ? 1 : -1; }

struct FrequencyTable {
  std::array<std::array<std::int64_t, 2>, 2> counts{};
  std::int64_t N = 0;

  std::int64_t count(int x, int y) const { return counts[sign_index(x)][sign_index(y)]; }
  double f(int x, int y) const { return static_cast<double>(count(x, y)) / static_cast<double>(N); }
};

struct SummaryStats {
  double e1 = 0.0;
  double e2 = 0.0;
  double e12 = 0.0;
};

struct RawEvent {
  double t = 0.0;
  std::int8_t x = 1;
  std::int8_t r = 0;
};

struct RawStream {
  int station = 1;
  std::vector<RawEvent> events;
};

inline void require_nonempty(const PairDataSet& d) {
  if (d.pairs.empty()) throw InvalidArgument("empty dataset");
}

inline FrequencyTable frequencies(const PairDataSet& d) {
  require_nonempty(d);
  FrequencyTable t;
  for (const auto& p : d.pairs) ++t.counts[sign_index(p.a)][sign_index(p.b)];
  t.N = static_cast<std::int64_t>(d.pairs.size());
  return t;
}

inline SummaryStats summary(const FrequencyTable& t) {
  if (t.N <= 0) throw InvalidArgument("empty dataset");
  const double n = static_cast<double>(t.N);
  const auto pp = t.counts[0][0], pm = t.counts[0][1], mp = t.counts[1][0], mm = t.counts[1][1];
  return {static_cast<double>(pp + pm - mp - mm) / n, static_cast<double>(pp - pm + mp - mm) / n,
          static_cast<double>(pp - pm - mp + mm) / n};
}

inline SummaryStats summary(const PairDataSet& d) {
  require_nonempty(d);
  std::int64_t s1 = 0, s2 = 0, s12 = 0;
  for (const auto& p : d.pairs) {
    s1 += p.a;
    s2 += p.b;
    s12 += p.a * p.b;
  }
  const double n = static_cast<double>(d.pairs.size());
  return {static_cast<double>(s1) / n, static_cast<double>(s2) / n, static_cast<double>(s12) / n};
}

// f(x,y) = (1 + x e1 + y e2 + x y e12) / 4
inline double reconstruct(const SummaryStats& s, int x, int y) {
  return (1.0 + x * s.e1 + y * s.e2 + x * y * s.e12) / 4.0;
}

inline Quartet truncate_equal(const Quartet& in) {
  std::size_t n = in[0].size();
  for (const auto& d : in) {
    require_nonempty(d);
    n = std::min(n, d.size());
  }
  Quartet out;
  for (std::size_t s = 0; s < 4; ++s) {
    out[s].condition = in[s].condition;
    out[s].pairs.assign(in[s].pairs.begin(), in[s].pairs.begin() + static_cast<std::ptrdiff_t>(n));
  }
  return out;
}

}  // namespace eprb
