#pragma once

#include <cmath>
#include <initializer_list>
#include <utility>
#include <vector>

#include "eprb/data.hpp"
#include "eprb/random.hpp"

namespace eprb::test {

inline PairDataSet make_set(std::initializer_list<std::pair<int, int>> pairs, int s = 1) {
  PairDataSet d;
  d.condition.s = s;
  for (auto [a, b] : pairs) d.pairs.push_back({static_cast<std::int8_t>(a), static_cast<std::int8_t>(b)});
  return d;
}

inline PairDataSet random_set(std::size_t n, RandomStream& rng, int s = 1) {
  PairDataSet d;
  d.condition.s = s;
  for (std::size_t k = 0; k < n; ++k)
    d.pairs.push_back({static_cast<std::int8_t>(rng.sign(0.5)), static_cast<std::int8_t>(rng.sign(0.5))});
  return d;
}

inline Quartet random_quartet(std::size_t n, RandomStream& rng) {
  Quartet q;
  for (int s = 0; s < 4; ++s) q[s] = random_set(n, rng, s + 1);
  return q;
}

inline double stat_tol(std::size_t n, double k = 3.0) { return k / std::sqrt(static_cast<double>(n)); }

}  // namespace eprb::test
