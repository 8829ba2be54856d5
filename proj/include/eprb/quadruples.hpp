#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "eprb/data.hpp"
#include "eprb/simplex.hpp"

namespace eprb {

// Cells are ordered (+,+), (+,-), (-,+), (-,-).
inline int cell_index(int x, int y) { return 2 * sign_index(x) + sign_index(y); }

struct CountTable4 {
  std::array<std::array<std::int64_t, 4>, 4> counts{};  // [s-1][cell]
  std::int64_t N = 0;

  std::int64_t at(int s, int x, int y) const { return counts[s - 1][cell_index(x, y)]; }
};

inline void validate(const CountTable4& t) {
  for (const auto& row : t.counts) {
    std::int64_t sum = 0;
    for (auto v : row) {
      if (v < 0) throw InvalidArgument("negative cell count");
      sum += v;
    }
    if (sum != t.N) throw InvalidArgument("cell counts of every condition must sum to N");
  }
}

inline void require_equal_lengths(const Quartet& q) {
  for (const auto& d : q) {
    require_nonempty(d);
    if (d.size() != q[0].size()) throw InvalidArgument("datasets must have equal lengths (use truncate_equal)");
  }
}

inline CountTable4 count_table(const Quartet& q) {
  require_equal_lengths(q);
  CountTable4 t;
  t.N = static_cast<std::int64_t>(q[0].size());
  for (std::size_t s = 0; s < 4; ++s)
    for (const auto& p : q[s].pairs) ++t.counts[s][cell_index(p.a, p.b)];
  return t;
}

// Quadruple type i carries one value per shared variable: bit 3 is A of
// sets 1,2; bit 1 is A of sets 3,4; bit 0 is B of sets 1,3; bit 2 is B of
// sets 2,4. A clear bit means +1. Returns the cell that type i occupies in
// set s (1-based).
inline int quadruple_cell(int type, int s) {
  auto val = [type](int bit) { return (type >> bit) & 1 ? -1 : 1; };
  const int x = val(3), y = val(1), z = val(0), w = val(2);
  switch (s) {
    case 1: return cell_index(x, z);
    case 2: return cell_index(x, w);
    case 3: return cell_index(y, z);
    case 4: return cell_index(y, w);
    default: throw InvalidArgument("condition index must be in 1..4");
  }
}

struct QuadrupleSolution {
  std::array<std::int64_t, 16> m{};
  std::array<std::array<std::int64_t, 4>, 4> u{};  // [s-1][cell]
  std::int64_t U = 0;
  std::int64_t N = 0;
  bool exact_fallback = false;  // true when the rational solver was needed

  double delta() const { return N == 0 ? 0.0 : static_cast<double>(N - U) / static_cast<double>(N); }
};

// Raised when the LP optimum is not integral even in exact arithmetic.
class FractionalOptimum : public Error {
 public:
  FractionalOptimum(const std::string& what, std::vector<std::string> certificate)
      : Error(what), certificate_(std::move(certificate)) {}
  const std::vector<std::string>& certificate() const { return certificate_; }

 private:
  std::vector<std::string> certificate_;
};

struct LpOptions {
  bool force_exact = false;  // skip the floating-point pass
  bool lexicographic = true;  // pick the lexicographically smallest optimal m
};

namespace detail {

using Rational = boost::multiprecision::cpp_rational;

template <class T>
struct LpProblem {
  std::vector<std::vector<T>> A;
  std::vector<T> b;
};

// 32 unknowns (m0..m15, then u[s][cell]) and the 16 cell equalities.
template <class T>
LpProblem<T> base_problem(const CountTable4& t) {
  LpProblem<T> p;
  for (int s = 1; s <= 4; ++s) {
    for (int cell = 0; cell < 4; ++cell) {
      std::vector<T> row(32, T(0));
      for (int i = 0; i < 16; ++i)
        if (quadruple_cell(i, s) == cell) row[i] = T(1);
      row[16 + 4 * (s - 1) + cell] = T(1);
      p.A.push_back(std::move(row));
      p.b.push_back(T(t.counts[s - 1][cell]));
    }
  }
  return p;
}

inline bool near_integer(double v, std::int64_t& out) {
  const double r = std::round(v);
  if (std::abs(v - r) > 1e-7) return false;
  out = static_cast<std::int64_t>(r);
  return true;
}

inline bool near_integer(const Rational& v, std::int64_t& out) {
  if (boost::multiprecision::denominator(v) != 1) return false;
  out = static_cast<std::int64_t>(boost::multiprecision::numerator(v));
  return true;
}

inline std::string to_text(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}
inline std::string to_text(const Rational& v) { return v.str(); }

template <class T>
std::vector<std::string> certificate(const std::vector<T>& x) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < 16 && i < x.size(); ++i) out.push_back("m" + std::to_string(i) + "=" + to_text(x[i]));
  return out;
}

// Returns false if some optimal value is not integral (the caller then falls
// back or reports). On success fills m.
template <class T>
bool solve_counts(const CountTable4& t, bool lexicographic, std::array<std::int64_t, 16>& m,
                  std::vector<std::string>& cert) {
  auto prob = base_problem<T>(t);
  std::vector<T> c(32, T(0));
  for (int i = 0; i < 16; ++i) c[i] = T(-1);
  auto res = lp::minimize(prob.A, prob.b, c);
  if (res.status != lp::Status::optimal) throw Error("quadruple LP is not solvable: internal error");

  T best_sum = T(0);
  for (int i = 0; i < 16; ++i) best_sum += res.x[i];
  std::int64_t total = 0;
  if (!near_integer(best_sum, total)) {
    cert = certificate(res.x);
    return false;
  }

  if (!lexicographic) {
    for (int i = 0; i < 16; ++i) {
      if (!near_integer(res.x[i], m[i])) {
        cert = certificate(res.x);
        return false;
      }
    }
    return true;
  }

  // Fix the optimal total, then minimise m0, m1, ... in turn.
  std::vector<T> sum_row(32, T(0));
  for (int i = 0; i < 16; ++i) sum_row[i] = T(1);
  prob.A.push_back(sum_row);
  prob.b.push_back(T(total));
  for (int i = 0; i < 16; ++i) {
    std::vector<T> ci(32, T(0));
    ci[i] = T(1);
    auto r = lp::minimize(prob.A, prob.b, ci);
    if (r.status != lp::Status::optimal) throw Error("lexicographic quadruple LP failed: internal error");
    if (!near_integer(r.x[i], m[i])) {
      cert = certificate(r.x);
      return false;
    }
    std::vector<T> fix(32, T(0));
    fix[i] = T(1);
    prob.A.push_back(fix);
    prob.b.push_back(T(m[i]));
  }
  return true;
}

}  // namespace detail

// Completes a candidate m into a full solution and checks every cell
// equality exactly in integers.
inline QuadrupleSolution complete_solution(const CountTable4& t, const std::array<std::int64_t, 16>& m) {
  QuadrupleSolution sol;
  sol.m = m;
  sol.N = t.N;
  std::int64_t total = 0;
  for (auto v : m) {
    if (v < 0) throw Error("negative quadruple multiplicity");
    total += v;
  }
  for (int s = 1; s <= 4; ++s) {
    std::array<std::int64_t, 4> n{};
    for (int i = 0; i < 16; ++i) n[quadruple_cell(i, s)] += m[i];
    for (int cell = 0; cell < 4; ++cell) {
      const std::int64_t u = t.counts[s - 1][cell] - n[cell];
      if (u < 0) throw Error("quadruple solution violates a cell count");
      sol.u[s - 1][cell] = u;
    }
  }
  sol.U = t.N - total;
  return sol;
}

inline QuadrupleSolution delta_lp(const CountTable4& t, const LpOptions& opt = {}) {
  validate(t);
  std::array<std::int64_t, 16> m{};
  std::vector<std::string> cert;
  bool exact = opt.force_exact;
  if (!exact && !detail::solve_counts<double>(t, opt.lexicographic, m, cert)) exact = true;
  if (exact) {
    cert.clear();
    if (!detail::solve_counts<detail::Rational>(t, opt.lexicographic, m, cert)) {
      throw FractionalOptimum("quadruple LP optimum is not integral", cert);
    }
  }
  auto sol = complete_solution(t, m);
  sol.exact_fallback = exact && !opt.force_exact;
  return sol;
}

inline QuadrupleSolution delta_lp(const Quartet& q, const LpOptions& opt = {}) { return delta_lp(count_table(q), opt); }

// Fraction of indices k at which the four datasets already form a quadruple.
inline double delta_naive(const Quartet& q) {
  require_equal_lengths(q);
  const std::size_t n = q[0].size();
  std::size_t hits = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto &p1 = q[0].pairs[k], &p2 = q[1].pairs[k], &p3 = q[2].pairs[k], &p4 = q[3].pairs[k];
    if (p1.a == p2.a && p3.a == p4.a && p1.b == p3.b && p2.b == p4.b) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

inline double delta_cellwise(const CountTable4& t) {
  validate(t);
  std::int64_t sum = 0;
  for (int cell = 0; cell < 4; ++cell) {
    std::int64_t lo = t.counts[0][cell];
    for (int s = 1; s < 4; ++s) lo = std::min(lo, t.counts[s][cell]);
    sum += lo;
  }
  return static_cast<double>(sum) / static_cast<double>(t.N);
}

// Exhaustive integer search over quadruple multiplicities; independent of
// the LP. Only counts matter, so this covers every reshuffling.
inline double delta_bruteforce(const Quartet& q, std::int64_t max_n = 8) {
  const CountTable4 t = count_table(q);
  if (t.N > max_n) throw InvalidArgument("brute force limited to N <= " + std::to_string(max_n));

  // 16 cell counts packed in 4-bit fields.
  auto field = [](int s, int cell) { return 4 * (4 * (s - 1) + cell); };
  std::uint64_t start = 0;
  for (int s = 1; s <= 4; ++s)
    for (int cell = 0; cell < 4; ++cell)
      start |= static_cast<std::uint64_t>(t.counts[s - 1][cell]) << field(s, cell);

  std::array<std::uint64_t, 16> take{};
  for (int i = 0; i < 16; ++i)
    for (int s = 1; s <= 4; ++s) take[i] |= std::uint64_t{1} << field(s, quadruple_cell(i, s));

  std::unordered_map<std::uint64_t, int> memo[16];
  std::function<int(int, std::uint64_t)> best = [&](int i, std::uint64_t rem) -> int {
    if (i == 16) return 0;
    auto it = memo[i].find(rem);
    if (it != memo[i].end()) return it->second;
    int result = best(i + 1, rem);
    bool fits = true;
    for (int s = 1; s <= 4; ++s)
      if (((rem >> field(s, quadruple_cell(i, s))) & 0xF) == 0) fits = false;
    if (fits) result = std::max(result, 1 + best(i, rem - take[i]));
    memo[i].emplace(rem, result);
    return result;
  };
  return static_cast<double>(best(0, start)) / static_cast<double>(t.N);
}

// Fraction of hidden-variable values shared by all four runs.
inline double delta_lambda(const std::array<std::vector<std::int64_t>, 4>& lambdas, std::int64_t K) {
  if (K < 1) throw InvalidArgument("K must be positive");
  const std::size_t n = lambdas[0].size();
  if (n == 0) throw InvalidArgument("empty lambda list");
  std::vector<std::array<std::int64_t, 4>> mult(static_cast<std::size_t>(K));
  for (std::size_t s = 0; s < 4; ++s) {
    if (lambdas[s].size() != n) throw InvalidArgument("lambda lists must have equal lengths");
    for (auto l : lambdas[s]) {
      if (l < 1 || l > K) throw InvalidArgument("lambda index out of range");
      ++mult[static_cast<std::size_t>(l - 1)][s];
    }
  }
  std::int64_t sum = 0;
  for (const auto& c : mult) sum += *std::min_element(c.begin(), c.end());
  return static_cast<double>(sum) / static_cast<double>(n);
}

}  // namespace eprb
