#pragma once

// Dense two-phase primal simplex with Bland's rule. Works for any ordered
// field T: double for the fast path, an exact rational type for the fallback.

#include <cstddef>
#include <type_traits>
#include <vector>

namespace eprb::lp {

template <class T>
T tolerance() {
  if constexpr (std::is_floating_point_v<T>) {
    return T(1e-9);
  } else {
    return T(0);
  }
}

enum class Status { optimal, infeasible, unbounded };

template <class T>
struct Result {
  Status status = Status::infeasible;
  std::vector<T> x;
  T objective{};
  std::size_t pivots = 0;
};

template <class T>
class Tableau {
 public:
  // minimize c.x subject to A x = b, x >= 0
  Tableau(const std::vector<std::vector<T>>& A, const std::vector<T>& b, const std::vector<T>& c)
      : m_(A.size()), n_(c.size()), cost_(c) {
    width_ = n_ + m_ + 1;
    t_.assign((m_ + 1) * width_, T(0));
    basis_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      const bool flip = b[i] < T(0);
      for (std::size_t j = 0; j < n_; ++j) at(i, j) = flip ? T(-A[i][j]) : A[i][j];
      at(i, n_ + i) = T(1);
      rhs(i) = flip ? T(-b[i]) : b[i];
      basis_[i] = n_ + i;
    }
  }

  Result<T> solve() {
    Result<T> res;
    const T eps = tolerance<T>();

    // Phase 1: minimize the sum of artificials.
    std::vector<T> phase1(n_ + m_, T(0));
    for (std::size_t i = 0; i < m_; ++i) phase1[n_ + i] = T(1);
    load_objective(phase1);
    if (!iterate(n_ + m_, res.pivots)) {
      res.status = Status::unbounded;  // cannot happen in phase 1
      return res;
    }
    T infeas = T(0);
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] >= n_) infeas += rhs(i);
    T scale = T(1);
    for (std::size_t i = 0; i < m_; ++i) scale += rhs(i) < T(0) ? T(-rhs(i)) : rhs(i);
    if (infeas > eps * scale) {
      res.status = Status::infeasible;
      return res;
    }
    // Drive remaining (zero-valued) artificials out of the basis when possible.
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      for (std::size_t j = 0; j < n_; ++j) {
        const T v = at(i, j);
        if (v > eps || v < -eps) {
          pivot(i, j);
          ++res.pivots;
          break;
        }
      }
    }

    // Phase 2 on the original columns only.
    std::vector<T> phase2(n_ + m_, T(0));
    for (std::size_t j = 0; j < n_; ++j) phase2[j] = cost_[j];
    load_objective(phase2);
    if (!iterate(n_, res.pivots)) {
      res.status = Status::unbounded;
      return res;
    }
    res.status = Status::optimal;
    res.x.assign(n_, T(0));
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] < n_) res.x[basis_[i]] = rhs(i);
    res.objective = T(0);
    for (std::size_t j = 0; j < n_; ++j) res.objective += cost_[j] * res.x[j];
    return res;
  }

 private:
  T& at(std::size_t i, std::size_t j) { return t_[i * width_ + j]; }
  T& rhs(std::size_t i) { return t_[i * width_ + width_ - 1]; }
  T& obj(std::size_t j) { return t_[m_ * width_ + j]; }

  void load_objective(const std::vector<T>& cost) {
    for (std::size_t j = 0; j < width_; ++j) obj(j) = j + 1 < width_ ? cost[j] : T(0);
    for (std::size_t i = 0; i < m_; ++i) {
      const T cb = cost[basis_[i]];
      if (cb == T(0)) continue;
      for (std::size_t j = 0; j < width_; ++j) obj(j) -= cb * at(i, j);
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    const T p = at(r, c);
    for (std::size_t j = 0; j < width_; ++j) at(r, j) /= p;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const T f = t_[i * width_ + c];
      if (f == T(0)) continue;
      for (std::size_t j = 0; j < width_; ++j) t_[i * width_ + j] -= f * at(r, j);
    }
    basis_[r] = c;
  }

  // Bland's rule: lowest-index improving column, lowest-index basic variable
  // among tied ratios. Returns false when unbounded.
  bool iterate(std::size_t allowed_cols, std::size_t& pivots) {
    const T eps = tolerance<T>();
    for (;;) {
      std::size_t enter = allowed_cols;
      for (std::size_t j = 0; j < allowed_cols; ++j) {
        if (obj(j) < -eps) {
          enter = j;
          break;
        }
      }
      if (enter == allowed_cols) return true;
      std::size_t leave = m_;
      T best{};
      for (std::size_t i = 0; i < m_; ++i) {
        const T a = at(i, enter);
        if (!(a > eps)) continue;
        const T ratio = rhs(i) / a;
        if (leave == m_ || ratio < best - eps || (!(best < ratio - eps) && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave == m_) return false;
      pivot(leave, enter);
      ++pivots;
    }
  }

  std::size_t m_, n_, width_;
  std::vector<T> cost_;
  std::vector<T> t_;
  std::vector<std::size_t> basis_;
};

template <class T>
Result<T> minimize(const std::vector<std::vector<T>>& A, const std::vector<T>& b, const std::vector<T>& c) {
  return Tableau<T>(A, b, c).solve();
}

}  // namespace eprb::lp
