#pragma once

// Quantum-theoretical reference: Pauli algebra, one- and two-spin density
// matrices, polarization states, and an ideal two-qubit circuit engine.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eprb/data.hpp"
#include "eprb/inequalities.hpp"

namespace eprb::qt {

using cd = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Vec4 = Eigen::Vector4cd;

inline Mat2 identity2() { return Mat2::Identity(); }

// sigma_x, sigma_y, sigma_z for i = 0, 1, 2.
inline Mat2 pauli(int i) {
  Mat2 m;
  switch (i) {
    case 0: m << 0, 1, 1, 0; break;
    case 1: m << 0, cd(0, -1), cd(0, 1), 0; break;
    case 2: m << 1, 0, 0, -1; break;
    default: throw InvalidArgument("Pauli index must be 0, 1 or 2");
  }
  return m;
}

inline Mat2 dot_sigma(const Vec3& v) { return v[0] * pauli(0) + v[1] * pauli(1) + v[2] * pauli(2); }

inline Mat4 kron(const Mat2& a, const Mat2& b) {
  Mat4 m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return m;
}

inline void require_unit(const Vec3& v) {
  if (std::abs(norm(v) - 1) > 1e-12) throw InvalidArgument("direction must be a unit vector");
}

// Hermitian, unit-trace matrix of dimension 2 or 4. Positivity is reported,
// not required.
class DensityMatrix {
 public:
  explicit DensityMatrix(Eigen::MatrixXcd m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || (m_.rows() != 2 && m_.rows() != 4))
      throw InvalidArgument("density matrix must be 2x2 or 4x4");
    if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw InvalidArgument("density matrix is not Hermitian");
    if (std::abs(m_.trace() - cd(1, 0)) > 1e-12) throw InvalidArgument("density matrix trace differs from 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m_);
    eig_ = es.eigenvalues();
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXcd& matrix() const { return m_; }
  // Ascending.
  const Eigen::VectorXd& eigenvalues() const { return eig_; }
  bool is_psd(double tol = 1e-12) const { return eig_.minCoeff() >= -tol; }
  double purity() const { return (m_ * m_).trace().real(); }

 private:
  Eigen::MatrixXcd m_;
  Eigen::VectorXd eig_;
};

// (1 + z d.sigma)/2
inline Mat2 projector(int z, const Vec3& d) { return 0.5 * (identity2() + double(z) * dot_sigma(d)); }

inline double projector_expectation(const DensityMatrix& rho, int z, const Vec3& d) {
  if (rho.dim() != 2) throw InvalidArgument("projector_expectation needs a single-spin state");
  if (!rho.is_psd()) throw InvalidArgument("state is not positive semidefinite");
  if (z != 1 && z != -1) throw InvalidArgument("z must be +1 or -1");
  require_unit(d);
  return (projector(z, d) * rho.matrix()).trace().real();
}

inline DensityMatrix bloch_state(const Vec3& c) {
  if (norm(c) > 1 + 1e-12) throw InvalidArgument("Bloch vector longer than 1");
  return DensityMatrix(Eigen::MatrixXcd(0.5 * (identity2() + dot_sigma(c))));
}

// (1 - q sigma1.sigma2)/4; q = 1 is the singlet.
inline Mat4 werner_matrix(double q) {
  Mat4 ss = Mat4::Zero();
  for (int i = 0; i < 3; ++i) ss += kron(pauli(i), pauli(i));
  return 0.25 * (Mat4::Identity() - q * ss);
}

inline DensityMatrix singlet_state() { return DensityMatrix(Eigen::MatrixXcd(werner_matrix(1.0))); }

inline SummaryStats expectations(const DensityMatrix& rho, const Vec3& a, const Vec3& c) {
  if (rho.dim() != 4) throw InvalidArgument("two-spin expectations need a 4x4 state");
  const Mat2 A = dot_sigma(a), C = dot_sigma(c);
  const auto& m = rho.matrix();
  return {(m * kron(A, identity2())).trace().real(), (m * kron(identity2(), C)).trace().real(),
          (m * kron(A, C)).trace().real()};
}

inline SummaryStats singlet_expectations(const Vec3& a, const Vec3& c) {
  require_unit(a);
  require_unit(c);
  return expectations(singlet_state(), a, c);
}

struct NogoResult {
  bool valid = false;
  std::array<double, 4> eigenvalues{};  // ascending
};

inline NogoResult nogo_check(double q) {
  Eigen::SelfAdjointEigenSolver<Mat4> es(werner_matrix(q));
  NogoResult r;
  for (int i = 0; i < 4; ++i) r.eigenvalues[i] = es.eigenvalues()[i];
  r.valid = r.eigenvalues[0] >= -1e-12;
  return r;
}

struct MomentTable15 {
  Vec3 u{0, 0, 0};
  Vec3 v{0, 0, 0};
  std::array<std::array<double, 3>, 3> w{};
};

// rho = (1 + u.sigma x 1 + 1 x v.sigma + sum w_ab sigma_a x sigma_b)/4
inline DensityMatrix state_from_moments(const MomentTable15& m) {
  Mat4 r = Mat4::Identity();
  r += kron(dot_sigma(m.u), identity2());
  r += kron(identity2(), dot_sigma(m.v));
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) r += m.w[a][b] * kron(pauli(a), pauli(b));
  return DensityMatrix(Eigen::MatrixXcd(0.25 * r));
}

inline MomentTable15 moments_from_state(const DensityMatrix& rho) {
  if (rho.dim() != 4) throw InvalidArgument("moments need a 4x4 state");
  const auto& m = rho.matrix();
  MomentTable15 t;
  for (int a = 0; a < 3; ++a) {
    t.u[a] = (m * kron(pauli(a), identity2())).trace().real();
    t.v[a] = (m * kron(identity2(), pauli(a))).trace().real();
    for (int b = 0; b < 3; ++b) t.w[a][b] = (m * kron(pauli(a), pauli(b))).trace().real();
  }
  return t;
}

// Polarization qubit with H = |0>, V = |1>: the polarizer at angle alpha
// passes (cos alpha, sin alpha) as +1 and (-sin alpha, cos alpha) as -1.
inline Mat2 photon_projector(int x, double alpha) {
  return 0.5 * (identity2() + double(x) * (std::cos(2 * alpha) * pauli(2) + std::sin(2 * alpha) * pauli(0)));
}

// (|HV> + r|VH>)/sqrt(1 + r^2)
inline Vec4 hv_state(double r) {
  Vec4 psi(0, 1, r, 0);
  return psi / std::sqrt(1 + r * r);
}

inline Mat4 pure(const Vec4& psi) { return psi * psi.adjoint(); }

// Cell probabilities (+,+), (+,-), (-,+), (-,-) for polarizers alpha, beta.
inline std::array<double, 4> photon_cells(const Mat4& rho, double alpha, double beta) {
  std::array<double, 4> p{};
  int k = 0;
  for (int x : {1, -1})
    for (int y : {1, -1}) p[k++] = (rho * kron(photon_projector(x, alpha), photon_projector(y, beta))).trace().real();
  return p;
}

inline double photon_correlation(const Mat4& rho, double alpha, double beta) {
  const auto p = photon_cells(rho, alpha, beta);
  return p[0] - p[1] - p[2] + p[3];
}

// Ideal two-qubit circuits. Qubit 0 is the most significant bit of the
// amplitude index, so index = 2 b0 + b1.
struct Gate {
  enum class Kind { X, H, Sx, Rz, CNOT } kind;
  int q = 0;  // target qubit, or control for CNOT
  int t = 1;  // CNOT target
  double theta = 0;
};

struct Circuit2Q {
  std::vector<Gate> gates;

  Circuit2Q& x(int q) { return add({Gate::Kind::X, q, 0, 0}); }
  Circuit2Q& h(int q) { return add({Gate::Kind::H, q, 0, 0}); }
  Circuit2Q& sx(int q) { return add({Gate::Kind::Sx, q, 0, 0}); }
  Circuit2Q& rz(int q, double theta) { return add({Gate::Kind::Rz, q, 0, theta}); }
  Circuit2Q& cnot(int c, int t) { return add({Gate::Kind::CNOT, c, t, 0}); }

 private:
  Circuit2Q& add(Gate g) {
    gates.push_back(g);
    return *this;
  }
};

inline Mat2 gate_matrix(const Gate& g) {
  Mat2 m;
  const double s = 1 / std::numbers::sqrt2;
  switch (g.kind) {
    case Gate::Kind::X: m << 0, 1, 1, 0; break;
    case Gate::Kind::H: m << s, s, s, -s; break;
    case Gate::Kind::Sx: m << cd(0.5, 0.5), cd(0.5, -0.5), cd(0.5, -0.5), cd(0.5, 0.5); break;
    case Gate::Kind::Rz: m << std::polar(1.0, -g.theta / 2), 0, 0, std::polar(1.0, g.theta / 2); break;
    case Gate::Kind::CNOT: throw InvalidArgument("CNOT is not a single-qubit gate");
  }
  return m;
}

inline void apply(const Gate& g, Vec4& psi) {
  auto check = [](int q) {
    if (q != 0 && q != 1) throw InvalidArgument("qubit index must be 0 or 1, got " + std::to_string(q));
  };
  check(g.q);
  if (g.kind == Gate::Kind::CNOT) {
    check(g.t);
    if (g.q == g.t) throw InvalidArgument("CNOT control and target must differ");
    const int cbit = g.q == 0 ? 2 : 1, tbit = g.t == 0 ? 2 : 1;
    for (int k = 0; k < 4; ++k)
      if ((k & cbit) && !(k & tbit)) std::swap(psi[k], psi[k | tbit]);
    return;
  }
  const Mat2 u = gate_matrix(g);
  const int bit = g.q == 0 ? 2 : 1;
  for (int k = 0; k < 4; ++k) {
    if (k & bit) continue;
    const cd a0 = psi[k], a1 = psi[k | bit];
    psi[k] = u(0, 0) * a0 + u(0, 1) * a1;
    psi[k | bit] = u(1, 0) * a0 + u(1, 1) * a1;
  }
}

// Final state from |00>; when trace is given, the state after every gate is
// appended to it.
inline Vec4 simulate(const Circuit2Q& c, std::vector<Vec4>* trace = nullptr) {
  Vec4 psi(1, 0, 0, 0);
  for (const auto& g : c.gates) {
    apply(g, psi);
    if (trace) trace->push_back(psi);
  }
  return psi;
}

// Born probabilities indexed by 2 b_i + b_j.
inline std::array<double, 4> circuit_probabilities(const Circuit2Q& c) {
  const Vec4 psi = simulate(c);
  return {std::norm(psi[0]), std::norm(psi[1]), std::norm(psi[2]), std::norm(psi[3])};
}

// Outcome x = 1 - 2b on each qubit.
inline SummaryStats circuit_expectations(const std::array<double, 4>& p) {
  return {p[0] + p[1] - p[2] - p[3], p[0] - p[1] + p[2] - p[3], p[0] - p[1] - p[2] + p[3]};
}

// Singlet preparation followed by measurement along alpha (qubit i) and
// beta (qubit j).
inline Circuit2Q singlet_circuit(double alpha, double beta) {
  Circuit2Q c;
  c.x(0).x(1).h(0).cnot(0, 1);
  c.h(0).rz(0, alpha).h(0);
  c.h(1).rz(1, beta).h(1);
  return c;
}

// Same circuit in native gates: H is replaced by Rz(pi/2) Sx Rz(pi/2).
inline Circuit2Q singlet_circuit_transpiled(double alpha, double beta) {
  const double h = std::numbers::pi / 2;
  Circuit2Q c;
  c.x(0).x(1);
  c.rz(0, h).sx(0).rz(0, h);
  c.cnot(0, 1);
  for (int q = 0; q < 2; ++q) {
    c.rz(q, h).sx(q).rz(q, h);
    c.rz(q, q == 0 ? alpha : beta);
    c.rz(q, h).sx(q).rz(q, h);
  }
  return c;
}

// Largest amplitude difference after removing the global phase, which is
// fixed on the largest-magnitude amplitude of the first state.
inline double transpile_equivalence(const Circuit2Q& c1, const Circuit2Q& c2) {
  const Vec4 a = simulate(c1), b = simulate(c2);
  Eigen::Index k = 0;
  a.cwiseAbs().maxCoeff(&k);
  cd phase(1, 0);
  if (std::abs(b[k]) > 0) phase = (a[k] / b[k]) / std::abs(a[k] / b[k]);
  return (a - phase * b).cwiseAbs().maxCoeff();
}

// |C(a,c) - C(a,d) + C(b,c) + C(b,d)| with singlet correlations.
inline double cirelson_value(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const auto e = [](const Vec3& x, const Vec3& y) { return singlet_expectations(x, y).e12; };
  return std::abs(e(a, c) - e(a, d) + e(b, c) + e(b, d));
}

struct CirelsonSearch {
  double max = 0;
  std::array<double, 4> angles{};
};

// Exhaustive search over planar angles k * 2pi / n for the four settings.
inline CirelsonSearch cirelson_grid_max(int n = 72) {
  if (n < 1) throw InvalidArgument("grid size must be positive");
  std::vector<double> table(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      table[i * n + j] = singlet_expectations(planar(2 * std::numbers::pi * i / n), planar(2 * std::numbers::pi * j / n)).e12;
  CirelsonSearch best;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          const double v = std::abs(table[a * n + c] - table[a * n + d] + table[b * n + c] + table[b * n + d]);
          if (v > best.max) {
            best.max = v;
            best.angles = {2 * std::numbers::pi * a / n, 2 * std::numbers::pi * b / n, 2 * std::numbers::pi * c / n,
                           2 * std::numbers::pi * d / n};
          }
        }
  return best;
}

// I(theta) = E'(theta)^2 / (1 - E(theta)^2) with a centered difference.
inline std::vector<double> fisher_information(const std::function<double(double)>& e12, const std::vector<double>& grid,
                                              double h = 1e-5) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double t : grid) {
    const double e = e12(t);
    const double denom = (1 - e) * (1 + e);
    if (!(denom > 0)) throw InvalidArgument("|E| = 1 at theta = " + std::to_string(t) + ": Fisher information is singular");
    const double de = (e12(t + h) - e12(t - h)) / (2 * h);
    out.push_back(de * de / denom);
  }
  return out;
}

}  // namespace eprb::qt
