#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "eprb/timetag.hpp"
#include "helpers.hpp"

using namespace eprb;
using std::numbers::pi;

TEST(MaxDelay, Law) {
  EXPECT_DOUBLE_EQ(max_delay(0.3, 0, 2.0), 2.0);
  EXPECT_EQ(max_delay(0.0, 4, 1.0), 0.0);
  EXPECT_NEAR(max_delay(pi / 4, 4, 1.5), 1.5, 1e-15);
  EXPECT_NEAR(max_delay(0.2, 2, 1.0), std::pow(std::sin(0.4), 2), 1e-15);
}

TEST(RequireEvenD, RejectsOddAndNegative) {
  EXPECT_THROW(require_even_d(3), InvalidArgument);
  EXPECT_THROW(require_even_d(-2), InvalidArgument);
  EXPECT_NO_THROW(require_even_d(8));
  EXPECT_THROW(tpm_correlation_numeric(0.1, 5, 0.1), InvalidArgument);
}

TEST(CoincidenceWeight, Degenerate) {
  EXPECT_EQ(coincidence_weight(0, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(coincidence_weight(0, 2, 0.5), 0.25);
  EXPECT_DOUBLE_EQ(coincidence_weight(1, 1, 1), 1.0);
}

TEST(CoincidenceWeight, MatchesMonteCarlo) {
  RandomStream rng(61);
  const double cases[][3] = {{1.0, 1.0, 0.2}, {0.3, 1.7, 0.5}, {2.0, 0.1, 0.05}, {1.0, 0.6, 0.9}};
  for (const auto& c : cases) {
    const int n = 400000;
    int hit = 0;
    for (int i = 0; i < n; ++i)
      if (std::abs(rng.uniform() * c[0] - rng.uniform() * c[1]) <= c[2]) ++hit;
    EXPECT_NEAR(coincidence_weight(c[0], c[1], c[2]), static_cast<double>(hit) / n, test::stat_tol(n, 4) / 2);
  }
}

TEST(TpmAnalytic, ClosedForms) {
  for (double th : {0.0, 0.3, 1.0, 2.0}) {
    EXPECT_NEAR(tpm_correlation_analytic(th, 4, WRegime::w_to_zero), -std::cos(2 * th), 1e-14);
    EXPECT_NEAR(tpm_correlation_analytic(th, 0, WRegime::w_to_zero), -0.5 * std::cos(2 * th), 1e-14);
    EXPECT_NEAR(tpm_correlation_analytic(th, 6, WRegime::w_ge_T0), -0.5 * std::cos(2 * th), 1e-14);
    EXPECT_NEAR(tpm_correlation_analytic(th, 4, WRegime::w_to_zero, SourceMode::parallel), std::cos(2 * th), 1e-14);
  }
  EXPECT_NEAR(tpm_correlation_analytic(pi / 4, 2, WRegime::w_to_zero), 0.0, 1e-14);
  EXPECT_THROW(tpm_correlation_analytic(0.1, 10, WRegime::w_to_zero), InvalidArgument);
}

TEST(TpmAnalytic, DTwoContinuousAtZero) {
  const double at0 = tpm_correlation_analytic(0.0, 2, WRegime::w_to_zero);
  EXPECT_TRUE(std::isfinite(at0));
  EXPECT_NEAR(tpm_correlation_analytic(1e-7, 2, WRegime::w_to_zero), at0, 1e-6);
  EXPECT_NEAR(tpm_correlation_analytic(pi / 2 - 1e-7, 2, WRegime::w_to_zero),
              tpm_correlation_analytic(pi / 2, 2, WRegime::w_to_zero), 1e-6);
}

TEST(TpmNumeric, WideWindowHalvesAmplitude) {
  for (int d : {0, 2, 4, 8})
    for (double th : {0.0, 0.4, 1.3}) EXPECT_NEAR(tpm_correlation_numeric(th, d, 1.0), -0.5 * std::cos(2 * th), 1e-6);
}

// Convergence in W is slow near theta = 0, where both delays vanish together.
TEST(TpmNumeric, NarrowWindowApproachesCosine) {
  for (double th : {0.0, 0.3, pi / 6, 1.2}) {
    double prev = 2.0;
    for (double W : {1e-2, 1e-3, 1e-4, 1e-6}) {
      const double err = std::abs(tpm_correlation_numeric(th, 4, W) + std::cos(2 * th));
      EXPECT_LT(err, prev) << "theta=" << th << " W=" << W;
      prev = err;
    }
    EXPECT_LT(prev, 2e-3) << "theta=" << th;
    EXPECT_LT(std::abs(tpm_correlation_numeric(th, 4, 1e-4) + std::cos(2 * th)), 2e-2);
  }
}

TEST(TpmNumeric, ZeroWindowMatchesClosedForms) {
  for (int d : {2, 4, 6, 8})
    for (double th : {0.0, 0.3, 1.2})
      EXPECT_NEAR(tpm_correlation_numeric(th, d, 0.0), tpm_correlation_analytic(th, d, WRegime::w_to_zero), 1e-6)
          << "d=" << d << " theta=" << th;
}

TEST(TpmNumeric, OrthogonalSettingsGiveZero) {
  for (int d : {0, 2, 4, 6, 8})
    for (double W : {0.0, 1e-3, 0.3, 2.0}) EXPECT_NEAR(tpm_correlation_numeric(pi / 4, d, W), 0.0, 1e-8);
}

TEST(TpmNumeric, ParallelSourceFlipsSign) {
  EXPECT_NEAR(tpm_correlation_numeric(0.3, 4, 0.1, 1.0, SourceMode::parallel),
              -tpm_correlation_numeric(0.3, 4, 0.1, 1.0, SourceMode::anti), 1e-9);
}

TEST(LocalThresholdNumeric, WideWindow) {
  EXPECT_NEAR(local_threshold_correlation_numeric(0.5, 4, 1.0), -0.5 * std::cos(1.0), 1e-6);
}

namespace {

ConditionLabel photon_condition(double a_deg, double c_deg) {
  return Settings4::photon_degrees(a_deg, 0, c_deg, 0).condition(1);
}

}  // namespace

TEST(TimetagRaw, Deterministic) {
  const TimetagConfig cfg;
  RandomStream r1(62), r2(62);
  const auto a = timetag_raw(photon_condition(0, 30), 1000, cfg, r1);
  const auto b = timetag_raw(photon_condition(0, 30), 1000, cfg, r2);
  for (std::size_t k = 0; k < 1000; ++k) {
    ASSERT_EQ(a.left.events[k].t, b.left.events[k].t);
    ASSERT_EQ(a.right.events[k].x, b.right.events[k].x);
  }
}

TEST(TimetagRaw, SpinSettingsRejected) {
  RandomStream rng(63);
  const auto cond = Settings4::planar_spin_degrees(0, 0, 45, 45).condition(1);
  EXPECT_THROW(timetag_raw(cond, 10, {}, rng), InvalidArgument);
}

TEST(TimetagRaw, DelaysWithinBound) {
  RandomStream rng(64);
  TimetagConfig cfg;
  cfg.T0 = 2.5;
  const auto raw = timetag_raw(Settings4::photon_degrees(0, 45, 22.5, 67.5), 20000, cfg, rng);
  std::array<int, 4> hits{};
  for (std::size_t k = 0; k < raw.left.events.size(); ++k) {
    const auto& l = raw.left.events[k];
    ASSERT_GE(l.t, 0.0);
    ASSERT_LE(l.t, 2.5);
    ++hits[2 * l.r + raw.right.events[k].r];
  }
  for (int h : hits) EXPECT_NEAR(h, 5000, 400);
}

TEST(TimetagRaw, ConstantDelayLawAtDZero) {
  RandomStream rng(65);
  TimetagConfig cfg;
  cfg.d = 0;
  const auto raw = timetag_raw(photon_condition(0, 0), 100000, cfg, rng);
  double sum = 0;
  for (const auto& e : raw.left.events) sum += e.t;
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

// Single-station outcomes follow Malus' law, which averages to 1/2 over the
// uniformly distributed source polarization.
TEST(TimetagRaw, SingleStationUnbiased) {
  RandomStream rng(66);
  const std::size_t n = 200000;
  const auto raw = timetag_raw(photon_condition(10, 70), n, {}, rng);
  double plus = 0;
  for (const auto& e : raw.left.events) plus += e.x == 1;
  EXPECT_NEAR(plus / n, 0.5, test::stat_tol(n));
}

TEST(LocalThreshold, WideWindowKeepsEverything) {
  RandomStream rng(67);
  const std::size_t n = 400000;
  const auto d = local_threshold(photon_condition(0, 30), n, {}, 1.0, rng);
  EXPECT_EQ(d.size(), n);
  EXPECT_NEAR(summary(d).e12, -0.5 * std::cos(pi / 3), test::stat_tol(n));
}

// Equal settings do not give perfect anticorrelation: each station's outcome
// is drawn independently given the source polarization.
TEST(LocalThreshold, EqualSettingsMatchQuadrature) {
  RandomStream rng(68);
  const std::size_t n = 400000;
  for (double W : {0.05, 0.3, 1.0}) {
    const auto d = local_threshold(photon_condition(20, 20), n, {}, W, rng);
    EXPECT_NEAR(summary(d).e12, local_threshold_correlation_numeric(0.0, 4, W), test::stat_tol(d.size(), 4))
        << "W=" << W;
  }
}

TEST(LocalThreshold, NarrowWindowMatchesQuadrature) {
  RandomStream rng(69);
  TimetagConfig cfg;
  cfg.d = 2;
  const std::size_t n = 2000000;
  const auto d = local_threshold(photon_condition(0, 30), n, cfg, 1e-2, rng);
  const double want = local_threshold_correlation_numeric(pi / 6, 2, 1e-2);
  EXPECT_NEAR(summary(d).e12, want, test::stat_tol(d.size(), 4));
}

TEST(LocalThreshold, QuartetTruncatedEqual) {
  RandomStream rng(70);
  const auto q = local_threshold(Settings4::photon_degrees(0, 45, 22.5, 67.5), 200000, {}, 0.1, rng);
  for (int s = 0; s < 4; ++s) {
    EXPECT_EQ(q[s].size(), q[0].size());
    EXPECT_EQ(q[s].condition.s, s + 1);
  }
  EXPECT_GT(q[0].size(), 0u);
}

TEST(LocalThreshold, ZeroWindowKeepsNothing) {
  RandomStream rng(71);
  EXPECT_THROW(local_threshold(photon_condition(0, 30), 1000, {}, 0.0, rng), Error);
}
