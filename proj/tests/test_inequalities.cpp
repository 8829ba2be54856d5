#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eprb/inequalities.hpp"
#include "eprb/random.hpp"

using namespace eprb;

TEST(Chsh, ExtremeQuartet) { EXPECT_DOUBLE_EQ(chsh_function({1, -1, 1, 1}), 4.0); }

TEST(Chsh, Zero) { EXPECT_DOUBLE_EQ(chsh_function({0, 0, 0, 0}), 0.0); }

TEST(Chsh, SingletQuartet) {
  const double r = 1 / std::numbers::sqrt2;
  EXPECT_NEAR(chsh_function({-r, r, -r, -r}), 2 * std::numbers::sqrt2, 1e-12);
}

TEST(ChshProperty, PermutationAndSignInvariance) {
  RandomStream rng(21);
  for (int trial = 0; trial < 2000; ++trial) {
    CorrelationQuartet c;
    for (double& v : c) v = rng.uniform(-1, 1);
    const double s = chsh_function(c);
    auto p = c;
    std::sort(p.begin(), p.end());
    do {
      ASSERT_NEAR(chsh_function(p), s, 1e-14);
    } while (std::next_permutation(p.begin(), p.end()));
    for (double& v : p) v = -v;
    ASSERT_NEAR(chsh_function(p), s, 1e-14);
  }
}

TEST(ModelFree, ImpossibleDeltaFlagged) {
  const auto r = model_free_check({-1, 1, -1, -1}, 1.0);
  EXPECT_DOUBLE_EQ(r.bound, 2.0);
  EXPECT_DOUBLE_EQ(r.lhs_minus, 4.0);
  EXPECT_FALSE(r.satisfied);
  EXPECT_FALSE(r.violations.empty());
}

TEST(ModelFree, DeltaZeroAlwaysSatisfied) {
  RandomStream rng(22);
  for (int trial = 0; trial < 1000; ++trial) {
    CorrelationQuartet c;
    for (double& v : c) v = rng.uniform(-1, 1);
    ASSERT_TRUE(model_free_check(c, 0.0).satisfied);
  }
}

TEST(ModelFree, SingletAtEquality) {
  const double r = 1 / std::numbers::sqrt2;
  const auto rep = model_free_check({-r, r, -r, -r}, 2 - std::numbers::sqrt2, 1e-12);
  EXPECT_NEAR(rep.bound, 2 * std::numbers::sqrt2, 1e-12);
  EXPECT_TRUE(rep.satisfied);
}

TEST(ModelFree, DeltaOutOfRangeThrows) {
  EXPECT_THROW(model_free_check({0, 0, 0, 0}, 1.5), InvalidArgument);
  EXPECT_THROW(model_free_check({0, 0, 0, 0}, -0.1), InvalidArgument);
}

TEST(BellTriple, BooleBoundary) { EXPECT_TRUE(bell_triple_check(0.7, -0.7, -0.4, 1.0)); }

TEST(BellTriple, BooleViolation) { EXPECT_FALSE(bell_triple_check(0.7, -0.7, 0.4, 1.0)); }

TEST(BellTriple, DeltaZeroAlwaysTrue) {
  RandomStream rng(23);
  for (int trial = 0; trial < 1000; ++trial)
    ASSERT_TRUE(bell_triple_check(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), 0.0));
}

TEST(TripleProperty, PairConditionsImplyEachOther) {
  RandomStream rng(24);
  int hits = 0;
  for (int trial = 0; trial < 100000; ++trial) {
    const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1), c = rng.uniform(-1, 1);
    const bool ab = std::abs(a + b) <= 1 + c && std::abs(a - b) <= 1 - c;
    if (!ab) continue;
    ++hits;
    ASSERT_LE(std::abs(a + c), 1 + b + 1e-12);
    ASSERT_LE(std::abs(a - c), 1 - b + 1e-12);
    ASSERT_LE(std::abs(b + c), 1 + a + 1e-12);
    ASSERT_LE(std::abs(b - c), 1 - a + 1e-12);
  }
  EXPECT_GT(hits, 1000);
}

TEST(Eberhard, GiustinaCounts) {
  const auto r = eberhard_counts({141439, 67941, 58742, 8392}, {875683790, 875518074, 875882007, 875700279});
  EXPECT_NEAR(r.j_over_n, 7.27e-6, 0.005e-6);
  EXPECT_NEAR(r.delta_upper, 0.99999273, 0.000000005);
  EXPECT_EQ(r.rescaled, (std::array<std::int64_t, 4>{141441, 67955, 58730, 8392}));
  EXPECT_EQ(r.J, 6364);
}

TEST(Eberhard, AllZero) {
  const auto r = eberhard_counts({0, 0, 0, 0}, {10, 20, 30, 40});
  EXPECT_EQ(r.j_over_n, 0.0);
  EXPECT_EQ(r.delta_upper, 1.0);
}

TEST(Eberhard, SmallHandExample) {
  const auto r = eberhard_counts({2, 1, 1, 0}, {4, 4, 4, 4});
  EXPECT_EQ(r.j_over_n, 0.0);
  EXPECT_EQ(r.delta_upper, 1.0);
}

TEST(Eberhard, ZeroTrialsThrows) { EXPECT_THROW(eberhard_counts({0, 0, 0, 0}, {0, 1, 1, 1}), InvalidArgument); }

namespace {

FrequencyTable table_from_probs(double pp, double pm, double mp, double mm, std::int64_t N) {
  FrequencyTable t;
  t.counts = {{{std::llround(pp * N), std::llround(pm * N)}, {std::llround(mp * N), std::llround(mm * N)}}};
  t.N = t.counts[0][0] + t.counts[0][1] + t.counts[1][0] + t.counts[1][1];
  return t;
}

}  // namespace

TEST(ChData, UniformTables) {
  const auto u = table_from_probs(0.25, 0.25, 0.25, 0.25, 4);
  EXPECT_DOUBLE_EQ(ch_data({u, u, u, u}, 1, 1), -0.5);
}

TEST(ChData, SingletAtChshAngles) {
  // Spin angles (0, 90, 45, 135): C = -cos of the angle between settings.
  const double angles[4] = {45, 135, 45, 45};
  std::array<FrequencyTable, 4> f;
  for (int s = 0; s < 4; ++s) {
    const double c = -std::cos(angles[s] * std::numbers::pi / 180);
    f[s] = table_from_probs((1 + c) / 4, (1 - c) / 4, (1 - c) / 4, (1 + c) / 4, 400000000);
  }
  EXPECT_NEAR(ch_data(f, 1, 1), -0.5 - 2 * std::numbers::sqrt2 / 4, 1e-8);
  EXPECT_NEAR(ch_data(f, 1, -1), -0.5 + 2 * std::numbers::sqrt2 / 4, 1e-8);
  const auto b = ch_bounds(2 - std::numbers::sqrt2);
  EXPECT_LT(b.lo, -0.5);
  EXPECT_NEAR(b.lo, -1 - (std::numbers::sqrt2 - 1) / 2, 1e-15);
}

TEST(BasicInequality, Extremes) {
  EXPECT_TRUE(basic_inequality_witness(1, 1, 1, -1));
  EXPECT_TRUE(basic_inequality_witness(0, 0, 0, 0));
}

TEST(BasicInequality, OutOfRangeThrows) { EXPECT_THROW(basic_inequality_witness(1.5, 0, 0, 0), InvalidArgument); }

TEST(BasicInequality, RandomSweep) {
  RandomStream rng(25);
  for (int trial = 0; trial < 100000; ++trial)
    ASSERT_TRUE(basic_inequality_witness(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)));
}
