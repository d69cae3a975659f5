// Copyright 2026 The nudgelab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include <boost/math/distributions/non_central_t.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "nudgelab/stats.h"
#include "oracles.h"

namespace nudgelab::stats {
namespace {

const std::vector<double> kXs = {1, 2, 3, 4, 5};
const std::vector<double> kYs = {2, 4, 6, 8, 10};

TEST(WelchTTest, MatchesHandComputation) {
  // Means 3 and 6, variances 2.5 and 10.
  const double vx = 2.5 / 5, vy = 10.0 / 5;
  const double t = (3.0 - 6.0) / std::sqrt(vx + vy);
  const double nu = (vx + vy) * (vx + vy) / (vx * vx / 4 + vy * vy / 4);
  const auto r = WelchTTest(kXs, kYs);
  EXPECT_NEAR(r.t_stat, t, 1e-12);
  EXPECT_NEAR(r.df, nu, 1e-12);
  EXPECT_NEAR(r.t_stat, -1.897, 1e-3);
  EXPECT_NEAR(r.df, 5.88, 1e-2);
  boost::math::students_t ref(nu);
  EXPECT_NEAR(r.p_value, 2 * boost::math::cdf(ref, t), 1e-9);
}

TEST(WelchTTest, IdenticalSamplesGiveZero) {
  const auto r = WelchTTest(kXs, kXs);
  EXPECT_EQ(r.t_stat, 0.0);
  EXPECT_NEAR(r.p_value, 1.0, 1e-12);
  EXPECT_FALSE(r.significant);
  EXPECT_FALSE(r.effect_size.has_value());
  EXPECT_FALSE(r.power.has_value());
}

TEST(WelchTTest, TenSigmaShiftIsHighlySignificant) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<double> xs(30), ys(30);
  for (auto& v : xs) v = n01(rng) + 10.0;
  for (auto& v : ys) v = n01(rng);
  const auto r = WelchTTest(xs, ys);
  EXPECT_LT(r.p_value, 1e-6);
  ASSERT_TRUE(r.effect_size && r.power);
  EXPECT_DOUBLE_EQ(*r.effect_size, r.t_stat);
  EXPECT_GT(*r.power, 0.999);
}

TEST(WelchTTest, RejectsDegenerateSamples) {
  const std::vector<double> one = {1.0};
  const std::vector<double> flat = {2.0, 2.0, 2.0};
  EXPECT_THROW(WelchTTest(one, kYs), InfeasibleError);
  EXPECT_THROW(WelchTTest(flat, flat), InfeasibleError);
  EXPECT_THROW(WelchTTest(kXs, kYs, 0.0), ConfigError);
}

TEST(WelchTTest, AntisymmetryAndDfBounds) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> size(2, 40);
  std::lognormal_distribution<double> scale(0.0, 1.0);
  for (int rep = 0; rep < 500; ++rep) {
    std::normal_distribution<double> a(0.0, scale(rng)), b(0.5, scale(rng));
    std::vector<double> xs(static_cast<std::size_t>(size(rng))), ys(static_cast<std::size_t>(size(rng)));
    for (auto& v : xs) v = a(rng);
    for (auto& v : ys) v = b(rng);
    const auto r = WelchTTest(xs, ys);
    const auto s = WelchTTest(ys, xs);
    EXPECT_DOUBLE_EQ(r.t_stat, -s.t_stat);
    EXPECT_DOUBLE_EQ(r.p_value, s.p_value);
    const double lo = static_cast<double>(std::min(xs.size(), ys.size())) - 1.0;
    const double hi = static_cast<double>(xs.size() + ys.size()) - 2.0;
    EXPECT_GE(r.df, lo - 1e-9);
    EXPECT_LE(r.df, hi + 1e-9);
    EXPECT_GE(r.p_value, 0.0);
    EXPECT_LE(r.p_value, 1.0);
    EXPECT_EQ(r.significant, r.p_value < 0.1);
    EXPECT_EQ(r.effect_size.has_value(), r.significant);
    EXPECT_LE(r.ci_low, r.mean_diff);
    EXPECT_GE(r.ci_high, r.mean_diff);
  }
}

TEST(WelchTTest, ConfidenceIntervalUsesAlpha) {
  const auto r = WelchTTest(kXs, kYs, 0.05);
  boost::math::students_t ref(r.df);
  const double q = boost::math::quantile(ref, 0.975);
  EXPECT_NEAR(r.ci_high - r.ci_low, 2 * q * r.std_error, 1e-9);
}

TEST(CohensD, FollowsTheStatedFormula) {
  EXPECT_NEAR(CohensD(kXs, kYs), WelchTTest(kXs, kYs).t_stat, 1e-12);
  EXPECT_NEAR(CohensD(kXs, kYs), -1.897, 1e-3);
  const std::vector<double> shifted = {0, 2, 4, 6, 8};  // mean 4, like {2, 3, 4, 5, 6}
  EXPECT_EQ(CohensD(shifted, std::vector<double>{2, 3, 4, 5, 6}), 0.0);
}

TEST(CohensD, ScaleInvariantOnlyUnderCommonScaling) {
  std::vector<double> x2, y2;
  for (double v : kXs) x2.push_back(2 * v);
  for (double v : kYs) y2.push_back(2 * v);
  EXPECT_NEAR(CohensD(x2, y2), CohensD(kXs, kYs), 1e-12);
  EXPECT_GT(std::fabs(CohensD(x2, kYs) - CohensD(kXs, kYs)), 0.1);
}

TEST(CohensD, ZeroDenominatorThrows) {
  const std::vector<double> flat = {1, 1, 1};
  EXPECT_THROW(CohensD(flat, flat), InfeasibleError);
}

TEST(StudentT, MatchesTableValues) {
  EXPECT_NEAR(StudentTCdf(2.228139, 10), 0.975, 1e-6);
  EXPECT_NEAR(StudentTQuantile(0.95, 30), 1.697261, 1e-6);
  EXPECT_NEAR(NormalQuantile(0.975), 1.959964, 1e-6);
  EXPECT_NEAR(NormalCdf(-1.644854), 0.05, 1e-6);
}

TEST(NoncentralT, AgreesWithReferenceCdf) {
  for (double df : {3.0, 10.0, 57.5}) {
    for (double ncp : {-2.0, 0.0, 0.7, 3.0}) {
      boost::math::non_central_t ref(df, ncp);
      for (double t : {-4.0, -1.0, 0.0, 0.5, 2.0, 5.0}) {
        EXPECT_NEAR(NoncentralTCdf(t, df, ncp), boost::math::cdf(ref, t), 1e-6)
            << "df=" << df << " ncp=" << ncp << " t=" << t;
      }
    }
  }
}

TEST(PowerNoncentralT, NullPowerEqualsAlpha) {
  for (double nu : {5.0, 30.0, 100.0}) {
    for (double alpha : {0.05, 0.1}) EXPECT_NEAR(PowerNoncentralT(0.0, nu, alpha), alpha, 1e-6);
  }
}

TEST(PowerNoncentralT, MatchesMonteCarlo) {
  const double q = StudentTQuantile(0.975, 30);
  const double mc = oracle::MonteCarloNoncentralPower(3.0, 30.0, q, 1000000, 17);
  const double p = PowerNoncentralT(3.0, 30.0, 0.05);
  EXPECT_NEAR(p, 0.84, 0.02);
  EXPECT_NEAR(p, mc, 0.003);
}

TEST(PowerNoncentralT, MonotoneAndSymmetricInDelta) {
  double prev = 0.0;
  for (double delta = 0.0; delta <= 6.0; delta += 0.25) {
    const double p = PowerNoncentralT(delta, 12.0, 0.1);
    EXPECT_GE(p, prev - 1e-9);
    EXPECT_NEAR(p, PowerNoncentralT(-delta, 12.0, 0.1), 1e-8);
    prev = p;
  }
}

TEST(PowerNoncentralT, RejectsBadArguments) {
  EXPECT_THROW(PowerNoncentralT(1.0, 0.0, 0.1), ConfigError);
  EXPECT_THROW(PowerNoncentralT(1.0, 5.0, 1.0), ConfigError);
}

}  // namespace
}  // namespace nudgelab::stats
