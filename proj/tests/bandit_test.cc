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
#include <limits>
#include <numeric>
#include <sstream>

#include "fixtures.h"
#include "nudgelab/bandit.h"
#include "nudgelab/rng.h"
#include "oracles.h"

namespace nudgelab::bandit {
namespace {

Model Fresh(int k, int traits, bool intercept = true) {
  std::vector<std::string> labels;
  for (int i = 0; i < k; ++i) labels.push_back("arm" + std::to_string(i));
  return Model(labels, traits, Prior::Default(traits + (intercept ? 1 : 0)), intercept);
}

traits::ContextVector Ctx(std::vector<double> values, std::string user = "u") {
  traits::ContextVector c;
  c.user_id = std::move(user);
  c.values = std::move(values);
  return c;
}

// A posterior written directly as a snapshot: every arm has the given
// means, identity precision scaled by `precision`, shape 50 and rate 50.
Model Posterior(const std::vector<std::vector<double>>& means, double precision) {
  const auto d = means.at(0).size();
  std::ostringstream s;
  s << "nudgelab-bandit v1\narms " << means.size() << " traits " << d - 1 << " intercept 1\n";
  s << "prior 2 1\n";
  for (std::size_t i = 0; i < d; ++i) s << (i ? " " : "") << 0;
  s << '\n';
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) s << (c ? " " : "") << (r == c ? 1 : 0);
    s << '\n';
  }
  for (std::size_t k = 0; k < means.size(); ++k) {
    s << "arm a" << k << " 100 50 50\n";
    for (std::size_t i = 0; i < d; ++i) s << (i ? " " : "") << means[k][i];
    s << '\n';
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < d; ++c) s << (c ? " " : "") << (r == c ? precision : 0.0);
      s << '\n';
    }
  }
  std::istringstream in(s.str());
  return Model::Load(in);
}

void ExpectSamePosterior(const ArmPosterior& a, const ArmPosterior& b, double tol) {
  EXPECT_LE((a.mean - b.mean).cwiseAbs().maxCoeff(), tol);
  EXPECT_LE((a.precision - b.precision).cwiseAbs().maxCoeff(), tol);
  EXPECT_NEAR(a.shape, b.shape, tol);
  EXPECT_NEAR(a.rate, b.rate, tol);
  EXPECT_EQ(a.n_obs, b.n_obs);
}

TEST(Prior, DefaultIsValidAndInvalidOnesAreRejected) {
  auto p = Prior::Default(3);
  EXPECT_NO_THROW(p.Validate(3));
  EXPECT_EQ(p.mean, Eigen::VectorXd::Zero(3));
  EXPECT_EQ(p.precision, Eigen::MatrixXd::Identity(3, 3));
  EXPECT_EQ(p.shape, 2.0);
  EXPECT_EQ(p.rate, 1.0);
  EXPECT_THROW(p.Validate(4), ConfigError);
  auto bad = p;
  bad.shape = 0.0;
  EXPECT_THROW(bad.Validate(3), ConfigError);
  bad = p;
  bad.rate = -1.0;
  EXPECT_THROW(bad.Validate(3), ConfigError);
  bad = p;
  bad.precision(0, 1) = 5.0;
  EXPECT_THROW(bad.Validate(3), ConfigError);
  bad.precision(1, 0) = 5.0;  // symmetric but indefinite
  EXPECT_THROW(bad.Validate(3), ConfigError);
  EXPECT_THROW(Model({"a", "b"}, 2, bad), ConfigError);
}

TEST(Model, ArmsStartAtThePrior) {
  const auto m = Fresh(2, 2);
  EXPECT_EQ(m.n_arms(), 2);
  EXPECT_EQ(m.dim(), 3);
  for (const auto& a : m.arms()) {
    EXPECT_EQ(a.mean, m.prior().mean);
    EXPECT_EQ(a.precision, m.prior().precision);
    EXPECT_EQ(a.shape, m.prior().shape);
    EXPECT_EQ(a.rate, m.prior().rate);
    EXPECT_EQ(a.n_obs, 0);
  }
  EXPECT_THROW(Model({"only"}, 2, Prior::Default(3)), ConfigError);
  EXPECT_THROW(Model({"a", "a"}, 2, Prior::Default(3)), ConfigError);
  EXPECT_THROW(Model({"a", "b"}, 0, Prior::Default(1)), ConfigError);
  EXPECT_EQ(m.ArmIndex("arm1"), 1);
  EXPECT_EQ(m.ArmIndex("missing"), -1);
}

TEST(Model, UpdateTouchesOnlyOneArm) {
  auto m = Fresh(3, 2);
  const std::vector<double> x = {0.3, 0.7};
  m.Update(1, x, 2.0);
  EXPECT_EQ(m.arm(1).n_obs, 1);
  EXPECT_DOUBLE_EQ(m.arm(1).shape, 2.5);
  for (int k : {0, 2}) {
    EXPECT_EQ(m.arm(k).n_obs, 0);
    EXPECT_EQ(m.arm(k).mean, m.prior().mean);
  }
  const std::vector<double> nan_x = {std::nan(""), 0.0};
  EXPECT_THROW(m.Update(0, nan_x, 1.0), DataError);
  EXPECT_THROW(m.Update(0, x, std::numeric_limits<double>::infinity()), DataError);
  EXPECT_THROW(m.Update(0, std::vector<double>{1.0}, 1.0), DataError);
  EXPECT_THROW(m.Update(7, x, 1.0), DataError);
}

TEST(Model, MatchesBatchConjugateFormulas) {
  const auto data = fixture::MakeLinearData({1.0, -2.0, 0.5}, true, 200, 0.7, 5);
  auto m = Fresh(2, 2);
  for (std::size_t i = 0; i < data.r.size(); ++i) m.Update(0, data.x[i], data.r[i]);

  // Closed-form Normal-Gamma posterior after the whole batch.
  const auto n = static_cast<Eigen::Index>(data.r.size());
  Eigen::MatrixXd f(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    f.row(i) << 1.0, data.x[i][0], data.x[i][1];
    y(i) = data.r[i];
  }
  const Eigen::MatrixXd lambda = Eigen::MatrixXd::Identity(3, 3) + f.transpose() * f;
  const Eigen::VectorXd mu = lambda.ldlt().solve(f.transpose() * y);
  const double shape = 2.0 + n / 2.0;
  const double rate = 1.0 + 0.5 * (y.squaredNorm() - mu.dot(lambda * mu));
  EXPECT_LT((m.arm(0).mean - mu).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((m.arm(0).precision - lambda).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_DOUBLE_EQ(m.arm(0).shape, shape);
  EXPECT_NEAR(m.arm(0).rate, rate, 1e-8 * rate);
}

TEST(Model, UpdatesCommute) {
  const auto data = fixture::MakeLinearData({0.2, 1.0, -1.0, 3.0}, true, 50, 1.0, 9);
  auto forward = Fresh(2, 3);
  auto backward = Fresh(2, 3);
  for (std::size_t i = 0; i < 50; ++i) forward.Update(1, data.x[i], data.r[i]);
  for (std::size_t i = 50; i-- > 0;) backward.Update(1, data.x[i], data.r[i]);
  ExpectSamePosterior(forward.arm(1), backward.arm(1), 1e-8);
}

TEST(Model, PrecisionStaysPositiveDefinite) {
  auto m = Fresh(2, 4);
  const auto data = fixture::MakeLinearData({0, 1, 1, 1, 1}, true, 2000, 1.0, 2);
  for (std::size_t i = 0; i < data.r.size(); ++i) {
    m.Update(static_cast<int>(i % 2), data.x[i], data.r[i]);
    if (i % 250 == 0) {
      for (const auto& a : m.arms()) {
        EXPECT_LT((a.precision - a.precision.transpose()).cwiseAbs().maxCoeff(), 1e-9);
        Eigen::LLT<Eigen::MatrixXd> llt(a.precision);
        EXPECT_EQ(llt.info(), Eigen::Success);
        EXPECT_DOUBLE_EQ(a.shape, 2.0 + a.n_obs / 2.0);
      }
    }
  }
}

TEST(Model, PosteriorMeanApproachesLeastSquares) {
  const std::vector<double> theta = {0.5, 2.0, -1.0};
  const auto data = fixture::MakeLinearData(theta, true, 10000, 1.0, 21);
  auto m = Fresh(2, 2);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < data.r.size(); ++i) {
    m.Update(0, data.x[i], data.r[i]);
    rows.push_back({1.0, data.x[i][0], data.x[i][1]});
  }
  const auto ols = oracle::NormalEquations(rows, data.r);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(m.arm(0).mean(k), ols[static_cast<std::size_t>(k)], 0.05);
}

TEST(Model, SnapshotRoundTripIsExact) {
  auto m = Fresh(3, 2);
  const auto data = fixture::MakeLinearData({1, 2, 3}, true, 30, 0.3, 4);
  for (std::size_t i = 0; i < data.r.size(); ++i) m.Update(static_cast<int>(i % 3), data.x[i], data.r[i]);
  std::stringstream s;
  m.Save(s);
  const auto back = Model::Load(s);
  ASSERT_EQ(back.labels(), m.labels());
  for (int k = 0; k < 3; ++k) ExpectSamePosterior(back.arm(k), m.arm(k), 0.0);
  std::stringstream again;
  back.Save(again);
  std::stringstream first;
  m.Save(first);
  EXPECT_EQ(again.str(), first.str());

  std::istringstream wrong("nudgelab-bandit v9\n");
  EXPECT_THROW(Model::Load(wrong), DataError);
  std::istringstream truncated(first.str().substr(0, first.str().size() / 2));
  EXPECT_THROW(Model::Load(truncated), DataError);
}

TEST(Thompson, SymmetricPriorIsUniform) {
  const auto m = Fresh(3, 2);
  auto rng = MakeRng(1, "test");
  std::vector<int> counts(3, 0);
  const auto ctx = Ctx({0.4, 0.6});
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[static_cast<std::size_t>(ThompsonSampleArm(m, ctx, rng).chosen_arm)];
  for (int c : counts) EXPECT_NEAR(c / static_cast<double>(draws), 1.0 / 3.0, 0.01);
}

TEST(Thompson, ChosenArmIsArgmaxOfScores) {
  const auto m = Fresh(3, 1);
  auto rng = MakeRng(2, "test");
  for (int i = 0; i < 200; ++i) {
    const auto d = ThompsonSampleArm(m, Ctx({0.5}), rng, i % 2 ? SamplingMethod::kStudentT
                                                               : SamplingMethod::kTwoStep);
    ASSERT_EQ(d.sampled_scores.size(), 3u);
    EXPECT_EQ(d.chosen_arm, ArgMax(d.sampled_scores));
  }
  EXPECT_EQ(ArgMax(std::vector<double>{1.0, 3.0, 3.0}), 1);
}

TEST(Thompson, LearnsAClearlyBetterArm) {
  auto m = Fresh(2, 1);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 400; ++i) {
    const std::vector<double> x = {unit(rng)};
    m.Update(0, x, noise(rng));
    m.Update(1, x, 5.0 + noise(rng));
  }
  auto draw = MakeRng(3, "test");
  int wins = 0;
  for (int i = 0; i < 10000; ++i) wins += ThompsonSampleArm(m, Ctx({0.5}), draw).chosen_arm == 1;
  EXPECT_GT(wins / 10000.0, 0.99);
}

TEST(Thompson, TwoStepAndStudentTScoresAgree) {
  auto m = Fresh(2, 2);
  const auto data = fixture::MakeLinearData({1.0, 0.5, -0.5}, true, 40, 1.0, 6);
  for (std::size_t i = 0; i < data.r.size(); ++i) m.Update(0, data.x[i], data.r[i]);
  auto rng = MakeRng(4, "test");
  const std::vector<double> x = {0.2, 0.9};
  for (int arm : {0, 1}) {
    std::vector<double> two_step, student;
    for (int i = 0; i < 10000; ++i) {
      two_step.push_back(SampleScores(m, x, rng, SamplingMethod::kTwoStep)[static_cast<std::size_t>(arm)]);
      student.push_back(SampleScores(m, x, rng, SamplingMethod::kStudentT)[static_cast<std::size_t>(arm)]);
    }
    EXPECT_GT(oracle::KsTwoSample(two_step, student), 0.01) << "arm " << arm;
  }
}

TEST(Ucb, TiesGoToTheFirstArmAndAlphaZeroIsGreedy) {
  const auto m = Fresh(3, 2);
  EXPECT_EQ(UcbSelect(m, Ctx({0.1, 0.2}), 1.0).chosen_arm, 0);
  const auto p = Posterior({{0, 0, 0}, {1, 0, 0}, {0.5, 0, 0}}, 1.0);
  EXPECT_EQ(UcbSelect(p, Ctx({0.3, 0.3}), 0.0).chosen_arm, 1);
}

TEST(Ucb, UncertainArmWinsForLargeAlpha) {
  // Arm 0: mean 1, tight. Arm 1: mean 0.5, loose.
  auto m = Fresh(2, 1);
  for (int i = 0; i < 1000; ++i) m.Update(0, std::vector<double>{0.5}, 1.0);
  m.Update(1, std::vector<double>{0.5}, 0.5);
  const auto ctx = Ctx({0.5});
  EXPECT_EQ(UcbSelect(m, ctx, 0.0).chosen_arm, 0);
  const auto d = UcbSelect(m, ctx, 10.0);
  EXPECT_EQ(d.chosen_arm, 1);
  // Scores follow the stated formula.
  const Eigen::VectorXd f = m.Features(ctx.values);
  for (int k = 0; k < 2; ++k) {
    const auto& a = m.arm(k);
    const double var = f.dot(a.precision.ldlt().solve(f)) * a.rate / a.shape;
    EXPECT_NEAR(d.sampled_scores[static_cast<std::size_t>(k)], f.dot(a.mean) + 10.0 * std::sqrt(var), 1e-9);
  }
}

TEST(Ucb, GreedyChoiceInvariantToPositiveRewardScaling) {
  const auto data = fixture::MakeLinearData({0.3, 1.0}, true, 60, 1.0, 12);
  for (double c : {0.1, 1.0, 7.5}) {
    auto a = Fresh(3, 1), b = Fresh(3, 1);
    for (std::size_t i = 0; i < data.r.size(); ++i) {
      const int arm = static_cast<int>(i % 3);
      a.Update(arm, data.x[i], data.r[i] * (arm + 1));
      b.Update(arm, data.x[i], c * data.r[i] * (arm + 1));
    }
    for (double x : {0.0, 0.5, 1.0}) {
      EXPECT_EQ(UcbSelect(a, Ctx({x}), 0.0).chosen_arm, UcbSelect(b, Ctx({x}), 0.0).chosen_arm);
    }
  }
}

TEST(ArmProbability, SymmetricPriorGivesEqualShares) {
  const auto m = Fresh(4, 2);
  auto rng = MakeRng(5, "test");
  const std::vector<double> x = {0.5, 0.5};
  const auto mc = ArmProbability(m, x, MonteCarlo{40000, {}}, &rng);
  const auto sm = ArmProbability(m, x, Softmax{1.0});
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(mc[static_cast<std::size_t>(k)], 0.25, 0.01);
    EXPECT_NEAR(sm[static_cast<std::size_t>(k)], 0.25, 1e-12);
  }
  EXPECT_NEAR(std::accumulate(mc.begin(), mc.end(), 0.0), 1.0, 1e-9);
  EXPECT_THROW(ArmProbability(m, x, MonteCarlo{999, {}}, &rng), ConfigError);
  EXPECT_THROW(ArmProbability(m, x, Softmax{0.0}), ConfigError);
}

TEST(ArmProbability, SoftmaxConcentratesAsTemperatureFalls) {
  const auto m = Posterior({{0, 0}, {1, 0}, {0.5, 0}}, 1.0);
  double prev = 0.0;
  for (double tau : {1.0, 0.3, 0.1, 0.01}) {
    const double p = ArmProbability(m, std::vector<double>{0.0}, Softmax{tau})[1];
    EXPECT_GT(p, prev);
    prev = p;
  }
  EXPECT_GT(prev, 1.0 - 1e-12);
}

TEST(ArmProbability, MonteCarloMatchesThompsonFrequencies) {
  auto m = Fresh(3, 1);
  const auto data = fixture::MakeLinearData({0.0, 1.0}, true, 30, 1.0, 14);
  for (std::size_t i = 0; i < data.r.size(); ++i) {
    m.Update(static_cast<int>(i % 3), data.x[i], data.r[i] + 0.2 * static_cast<double>(i % 3));
  }
  const std::vector<double> x = {0.7};
  auto rng = MakeRng(6, "test");
  const auto p = ArmProbability(m, x, MonteCarlo{100000, {}}, &rng);
  std::vector<double> freq(3, 0.0);
  for (int i = 0; i < 100000; ++i) freq[static_cast<std::size_t>(ThompsonSampleArm(m, Ctx(x), rng).chosen_arm)] += 1e-5;
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(p[static_cast<std::size_t>(k)], freq[static_cast<std::size_t>(k)], 0.01);
}

TEST(SoftThreshold, ShrinksTowardZero) {
  for (double lambda : {0.0, 0.5, 2.0}) {
    for (double v = -4.0; v <= 4.0; v += 0.125) {
      const double s = SoftThreshold(v, lambda);
      if (std::fabs(v) <= lambda) {
        EXPECT_EQ(s, 0.0);
      } else {
        EXPECT_EQ(std::signbit(s), std::signbit(v));
        EXPECT_NEAR(std::fabs(s), std::fabs(v) - lambda, 1e-12);
      }
    }
  }
}

TEST(SoftmaxJacobian, MatchesFiniteDifferencesAndSumsToZero) {
  const auto m = Posterior({{0.1, 0.5, -1.0, 0.0}, {0.0, -0.3, 2.0, 0.2}, {0.2, 0.0, 0.0, 1.0}}, 1.0);
  const std::vector<double> x = {0.2, 0.4, 0.9};
  const double tau = 0.7;
  const auto jac = SoftmaxJacobian(m, x, tau);
  ASSERT_EQ(jac.rows(), 3);
  ASSERT_EQ(jac.cols(), 3);
  for (int b = 0; b < 3; ++b) {
    EXPECT_NEAR(jac.col(b).sum(), 0.0, 1e-12);
    auto hi = x, lo = x;
    hi[static_cast<std::size_t>(b)] += 1e-6;
    lo[static_cast<std::size_t>(b)] -= 1e-6;
    const auto ph = ArmProbability(m, hi, Softmax{tau});
    const auto pl = ArmProbability(m, lo, Softmax{tau});
    for (int a = 0; a < 3; ++a) {
      EXPECT_NEAR(jac(a, b), (ph[static_cast<std::size_t>(a)] - pl[static_cast<std::size_t>(a)]) / 2e-6, 1e-7);
    }
  }
}

std::vector<traits::ContextVector> RandomContexts(int n, int d, std::uint64_t seed,
                                                  int constant_trait = -1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<traits::ContextVector> out;
  for (int i = 0; i < n; ++i) {
    std::vector<double> v(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) v[static_cast<std::size_t>(k)] = k == constant_trait ? 0.5 : unit(rng);
    out.push_back(Ctx(v, "u" + std::to_string(i)));
  }
  return out;
}

TEST(Sensitivity, IsolatesTheOnlyLoadedTrait) {
  // Arm 1 loads +2 on trait 3 (index 2); everything else is zero.
  const auto m = Posterior({{0, 0, 0, 0, 0}, {0, 0, 0, 2, 0}}, 1.0);
  const auto contexts = RandomContexts(300, 4, 31);
  const auto r = Sensitivity(m, contexts, 0.2, 1.0);
  ASSERT_EQ(r.entries.size(), 8u);
  EXPECT_GT(r.at(1, 2).normalized, 0.0);
  EXPECT_NE(r.at(1, 2).category, SensitivityCategory::kNegligible);
  EXPECT_NEAR(std::fabs(r.at(1, 2).normalized), 1.0, 1e-12);
  EXPECT_LT(r.at(0, 2).normalized, 0.0);
  for (std::size_t arm = 0; arm < 2; ++arm) {
    for (std::size_t t : {0u, 1u, 3u}) EXPECT_EQ(r.at(arm, t).category, SensitivityCategory::kNegligible);
  }
}

TEST(Sensitivity, TwoArmEntriesCancel) {
  const auto m = Posterior({{0.3, 1, -1, 0.5}, {0, -0.5, 2, 0.1}}, 1.0);
  const auto contexts = RandomContexts(50, 3, 32);
  for (const auto& c : contexts) {
    const auto jac = SoftmaxJacobian(m, c.values, 1.0);
    for (int b = 0; b < 3; ++b) EXPECT_NEAR(jac(0, b) + jac(1, b), 0.0, 1e-9);
  }
  const auto r = Sensitivity(m, contexts);
  for (std::size_t t = 0; t < 3; ++t) {
    EXPECT_NEAR(r.at(0, t).mean_derivative + r.at(1, t).mean_derivative, 0.0, 1e-9);
  }
}

TEST(Sensitivity, ZeroCoefficientsAreNegligible) {
  const auto m = Posterior({{0, 0, 0}, {0, 0, 0}}, 1.0);
  const auto r = Sensitivity(m, RandomContexts(20, 2, 33, 0));
  for (const auto& e : r.entries) {
    EXPECT_EQ(e.mean_derivative, 0.0);
    EXPECT_EQ(e.normalized, 0.0);
    EXPECT_EQ(e.category, SensitivityCategory::kNegligible);
  }
  EXPECT_THROW(Sensitivity(m, RandomContexts(1, 2, 34)), InfeasibleError);
}

TEST(Sensitivity, SoftThresholdUsesTheSampleSpread) {
  const auto m = Posterior({{0, 0.4, -1.2}, {0.1, -0.8, 0.6}, {0, 0, 0}}, 1.0);
  const auto contexts = RandomContexts(40, 2, 35);
  const double lambda = 0.2;
  const auto r = Sensitivity(m, contexts, lambda, 1.0);
  // Recompute from the Jacobians; the spread is the sample standard deviation.
  double max_abs = 0.0;
  std::vector<double> shrunk;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 2; ++b) {
      std::vector<double> z;
      for (const auto& c : contexts) z.push_back(SoftmaxJacobian(m, c.values, 1.0)(a, b));
      const double mean = std::accumulate(z.begin(), z.end(), 0.0) / z.size();
      double var = 0.0;
      for (double v : z) var += (v - mean) * (v - mean);
      const double sd = std::sqrt(var / (z.size() - 1.0));
      double s = 0.0;
      for (double v : z) s += SoftThreshold(v, lambda * sd) / z.size();
      EXPECT_NEAR(r.at(static_cast<std::size_t>(a), static_cast<std::size_t>(b)).mean_derivative, mean, 1e-12);
      EXPECT_NEAR(r.at(static_cast<std::size_t>(a), static_cast<std::size_t>(b)).soft_thresholded, s, 1e-12);
      shrunk.push_back(s);
      max_abs = std::max(max_abs, std::fabs(s));
    }
  }
  for (std::size_t i = 0; i < shrunk.size(); ++i) {
    EXPECT_NEAR(r.entries[i].normalized, shrunk[i] / max_abs, 1e-12);
    EXPECT_EQ(r.entries[i].category, Categorize(r.entries[i].normalized));
  }
}

TEST(Categorize, UsesTheStatedCutPoints) {
  EXPECT_EQ(Categorize(0.0), SensitivityCategory::kNegligible);
  EXPECT_EQ(Categorize(0.0499), SensitivityCategory::kNegligible);
  EXPECT_EQ(Categorize(0.05), SensitivityCategory::kSmallPositive);
  EXPECT_EQ(Categorize(-0.3499), SensitivityCategory::kSmallNegative);
  EXPECT_EQ(Categorize(0.35), SensitivityCategory::kMediumPositive);
  EXPECT_EQ(Categorize(-0.6999), SensitivityCategory::kMediumNegative);
  EXPECT_EQ(Categorize(0.70), SensitivityCategory::kLargePositive);
  EXPECT_EQ(Categorize(-1.0), SensitivityCategory::kLargeNegative);
}

TEST(BestArmConfidence, TiesDominanceAndTwoArmIdentity) {
  auto rng = MakeRng(7, "test");
  const auto sym = Fresh(2, 1);
  const auto tie = BestArmConfidence(sym, std::vector{Ctx({0.5})}, MonteCarlo{20000, {}}, rng);
  EXPECT_NEAR(tie[0].confidence, 0.0, 0.03);

  const auto dominant = Posterior({{0, 0}, {2.33 * std::sqrt(2.0), 0}}, 1.0);
  const auto d = BestArmConfidence(dominant, std::vector{Ctx({0.0})}, MonteCarlo{50000, {}}, rng);
  EXPECT_EQ(d[0].best_arm, 1);
  EXPECT_NEAR(d[0].probabilities[1], 0.99, 0.005);
  EXPECT_NEAR(d[0].confidence, 0.98, 0.01);
  for (const auto& b : d) {
    EXPECT_NEAR(b.confidence, std::fabs(2 * b.probabilities[0] - 1), 1e-12);
    EXPECT_GE(b.confidence, 0.0);
    EXPECT_LE(b.confidence, 1.0);
  }
}

TEST(DecisionLog, RoundTripsIncludingUnavailableArms) {
  const auto dir = fixture::TempDir("decisions");
  const std::vector<std::string> labels = {"control", "personalized", "random"};
  std::vector<Decision> ds = {
      {"u1", 7, 1, {0.5, 1.25, -3.0}, std::nullopt},
      {"u2", 7, 2, {0.1, -std::numeric_limits<double>::infinity(), 0.2}, std::nullopt},
  };
  WriteDecisions(dir / "d.csv", ds, labels);
  EXPECT_EQ(fixture::ReadFile(dir / "d.csv").substr(0, 42),
            "user_id,day,arm,score_0,score_1,score_2\nu1");
  const auto back = ReadDecisions(dir / "d.csv", labels);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].chosen_arm, 2);
  EXPECT_EQ(back[0].sampled_scores, ds[0].sampled_scores);
  EXPECT_TRUE(std::isinf(back[1].sampled_scores[1]));
  EXPECT_THROW(ReadDecisions(dir / "d.csv", std::vector<std::string>{"control", "random"}), DataError);
}

}  // namespace
}  // namespace nudgelab::bandit
