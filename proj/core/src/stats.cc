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

#include "nudgelab/stats.h"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "nudgelab/common.h"

namespace nudgelab::stats {

SampleSummary Summarize(std::span<const double> xs) {
  SampleSummary s;
  s.n = xs.size();
  if (xs.empty()) return s;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  s.mean = mean;
  s.variance = xs.size() > 1 ? ss / static_cast<double>(xs.size() - 1) : 0.0;
  return s;
}

double NormalCdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double NormalQuantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

double StudentTCdf(double t, double df) {
  if (!(df > 0.0)) throw ConfigError("t distribution needs df > 0");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  return boost::math::cdf(boost::math::students_t_distribution<double>(df), t);
}

double StudentTQuantile(double p, double df) {
  if (!(df > 0.0)) throw ConfigError("t distribution needs df > 0");
  return boost::math::quantile(boost::math::students_t_distribution<double>(df), p);
}

double NoncentralTCdf(double t, double df, double ncp) {
  if (!(df > 0.0)) throw ConfigError("non-central t needs df > 0");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  if (ncp == 0.0) return StudentTCdf(t, df);
  const boost::math::chi_squared_distribution<double> chi2(df);
  // Mass outside [lo, hi] is below 2e-14.
  const double lo = boost::math::quantile(chi2, 1e-14);
  const double hi = boost::math::quantile(boost::math::complement(chi2, 1e-14));
  auto integrand = [&](double v) {
    if (v <= 0.0) return 0.0;
    return boost::math::pdf(chi2, v) * NormalCdf(t * std::sqrt(v / df) - ncp);
  };
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, lo, hi, 20, 1e-12, &error);
  return std::clamp(value, 0.0, 1.0);
}

double PowerNoncentralT(double delta, double nu, double alpha) {
  if (!(nu > 0.0)) throw ConfigError("power needs nu > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("power needs 0 < alpha < 1");
  const double critical = StudentTQuantile(1.0 - alpha / 2.0, nu);
  const double upper = 1.0 - NoncentralTCdf(critical, nu, delta);
  const double lower = NoncentralTCdf(-critical, nu, delta);
  return std::clamp(upper + lower, 0.0, 1.0);
}

namespace {

struct WelchParts {
  SampleSummary x;
  SampleSummary y;
  double std_error = 0.0;
};

WelchParts Prepare(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() < 2 || ys.size() < 2) {
    throw InfeasibleError("Welch t-test needs at least two observations per group");
  }
  WelchParts w{Summarize(xs), Summarize(ys), 0.0};
  const double se2 = w.x.variance / static_cast<double>(w.x.n) + w.y.variance / static_cast<double>(w.y.n);
  if (!(se2 > 0.0)) throw InfeasibleError("Welch t-test with zero variance in both groups");
  w.std_error = std::sqrt(se2);
  return w;
}

}  // namespace

double CohensD(std::span<const double> xs, std::span<const double> ys) {
  const WelchParts w = Prepare(xs, ys);
  return (w.x.mean - w.y.mean) / w.std_error;
}

TTestResult WelchTTest(std::span<const double> xs, std::span<const double> ys, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  const WelchParts w = Prepare(xs, ys);
  const double vx = w.x.variance / static_cast<double>(w.x.n);
  const double vy = w.y.variance / static_cast<double>(w.y.n);

  TTestResult r;
  r.alpha = alpha;
  r.mean_diff = w.x.mean - w.y.mean;
  r.std_error = w.std_error;
  r.t_stat = r.mean_diff / w.std_error;
  r.df = (vx + vy) * (vx + vy) /
         (vx * vx / static_cast<double>(w.x.n - 1) + vy * vy / static_cast<double>(w.y.n - 1));
  r.p_value = std::clamp(2.0 * StudentTCdf(-std::abs(r.t_stat), r.df), 0.0, 1.0);
  r.significant = r.p_value < alpha;
  const double half_width = StudentTQuantile(1.0 - alpha / 2.0, r.df) * w.std_error;
  r.ci_low = r.mean_diff - half_width;
  r.ci_high = r.mean_diff + half_width;
  if (r.significant) {
    r.effect_size = r.mean_diff / w.std_error;
    r.power = PowerNoncentralT(*r.effect_size, r.df, alpha);
  }
  return r;
}

}  // namespace nudgelab::stats
