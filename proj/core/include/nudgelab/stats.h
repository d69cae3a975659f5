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

#ifndef NUDGELAB_STATS_H_
#define NUDGELAB_STATS_H_

#include <cstddef>
#include <optional>
#include <span>

#include "nudgelab/common.h"

namespace nudgelab::stats {

struct SampleSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased (n - 1)
};

SampleSummary Summarize(std::span<const double> xs);

double NormalCdf(double z);
double NormalQuantile(double p);
double StudentTCdf(double t, double df);
double StudentTQuantile(double p, double df);

// P(T <= t) for T ~ t(df, ncp), integrating Phi(t sqrt(v / df) - ncp)
// against the chi-square(df) density by adaptive Gauss-Kronrod quadrature.
double NoncentralTCdf(double t, double df, double ncp);

// Two-sided power: P(T > q) + P(T < -q) with q the central t(nu) quantile
// at 1 - alpha / 2 and T ~ t(nu, delta). Requires nu > 0, 0 < alpha < 1.
double PowerNoncentralT(double delta, double nu, double alpha);

// Effect size (mean_x - mean_y) / sqrt(var_x / n_x + var_y / n_y). Note the
// denominator is the standard error of the mean difference, so the value
// equals the Welch t statistic. Throws InfeasibleError on a zero denominator.
double CohensD(std::span<const double> xs, std::span<const double> ys);

struct TTestResult {
  double t_stat = 0.0;
  double df = 0.0;
  double p_value = 1.0;
  double alpha = 0.1;
  bool significant = false;
  double mean_diff = 0.0;  // mean(xs) - mean(ys)
  double std_error = 0.0;
  double ci_low = 0.0;  // (1 - alpha) interval for mean_diff
  double ci_high = 0.0;
  // Present only when the null hypothesis is rejected.
  std::optional<double> effect_size;
  std::optional<double> power;
};

// Welch unequal-variance t-test of xs (treatment) against ys (control) with
// Welch-Satterthwaite degrees of freedom and a two-sided p-value. Requires
// two or more observations per sample and not both variances zero.
TTestResult WelchTTest(std::span<const double> xs, std::span<const double> ys, double alpha = 0.1);

}  // namespace nudgelab::stats

#endif  // NUDGELAB_STATS_H_
