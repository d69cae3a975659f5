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


// Data builders shared by the unit and acceptance tests.

#ifndef NUDGELAB_TESTS_SUPPORT_FIXTURES_H_
#define NUDGELAB_TESTS_SUPPORT_FIXTURES_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nudgelab/bandit.h"
#include "nudgelab/lmm.h"
#include "nudgelab/logs.h"

namespace fixture {

nudgelab::PurchaseEvent Buy(const std::string& user, const std::string& item, nudgelab::Day day,
                            int quantity = 1, double unit_price = 1.0);

// Fresh, empty directory under the system temp dir.
std::filesystem::path TempDir(const std::string& name);

std::string ReadFile(const std::filesystem::path& path);

// Weekly random-intercept panel mirroring the impact model:
//   y = b0 + b_base * y0 + b_group * X + b_nudged * M + b_week * T
//       + b_week_group * X * T + noise_coef * Z + u_i + e_it
// with X ~ Bernoulli(0.5) per user, M = X * Bernoulli(0.6) per week,
// y0 ~ U(0, 1), T = 1..weeks and Z ~ N(0, 1) (added as term "Noise" when
// with_noise_term is set). When center_noise is set the errors are
// demeaned within each user, so the data carry no between-user variation
// beyond the fixed effects.
struct LmmTruth {
  double b0 = 50.0;
  double b_base = 100.0;
  double b_group = 0.0;
  double b_nudged = 15.0;
  double b_week = 0.5;
  double b_week_group = 0.0;
  double noise_coef = 0.0;
  double sigma_u = 10.0;
  double sigma_e = 20.0;
  bool with_noise_term = false;
  bool center_noise = false;
};

nudgelab::lmm::Panel MakeLmmPanel(int users, int weeks, const LmmTruth& truth, std::uint64_t seed);

// Term list of MakeLmmPanel in column order.
std::vector<std::string> LmmTerms(const LmmTruth& truth);

// n draws of (x, r) with x ~ U(0, 1)^d and r = theta' f(x) + N(0, sigma^2),
// f(x) = (1, x) when intercept is set.
struct LinearData {
  std::vector<std::vector<double>> x;
  std::vector<double> r;
};
LinearData MakeLinearData(const std::vector<double>& theta, bool intercept, int n, double sigma,
                          std::uint64_t seed);

}  // namespace fixture

#endif  // NUDGELAB_TESTS_SUPPORT_FIXTURES_H_
