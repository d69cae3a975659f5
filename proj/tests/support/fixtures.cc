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


#include "fixtures.h"

#include <fstream>
#include <random>
#include <sstream>

namespace fixture {

namespace fs = std::filesystem;

nudgelab::PurchaseEvent Buy(const std::string& user, const std::string& item, nudgelab::Day day,
                            int quantity, double unit_price) {
  return nudgelab::MakePurchase(user, item, day, quantity, unit_price);
}

fs::path TempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("nudgelab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> LmmTerms(const LmmTruth& truth) {
  std::vector<std::string> terms = {"Intercept", "Baseline", "Group", "Nudged", "Week", "WeekGroup"};
  if (truth.with_noise_term) terms.push_back("Noise");
  return terms;
}

nudgelab::lmm::Panel MakeLmmPanel(int users, int weeks, const LmmTruth& truth, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> std_normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution half(0.5), nudge(0.6);

  const auto n = static_cast<Eigen::Index>(users) * weeks;
  std::vector<nudgelab::UserId> subjects;
  Eigen::VectorXd y(n), base(n), group(n), nudged(n), week(n), week_group(n), noise(n);
  Eigen::Index row = 0;
  std::vector<double> e(static_cast<std::size_t>(weeks));
  for (int u = 0; u < users; ++u) {
    const double y0 = unit(rng);
    const double x = half(rng) ? 1.0 : 0.0;
    const double u_i = truth.sigma_u * std_normal(rng);
    double mean_e = 0.0;
    for (auto& v : e) {
      v = truth.sigma_e * std_normal(rng);
      mean_e += v / weeks;
    }
    for (int w = 0; w < weeks; ++w, ++row) {
      subjects.push_back("u" + std::to_string(u));
      base(row) = y0;
      group(row) = x;
      nudged(row) = x * (nudge(rng) ? 1.0 : 0.0);
      week(row) = w + 1;
      week_group(row) = x * (w + 1);
      noise(row) = std_normal(rng);
      const double err = e[static_cast<std::size_t>(w)] - (truth.center_noise ? mean_e : 0.0);
      y(row) = truth.b0 + truth.b_base * y0 + truth.b_group * x + truth.b_nudged * nudged(row) +
               truth.b_week * week(row) + truth.b_week_group * week_group(row) +
               truth.noise_coef * noise(row) + u_i + err;
    }
  }
  nudgelab::lmm::Panel panel(subjects, y);
  panel.AddTerm("Intercept", Eigen::VectorXd::Ones(n));
  panel.AddTerm("Baseline", base);
  panel.AddTerm("Group", group);
  panel.AddTerm("Nudged", nudged);
  panel.AddTerm("Week", week);
  panel.AddTerm("WeekGroup", week_group);
  if (truth.with_noise_term) panel.AddTerm("Noise", noise);
  return panel;
}

LinearData MakeLinearData(const std::vector<double>& theta, bool intercept, int n, double sigma,
                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, sigma);
  const std::size_t d = theta.size() - (intercept ? 1 : 0);
  LinearData data;
  for (int i = 0; i < n; ++i) {
    std::vector<double> x(d);
    for (auto& v : x) v = unit(rng);
    double r = intercept ? theta[0] : 0.0;
    for (std::size_t k = 0; k < d; ++k) r += theta[k + (intercept ? 1 : 0)] * x[k];
    data.x.push_back(std::move(x));
    data.r.push_back(r + noise(rng));
  }
  return data;
}

}  // namespace fixture
