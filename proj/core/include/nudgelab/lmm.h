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

#ifndef NUDGELAB_LMM_H_
#define NUDGELAB_LMM_H_

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nudgelab/common.h"

// Random-intercept linear mixed model
//   y_it = x_it' beta + u_i + e_it,  u_i ~ N(0, s_u^2),  e_it ~ N(0, s_e^2),
// fitted by maximum likelihood (or REML) with the variance ratio
// gamma = s_u^2 / s_e^2 profiled out and optimized in one dimension.
namespace nudgelab::lmm {

// Term names used by the weekly impact panel.
inline constexpr std::string_view kIntercept = "Intercept";
inline constexpr std::string_view kAdaptive = "Adaptive intervention";
inline constexpr std::string_view kNonAdaptive = "Non-adaptive intervention";
inline constexpr std::string_view kNudged = "Nudged that week";
inline constexpr std::string_view kNudgedPersonalized = "Nudged that week (personalized)";
inline constexpr std::string_view kNudgedRandom = "Nudged that week (random)";
inline constexpr std::string_view kPriorParticipant = "Previous experiment participant";
inline constexpr std::string_view kBaseline = "Baseline expenditure";
inline constexpr std::string_view kWeek = "Week number";
inline constexpr std::string_view kWeekInIntervention = "Week number in intervention";
inline constexpr std::string_view kWeekInAdaptive = "Week number in adaptive";
inline constexpr std::string_view kWeekInNonAdaptive = "Week number in non adaptive";

// Long-format data: one row per (subject, period).
class Panel {
 public:
  Panel() = default;
  Panel(std::vector<UserId> subjects, Eigen::VectorXd y);

  // Appends a named column; throws ConfigError on duplicates or length mismatch.
  void AddTerm(std::string name, Eigen::VectorXd column);

  std::size_t rows() const { return subjects_.size(); }
  const std::vector<UserId>& subjects() const { return subjects_; }
  const Eigen::VectorXd& y() const { return y_; }
  const std::vector<std::string>& term_names() const { return names_; }
  const Eigen::VectorXd& column(std::string_view name) const;
  bool has_term(std::string_view name) const;

  // The panel stacked `times` times; copy k > 0 gets subject ids suffixed
  // with "#k", so every row appears `times` times as independent subjects.
  Panel Repeated(int times) const;

 private:
  std::vector<UserId> subjects_;
  Eigen::VectorXd y_;
  std::vector<std::string> names_;
  std::vector<Eigen::VectorXd> columns_;
};

struct Options {
  bool reml = false;
  double gamma_max = 1e3;
  double tolerance = 1e-6;  // final golden-section bracket width
  int grid_points = 41;     // coarse log-spaced scan before refinement
  int max_iterations = 200;
};

struct Fit {
  std::vector<std::string> terms;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd standard_errors;
  Eigen::VectorXd p_values;  // Wald, standard normal reference
  Eigen::MatrixXd covariance;
  double sigma_u2 = 0.0;
  double sigma_e2 = 0.0;
  double gamma = 0.0;
  double loglik = 0.0;
  bool converged = false;
  bool reml = false;
  std::size_t n_obs = 0;
  std::size_t n_groups = 0;
  // Best profiled log-likelihood after each optimizer iteration.
  std::vector<double> loglik_trace;

  std::optional<std::size_t> index(std::string_view term) const;
  // Wald interval coef +/- z_{(1+level)/2} * se.
  std::pair<double, double> ConfidenceInterval(std::string_view term, double level) const;
};

double WaldPValue(double coef, double std_error);

// Fits the model with the selected fixed-effect terms (in the given order).
// Requires two or more subjects and periods and a full-rank design; throws
// InfeasibleError naming the collinear terms otherwise.
Fit FitLmm(const Panel& panel, std::span<const std::string> include_terms,
           const Options& options = {});

// Repeatedly drops the single term with the largest Wald p-value >= alpha
// and refits, until every remaining term has p < alpha.
Fit BackwardEliminate(const Panel& panel, std::span<const std::string> full_terms,
                      double alpha = 0.1, const Options& options = {});

// term,coef,stderr,pvalue
void WriteFitCsv(const std::filesystem::path& path, const Fit& fit);

}  // namespace nudgelab::lmm

#endif  // NUDGELAB_LMM_H_
