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

#ifndef NUDGELAB_BANDIT_H_
#define NUDGELAB_BANDIT_H_

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nudgelab/common.h"
#include "nudgelab/rng.h"
#include "nudgelab/traits.h"

// K-armed Bayesian linear bandit. Each arm k models the reward as
//   r = f(x)' theta_k + eps,  eps ~ N(0, 1 / tau_k),
// with a Normal-Gamma prior on (theta_k, tau_k):
//   tau_k ~ Gamma(shape, rate),  theta_k | tau_k ~ N(mean, (tau_k * precision)^-1).
// f(x) is the trait vector, optionally prefixed with a constant 1.
namespace nudgelab::bandit {

struct Prior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd precision;
  double shape = 2.0;
  double rate = 1.0;

  // mean 0, identity precision, shape 2, rate 1.
  static Prior Default(int dim);
  // Throws ConfigError unless dimensions match, precision is symmetric
  // positive definite and shape, rate > 0.
  void Validate(int dim) const;
};

struct ArmPosterior {
  std::string label;
  Eigen::VectorXd mean;
  Eigen::MatrixXd precision;
  double shape = 0.0;
  double rate = 0.0;
  long n_obs = 0;
  Eigen::LLT<Eigen::MatrixXd> chol;  // of `precision`, refreshed on every update

  // x' precision^-1 x through the Cholesky factor.
  double QuadInverse(const Eigen::VectorXd& x) const;
};

class Model {
 public:
  // K >= 2 unique labels, n_traits >= 1.
  Model(std::vector<std::string> arm_labels, int n_traits, Prior prior, bool intercept = true);

  int n_arms() const { return static_cast<int>(arms_.size()); }
  int n_traits() const { return n_traits_; }
  int dim() const { return n_traits_ + (intercept_ ? 1 : 0); }
  bool intercept() const { return intercept_; }
  const Prior& prior() const { return prior_; }
  const ArmPosterior& arm(int k) const { return arms_.at(static_cast<std::size_t>(k)); }
  std::span<const ArmPosterior> arms() const { return arms_; }
  std::vector<std::string> labels() const;
  // -1 when absent.
  int ArmIndex(std::string_view label) const;

  // Conjugate update of one arm with one observation; the other arms are
  // untouched. Throws DataError on non-finite input.
  void Update(int arm, std::span<const double> traits, double reward);

  Eigen::VectorXd Features(std::span<const double> traits) const;

  // Versioned text snapshot; round trip is exact.
  void Save(std::ostream& out) const;
  static Model Load(std::istream& in);
  void SaveFile(const std::filesystem::path& path) const;
  static Model LoadFile(const std::filesystem::path& path);

 private:
  Model() = default;

  int n_traits_ = 0;
  bool intercept_ = true;
  Prior prior_;
  std::vector<ArmPosterior> arms_;
};

enum class SamplingMethod {
  kTwoStep,   // tau from its Gamma marginal, then theta | tau
  kStudentT,  // each score directly from its location-scale Student-t
};

SamplingMethod ParseSamplingMethod(std::string_view text);

struct Decision {
  UserId user_id;
  Day day = 0;
  int chosen_arm = 0;
  std::vector<double> sampled_scores;
  std::optional<std::vector<double>> assignment_probabilities;
};

// One posterior draw of every arm's expected reward at `traits`.
std::vector<double> SampleScores(const Model& model, std::span<const double> traits, Rng& rng,
                                 SamplingMethod method);

// Lowest index among maxima.
int ArgMax(std::span<const double> values);

Decision ThompsonSampleArm(const Model& model, const traits::ContextVector& context, Rng& rng,
                           SamplingMethod method = SamplingMethod::kTwoStep);

// argmax_k f' mean_k + alpha * sqrt(f' precision_k^-1 f * rate_k / shape_k).
Decision UcbSelect(const Model& model, const traits::ContextVector& context, double alpha);

struct MonteCarlo {
  int draws = 10000;
  SamplingMethod method = SamplingMethod::kTwoStep;
};
struct Softmax {
  double tau = 1.0;
};
using ProbabilityMethod = std::variant<MonteCarlo, Softmax>;

// Assignment probability of every arm at `traits`. Monte Carlo requires an
// rng and at least 1000 draws; softmax uses the posterior means.
std::vector<double> ArmProbability(const Model& model, std::span<const double> traits,
                                   const ProbabilityMethod& method, Rng* rng = nullptr);

// Analytic Jacobian of the softmax assignment probabilities with respect to
// the traits: entry (a, b) = p_a (m_ab - sum_k p_k m_kb) / tau, where m are
// posterior mean coefficients. Rows: arms, columns: traits.
Eigen::MatrixXd SoftmaxJacobian(const Model& model, std::span<const double> traits, double tau);

// S_lambda(v) = v * max(1 - lambda / |v|, 0).
double SoftThreshold(double v, double lambda);

enum class SensitivityCategory {
  kLargeNegative,
  kMediumNegative,
  kSmallNegative,
  kNegligible,
  kSmallPositive,
  kMediumPositive,
  kLargePositive,
};

std::string_view ToString(SensitivityCategory category);
// |s| < 0.05 negligible, < 0.35 small, < 0.70 medium, otherwise large.
SensitivityCategory Categorize(double normalized_score);

struct SensitivityEntry {
  std::string arm;
  std::string trait;
  double mean_derivative = 0.0;  // plain average of the Jacobian entry
  double soft_thresholded = 0.0;
  double normalized = 0.0;  // in [-1, 1]
  SensitivityCategory category = SensitivityCategory::kNegligible;
};

struct SensitivityReport {
  std::vector<std::string> arms;
  std::vector<std::string> traits;
  std::vector<SensitivityEntry> entries;  // arm-major

  const SensitivityEntry& at(std::size_t arm, std::size_t trait) const {
    return entries.at(arm * traits.size() + trait);
  }
};

// Soft-thresholded average sensitivity of every arm to every trait over a
// sample of contexts (at least two): each Jacobian entry is shrunk by
// lambda_factor times its standard deviation across the sample before
// averaging, and the averages are scaled by the largest magnitude.
SensitivityReport Sensitivity(const Model& model, std::span<const traits::ContextVector> contexts,
                              double lambda_factor = 0.2, double tau = 1.0);

struct BestArm {
  UserId user_id;
  int best_arm = 0;
  double confidence = 0.0;  // p(best) - p(second best)
  std::vector<double> probabilities;
};

std::vector<BestArm> BestArmConfidence(const Model& model,
                                       std::span<const traits::ContextVector> contexts,
                                       const MonteCarlo& method, Rng& rng);

// Decision log: user_id,day,arm,score_0..score_{K-1}. A score of -inf marks
// an arm that was unavailable for that user.
std::vector<std::string> DecisionHeader(int n_arms);
void WriteDecisions(const std::filesystem::path& path, std::span<const Decision> decisions,
                    std::span<const std::string> arm_labels);
std::vector<Decision> ReadDecisions(const std::filesystem::path& path,
                                    std::span<const std::string> arm_labels);

}  // namespace nudgelab::bandit

#endif  // NUDGELAB_BANDIT_H_
