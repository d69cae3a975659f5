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

#include "nudgelab/bandit.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "nudgelab/csv.h"

namespace nudgelab::bandit {

namespace {

constexpr std::string_view kSnapshotMagic = "nudgelab-bandit";
constexpr int kSnapshotVersion = 1;

bool AllFinite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

Prior Prior::Default(int dim) {
  Prior p;
  p.mean = Eigen::VectorXd::Zero(dim);
  p.precision = Eigen::MatrixXd::Identity(dim, dim);
  p.shape = 2.0;
  p.rate = 1.0;
  return p;
}

void Prior::Validate(int dim) const {
  if (mean.size() != dim || precision.rows() != dim || precision.cols() != dim) {
    throw ConfigError("prior dimension does not match the model dimension " +
                      std::to_string(dim));
  }
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate)) {
    throw ConfigError("prior shape and rate must be positive");
  }
  if (!mean.allFinite() || !precision.allFinite()) throw ConfigError("prior must be finite");
  if ((precision - precision.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw ConfigError("prior precision must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw ConfigError("prior precision must be positive definite");
}

double ArmPosterior::QuadInverse(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd half = chol.matrixL().solve(x);
  return half.squaredNorm();
}

Model::Model(std::vector<std::string> arm_labels, int n_traits, Prior prior, bool intercept)
    : n_traits_(n_traits), intercept_(intercept), prior_(std::move(prior)) {
  if (arm_labels.size() < 2) throw ConfigError("a bandit needs at least two arms");
  if (n_traits < 1) throw ConfigError("a bandit needs at least one trait");
  std::set<std::string> unique(arm_labels.begin(), arm_labels.end());
  if (unique.size() != arm_labels.size()) throw ConfigError("arm labels must be unique");
  prior_.Validate(dim());
  for (auto& label : arm_labels) {
    ArmPosterior arm;
    arm.label = std::move(label);
    arm.mean = prior_.mean;
    arm.precision = prior_.precision;
    arm.shape = prior_.shape;
    arm.rate = prior_.rate;
    arm.n_obs = 0;
    arm.chol.compute(arm.precision);
    arms_.push_back(std::move(arm));
  }
}

std::vector<std::string> Model::labels() const {
  std::vector<std::string> out;
  for (const auto& a : arms_) out.push_back(a.label);
  return out;
}

int Model::ArmIndex(std::string_view label) const {
  for (std::size_t k = 0; k < arms_.size(); ++k) {
    if (arms_[k].label == label) return static_cast<int>(k);
  }
  return -1;
}

Eigen::VectorXd Model::Features(std::span<const double> traits) const {
  if (static_cast<int>(traits.size()) != n_traits_) {
    throw DataError("context has " + std::to_string(traits.size()) + " traits, model expects " +
                    std::to_string(n_traits_));
  }
  Eigen::VectorXd f(dim());
  int offset = 0;
  if (intercept_) f(offset++) = 1.0;
  for (double v : traits) f(offset++) = v;
  return f;
}

void Model::Update(int arm, std::span<const double> traits, double reward) {
  if (arm < 0 || arm >= n_arms()) throw DataError("arm index out of range");
  if (!AllFinite(traits) || !std::isfinite(reward)) throw DataError("non-finite bandit update");
  ArmPosterior& a = arms_[static_cast<std::size_t>(arm)];
  const Eigen::VectorXd f = Features(traits);
  // Rank-one form of the Normal-Gamma update; avoids the cancellation in
  // b + (r^2 + m'Lm - m_n'L_n m_n) / 2.
  const Eigen::VectorXd gain = a.chol.solve(f);
  const double leverage = 1.0 + f.dot(gain);
  const double residual = reward - f.dot(a.mean);
  a.mean += gain * (residual / leverage);
  a.precision.noalias() += f * f.transpose();
  a.precision = 0.5 * (a.precision + a.precision.transpose());
  a.shape += 0.5;
  a.rate += 0.5 * residual * residual / leverage;
  a.n_obs += 1;
  a.chol.compute(a.precision);
  if (a.chol.info() != Eigen::Success) throw DataError("posterior precision lost definiteness");
}

void Model::Save(std::ostream& out) const {
  auto vec = [&out](const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << csv::FormatDouble(v(i));
    out << '\n';
  };
  auto mat = [&out](const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        out << (c ? " " : "") << csv::FormatDouble(m(r, c));
      }
      out << '\n';
    }
  };
  out << kSnapshotMagic << " v" << kSnapshotVersion << '\n';
  out << "arms " << arms_.size() << " traits " << n_traits_ << " intercept " << (intercept_ ? 1 : 0)
      << '\n';
  out << "prior " << csv::FormatDouble(prior_.shape) << ' ' << csv::FormatDouble(prior_.rate)
      << '\n';
  vec(prior_.mean);
  mat(prior_.precision);
  for (const auto& a : arms_) {
    out << "arm " << a.label << ' ' << a.n_obs << ' ' << csv::FormatDouble(a.shape) << ' '
        << csv::FormatDouble(a.rate) << '\n';
    vec(a.mean);
    mat(a.precision);
  }
}

namespace {

class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  std::string Word() {
    std::string w;
    if (!(in_ >> w)) throw DataError("truncated bandit snapshot");
    return w;
  }
  void Expect(std::string_view word) {
    if (Word() != word) throw DataError("malformed bandit snapshot, expected '" + std::string(word) + "'");
  }
  double Number() { return csv::ParseDouble(Word(), "bandit snapshot"); }
  long Integer() { return static_cast<long>(csv::ParseInt(Word(), "bandit snapshot")); }
  Eigen::VectorXd Vector(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = Number();
    return v;
  }
  Eigen::MatrixXd Matrix(int n) {
    Eigen::MatrixXd m(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) m(r, c) = Number();
    return m;
  }

 private:
  std::istream& in_;
};

}  // namespace

Model Model::Load(std::istream& in) {
  TokenReader r(in);
  r.Expect(kSnapshotMagic);
  if (r.Word() != "v" + std::to_string(kSnapshotVersion)) {
    throw DataError("unsupported bandit snapshot version");
  }
  r.Expect("arms");
  const long k = r.Integer();
  r.Expect("traits");
  const long n_traits = r.Integer();
  r.Expect("intercept");
  const long intercept = r.Integer();
  if (k < 2 || n_traits < 1 || (intercept != 0 && intercept != 1)) {
    throw DataError("invalid bandit snapshot header");
  }
  Model model;
  model.n_traits_ = static_cast<int>(n_traits);
  model.intercept_ = intercept == 1;
  const int d = model.dim();
  r.Expect("prior");
  model.prior_.shape = r.Number();
  model.prior_.rate = r.Number();
  model.prior_.mean = r.Vector(d);
  model.prior_.precision = r.Matrix(d);
  try {
    model.prior_.Validate(d);
  } catch (const ConfigError& e) {
    throw DataError(std::string("bandit snapshot: ") + e.what());
  }
  for (long i = 0; i < k; ++i) {
    r.Expect("arm");
    ArmPosterior a;
    a.label = r.Word();
    a.n_obs = r.Integer();
    a.shape = r.Number();
    a.rate = r.Number();
    a.mean = r.Vector(d);
    a.precision = r.Matrix(d);
    a.chol.compute(a.precision);
    if (a.chol.info() != Eigen::Success || !(a.shape > 0) || !(a.rate > 0)) {
      throw DataError("bandit snapshot arm " + a.label + " is not a valid posterior");
    }
    if (model.ArmIndex(a.label) >= 0) throw DataError("duplicate arm in bandit snapshot");
    model.arms_.push_back(std::move(a));
  }
  return model;
}

void Model::SaveFile(const std::filesystem::path& path) const {
  auto out = csv::OpenForWrite(path);
  Save(out);
}

Model Model::LoadFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return Load(in);
}

SamplingMethod ParseSamplingMethod(std::string_view text) {
  if (text == "two_step") return SamplingMethod::kTwoStep;
  if (text == "student_t") return SamplingMethod::kStudentT;
  throw ConfigError("unknown sampling method '" + std::string(text) + "'");
}

int ArgMax(std::span<const double> values) {
  int best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
  }
  return best;
}

std::vector<double> SampleScores(const Model& model, std::span<const double> traits, Rng& rng,
                                 SamplingMethod method) {
  const Eigen::VectorXd f = model.Features(traits);
  std::vector<double> scores(static_cast<std::size_t>(model.n_arms()));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k = 0; k < model.n_arms(); ++k) {
    const ArmPosterior& a = model.arm(k);
    if (method == SamplingMethod::kTwoStep) {
      std::gamma_distribution<double> gamma(a.shape, 1.0 / a.rate);
      const double tau = gamma(rng);
      Eigen::VectorXd z(f.size());
      for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
      // precision = L L', so L'^-1 z has covariance precision^-1.
      const Eigen::VectorXd theta = a.mean + a.chol.matrixU().solve(z) / std::sqrt(tau);
      scores[static_cast<std::size_t>(k)] = f.dot(theta);
    } else {
      std::student_t_distribution<double> student(2.0 * a.shape);
      const double scale = std::sqrt(a.rate / a.shape * a.QuadInverse(f));
      scores[static_cast<std::size_t>(k)] = f.dot(a.mean) + scale * student(rng);
    }
  }
  return scores;
}

Decision ThompsonSampleArm(const Model& model, const traits::ContextVector& context, Rng& rng,
                           SamplingMethod method) {
  Decision d;
  d.user_id = context.user_id;
  d.day = context.day;
  d.sampled_scores = SampleScores(model, context.values, rng, method);
  d.chosen_arm = ArgMax(d.sampled_scores);
  return d;
}

Decision UcbSelect(const Model& model, const traits::ContextVector& context, double alpha) {
  if (!(alpha >= 0.0)) throw ConfigError("UCB alpha must be non-negative");
  const Eigen::VectorXd f = model.Features(context.values);
  Decision d;
  d.user_id = context.user_id;
  d.day = context.day;
  for (const auto& a : model.arms()) {
    const double bonus = alpha == 0.0 ? 0.0 : alpha * std::sqrt(a.QuadInverse(f) * a.rate / a.shape);
    d.sampled_scores.push_back(f.dot(a.mean) + bonus);
  }
  d.chosen_arm = ArgMax(d.sampled_scores);
  return d;
}

namespace {

std::vector<double> SoftmaxOfMeans(const Model& model, const Eigen::VectorXd& f, double tau) {
  std::vector<double> p(static_cast<std::size_t>(model.n_arms()));
  double top = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < model.n_arms(); ++k) {
    p[static_cast<std::size_t>(k)] = f.dot(model.arm(k).mean) / tau;
    top = std::max(top, p[static_cast<std::size_t>(k)]);
  }
  double total = 0.0;
  for (double& v : p) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : p) v /= total;
  return p;
}

}  // namespace

std::vector<double> ArmProbability(const Model& model, std::span<const double> traits,
                                   const ProbabilityMethod& method, Rng* rng) {
  if (const auto* sm = std::get_if<Softmax>(&method)) {
    if (!(sm->tau > 0.0)) throw ConfigError("softmax temperature must be positive");
    return SoftmaxOfMeans(model, model.Features(traits), sm->tau);
  }
  const auto& mc = std::get<MonteCarlo>(method);
  if (mc.draws < 1000) throw ConfigError("Monte Carlo arm probabilities need >= 1000 draws");
  if (rng == nullptr) throw ConfigError("Monte Carlo arm probabilities need an rng");
  std::vector<double> counts(static_cast<std::size_t>(model.n_arms()), 0.0);
  for (int i = 0; i < mc.draws; ++i) {
    counts[static_cast<std::size_t>(ArgMax(SampleScores(model, traits, *rng, mc.method)))] += 1.0;
  }
  for (double& c : counts) c /= mc.draws;
  return counts;
}

Eigen::MatrixXd SoftmaxJacobian(const Model& model, std::span<const double> traits, double tau) {
  if (!(tau > 0.0)) throw ConfigError("softmax temperature must be positive");
  const Eigen::VectorXd f = model.Features(traits);
  const auto p = SoftmaxOfMeans(model, f, tau);
  const int offset = model.intercept() ? 1 : 0;
  Eigen::MatrixXd jac(model.n_arms(), model.n_traits());
  for (int b = 0; b < model.n_traits(); ++b) {
    double weighted = 0.0;
    for (int k = 0; k < model.n_arms(); ++k) {
      weighted += p[static_cast<std::size_t>(k)] * model.arm(k).mean(b + offset);
    }
    for (int a = 0; a < model.n_arms(); ++a) {
      jac(a, b) = p[static_cast<std::size_t>(a)] * (model.arm(a).mean(b + offset) - weighted) / tau;
    }
  }
  return jac;
}

double SoftThreshold(double v, double lambda) {
  if (v == 0.0) return 0.0;
  return v * std::max(1.0 - lambda / std::abs(v), 0.0);
}

std::string_view ToString(SensitivityCategory category) {
  switch (category) {
    case SensitivityCategory::kLargeNegative:
      return "large-";
    case SensitivityCategory::kMediumNegative:
      return "medium-";
    case SensitivityCategory::kSmallNegative:
      return "small-";
    case SensitivityCategory::kNegligible:
      return "negligible";
    case SensitivityCategory::kSmallPositive:
      return "small+";
    case SensitivityCategory::kMediumPositive:
      return "medium+";
    case SensitivityCategory::kLargePositive:
      return "large+";
  }
  return "negligible";
}

SensitivityCategory Categorize(double s) {
  const double m = std::abs(s);
  if (m < 0.05) return SensitivityCategory::kNegligible;
  if (m < 0.35) return s > 0 ? SensitivityCategory::kSmallPositive : SensitivityCategory::kSmallNegative;
  if (m < 0.70) {
    return s > 0 ? SensitivityCategory::kMediumPositive : SensitivityCategory::kMediumNegative;
  }
  return s > 0 ? SensitivityCategory::kLargePositive : SensitivityCategory::kLargeNegative;
}

SensitivityReport Sensitivity(const Model& model, std::span<const traits::ContextVector> contexts,
                              double lambda_factor, double tau) {
  if (contexts.size() < 2) {
    throw InfeasibleError("sensitivity needs at least two contexts to estimate a spread");
  }
  if (!(lambda_factor >= 0.0)) throw ConfigError("lambda factor must be non-negative");
  const int n_arms = model.n_arms();
  const int n_traits = model.n_traits();
  const auto n = static_cast<double>(contexts.size());

  std::vector<Eigen::MatrixXd> jacobians;
  jacobians.reserve(contexts.size());
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(n_arms, n_traits);
  for (const auto& c : contexts) {
    jacobians.push_back(SoftmaxJacobian(model, c.values, tau));
    mean += jacobians.back();
  }
  mean /= n;
  Eigen::MatrixXd spread = Eigen::MatrixXd::Zero(n_arms, n_traits);
  for (const auto& j : jacobians) spread += (j - mean).cwiseAbs2();
  spread = (spread / (n - 1.0)).cwiseSqrt();

  Eigen::MatrixXd shrunk = Eigen::MatrixXd::Zero(n_arms, n_traits);
  for (const auto& j : jacobians) {
    for (int a = 0; a < n_arms; ++a)
      for (int b = 0; b < n_traits; ++b) {
        shrunk(a, b) += SoftThreshold(j(a, b), lambda_factor * spread(a, b));
      }
  }
  shrunk /= n;
  const double scale = shrunk.cwiseAbs().maxCoeff();

  SensitivityReport report;
  report.arms = model.labels();
  report.traits = contexts.front().names ? *contexts.front().names : std::vector<std::string>{};
  if (report.traits.empty()) {
    for (int b = 0; b < n_traits; ++b) report.traits.push_back("trait_" + std::to_string(b));
  }
  for (int a = 0; a < n_arms; ++a)
    for (int b = 0; b < n_traits; ++b) {
      SensitivityEntry e;
      e.arm = report.arms[static_cast<std::size_t>(a)];
      e.trait = report.traits[static_cast<std::size_t>(b)];
      e.mean_derivative = mean(a, b);
      e.soft_thresholded = shrunk(a, b);
      e.normalized = scale > 0.0 ? shrunk(a, b) / scale : 0.0;
      e.category = Categorize(e.normalized);
      report.entries.push_back(std::move(e));
    }
  return report;
}

std::vector<BestArm> BestArmConfidence(const Model& model,
                                       std::span<const traits::ContextVector> contexts,
                                       const MonteCarlo& method, Rng& rng) {
  if (contexts.empty()) throw ConfigError("best-arm confidence needs at least one context");
  std::vector<BestArm> out;
  out.reserve(contexts.size());
  for (const auto& c : contexts) {
    BestArm b;
    b.user_id = c.user_id;
    b.probabilities = ArmProbability(model, c.values, method, &rng);
    b.best_arm = ArgMax(b.probabilities);
    double second = 0.0;
    for (std::size_t k = 0; k < b.probabilities.size(); ++k) {
      if (static_cast<int>(k) != b.best_arm) second = std::max(second, b.probabilities[k]);
    }
    b.confidence = b.probabilities[static_cast<std::size_t>(b.best_arm)] - second;
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<std::string> DecisionHeader(int n_arms) {
  std::vector<std::string> header = {"user_id", "day", "arm"};
  for (int k = 0; k < n_arms; ++k) header.push_back("score_" + std::to_string(k));
  return header;
}

void WriteDecisions(const std::filesystem::path& path, std::span<const Decision> decisions,
                    std::span<const std::string> arm_labels) {
  auto out = csv::OpenForWrite(path);
  csv::Writer w(out);
  w.Row(DecisionHeader(static_cast<int>(arm_labels.size())));
  for (const auto& d : decisions) {
    std::vector<std::string> row = {d.user_id, std::to_string(d.day),
                                    arm_labels[static_cast<std::size_t>(d.chosen_arm)]};
    for (double s : d.sampled_scores) row.push_back(csv::FormatDouble(s));
    w.Row(row);
  }
}

std::vector<Decision> ReadDecisions(const std::filesystem::path& path,
                                    std::span<const std::string> arm_labels) {
  const auto table =
      csv::Table::Read(path, DecisionHeader(static_cast<int>(arm_labels.size())));
  std::vector<Decision> decisions;
  for (const auto& f : table.rows()) {
    Decision d;
    d.user_id = f[0];
    d.day = csv::ParseInt(f[1], "day");
    auto it = std::find(arm_labels.begin(), arm_labels.end(), f[2]);
    if (it == arm_labels.end()) throw DataError(path.string() + ": unknown arm '" + f[2] + "'");
    d.chosen_arm = static_cast<int>(it - arm_labels.begin());
    for (std::size_t k = 3; k < f.size(); ++k) {
      d.sampled_scores.push_back(f[k] == "-inf" ? -std::numeric_limits<double>::infinity()
                                                : csv::ParseDouble(f[k], "score"));
    }
    decisions.push_back(std::move(d));
  }
  return decisions;
}

}  // namespace nudgelab::bandit
