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

#include "nudgelab/lmm.h"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "nudgelab/csv.h"
#include "nudgelab/stats.h"

namespace nudgelab::lmm {

Panel::Panel(std::vector<UserId> subjects, Eigen::VectorXd y)
    : subjects_(std::move(subjects)), y_(std::move(y)) {
  if (static_cast<Eigen::Index>(subjects_.size()) != y_.size()) {
    throw ConfigError("panel subjects and responses differ in length");
  }
  if (!y_.allFinite()) throw DataError("non-finite response in panel");
}

void Panel::AddTerm(std::string name, Eigen::VectorXd column) {
  if (has_term(name)) throw ConfigError("duplicate panel term '" + name + "'");
  if (column.size() != y_.size()) throw ConfigError("panel term '" + name + "' has wrong length");
  if (!column.allFinite()) throw DataError("non-finite values in panel term '" + name + "'");
  names_.push_back(std::move(name));
  columns_.push_back(std::move(column));
}

bool Panel::has_term(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const Eigen::VectorXd& Panel::column(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw ConfigError("unknown panel term '" + std::string(name) + "'");
  return columns_[static_cast<std::size_t>(it - names_.begin())];
}

Panel Panel::Repeated(int times) const {
  if (times < 1) throw ConfigError("repeat count must be >= 1");
  const auto n = static_cast<Eigen::Index>(rows());
  std::vector<UserId> subjects;
  Eigen::VectorXd y(n * times);
  for (int k = 0; k < times; ++k) {
    for (const auto& s : subjects_) subjects.push_back(k == 0 ? s : s + "#" + std::to_string(k));
    y.segment(k * n, n) = y_;
  }
  Panel out(std::move(subjects), std::move(y));
  for (std::size_t c = 0; c < names_.size(); ++c) {
    Eigen::VectorXd col(n * times);
    for (int k = 0; k < times; ++k) col.segment(k * n, n) = columns_[c];
    out.AddTerm(names_[c], std::move(col));
  }
  return out;
}

std::optional<std::size_t> Fit::index(std::string_view term) const {
  auto it = std::find(terms.begin(), terms.end(), term);
  if (it == terms.end()) return std::nullopt;
  return static_cast<std::size_t>(it - terms.begin());
}

std::pair<double, double> Fit::ConfidenceInterval(std::string_view term, double level) const {
  const auto i = index(term);
  if (!i) throw ConfigError("term '" + std::string(term) + "' is not in the fit");
  const double z = stats::NormalQuantile(0.5 + level / 2.0);
  const auto k = static_cast<Eigen::Index>(*i);
  return {coefficients(k) - z * standard_errors(k), coefficients(k) + z * standard_errors(k)};
}

double WaldPValue(double coef, double std_error) {
  if (!(std_error > 0.0)) return coef == 0.0 ? 1.0 : 0.0;
  return std::erfc(std::abs(coef / std_error) / std::numbers::sqrt2);
}

namespace {

// Sufficient statistics for evaluating the profiled likelihood at any gamma.
class Profile {
 public:
  Profile(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<int>& group,
          int n_groups, bool reml)
      : reml_(reml), n_(static_cast<double>(y.size())), p_(static_cast<double>(x.cols())) {
    xtx_ = x.transpose() * x;
    xty_ = x.transpose() * y;
    yty_ = y.squaredNorm();
    sizes_ = Eigen::VectorXd::Zero(n_groups);
    xbar_ = Eigen::MatrixXd::Zero(n_groups, x.cols());
    ybar_ = Eigen::VectorXd::Zero(n_groups);
    for (Eigen::Index r = 0; r < y.size(); ++r) {
      const int g = group[static_cast<std::size_t>(r)];
      sizes_(g) += 1.0;
      xbar_.row(g) += x.row(r);
      ybar_(g) += y(r);
    }
    for (int g = 0; g < n_groups; ++g) {
      xbar_.row(g) /= sizes_(g);
      ybar_(g) /= sizes_(g);
    }
  }

  double LogLik(double gamma) const {
    // Quasi-demeaning by c_g = 1 - 1 / sqrt(1 + n_g gamma) whitens the
    // random-intercept covariance; its Gram correction per group has weight
    // n_g (2 c_g - c_g^2) = n_g^2 gamma / (1 + n_g gamma).
    const Eigen::ArrayXd ng = sizes_.array();
    const Eigen::VectorXd w = (ng * ng * gamma / (1.0 + ng * gamma)).matrix();
    const Eigen::MatrixXd a = xtx_ - xbar_.transpose() * w.asDiagonal() * xbar_;
    const Eigen::VectorXd b = xty_ - xbar_.transpose() * (w.array() * ybar_.array()).matrix();
    const double s = yty_ - (w.array() * ybar_.array().square()).sum();
    double rss = s;
    double logdet = 0.0;
    if (a.rows() > 0) {
      Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
      rss = s - b.dot(ldlt.solve(b));
      logdet = ldlt.vectorD().array().log().sum();
    }
    rss = std::max(rss, 1e-300);
    const double logdet_v = (1.0 + ng * gamma).log().sum();
    const double dof = reml_ ? n_ - p_ : n_;
    const double sigma2 = rss / dof;
    double ll = -0.5 * (dof * (std::log(2.0 * std::numbers::pi * sigma2) + 1.0) + logdet_v);
    if (reml_) ll -= 0.5 * logdet;
    return ll;
  }

 private:
  bool reml_;
  double n_;
  double p_;
  Eigen::MatrixXd xtx_;
  Eigen::VectorXd xty_;
  double yty_ = 0.0;
  Eigen::VectorXd sizes_;
  Eigen::MatrixXd xbar_;
  Eigen::VectorXd ybar_;
};

}  // namespace

Fit FitLmm(const Panel& panel, std::span<const std::string> include_terms, const Options& options) {
  if (!(options.gamma_max > 0.0) || !(options.tolerance > 0.0) || options.grid_points < 3) {
    throw ConfigError("invalid LMM optimizer options");
  }
  const auto n = static_cast<Eigen::Index>(panel.rows());
  const auto p = static_cast<Eigen::Index>(include_terms.size());

  std::map<UserId, int> group_index;
  std::vector<int> group(panel.rows());
  for (std::size_t r = 0; r < panel.rows(); ++r) {
    auto [it, inserted] =
        group_index.emplace(panel.subjects()[r], static_cast<int>(group_index.size()));
    group[r] = it->second;
  }
  const int n_groups = static_cast<int>(group_index.size());
  if (n_groups < 2) throw InfeasibleError("LMM needs at least two subjects");
  if (n <= n_groups) throw InfeasibleError("LMM needs at least two periods for some subject");
  if (n - p < 1) throw InfeasibleError("LMM has more terms than rows");

  Eigen::MatrixXd x(n, p);
  for (Eigen::Index c = 0; c < p; ++c) {
    x.col(c) = panel.column(include_terms[static_cast<std::size_t>(c)]);
  }
  if (p > 0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < p) {
      // Name every term that takes part in a linear dependency, i.e. has
      // weight in the null space of the design.
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinV);
      const Eigen::MatrixXd null_space = svd.matrixV().rightCols(p - qr.rank());
      std::string names;
      for (Eigen::Index c = 0; c < p; ++c) {
        if (null_space.row(c).norm() > 1e-8) {
          names += (names.empty() ? "" : ", ") + include_terms[static_cast<std::size_t>(c)];
        }
      }
      throw InfeasibleError("rank-deficient LMM design; collinear terms: " + names);
    }
  }
  const Eigen::VectorXd& y = panel.y();
  const Profile profile(x, y, group, n_groups, options.reml);

  Fit fit;
  fit.reml = options.reml;
  fit.n_obs = panel.rows();
  fit.n_groups = static_cast<std::size_t>(n_groups);

  // Coarse scan over {0} and a log grid up to gamma_max, then golden-section
  // refinement inside the bracket around the best grid point.
  const int m = options.grid_points;
  std::vector<double> grid(static_cast<std::size_t>(m));
  grid[0] = 0.0;
  for (int i = 1; i < m; ++i) {
    const double frac = static_cast<double>(i - 1) / (m - 2);
    grid[static_cast<std::size_t>(i)] = options.gamma_max * std::pow(10.0, -7.0 * (1.0 - frac));
  }
  double best_gamma = 0.0;
  double best_ll = -std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double ll = profile.LogLik(grid[i]);
    if (ll > best_ll) {
      best_ll = ll;
      best_gamma = grid[i];
      best_i = i;
    }
  }
  fit.loglik_trace.push_back(best_ll);

  double lo = grid[best_i == 0 ? 0 : best_i - 1];
  double hi = grid[std::min(best_i + 1, grid.size() - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = profile.LogLik(c);
  double fd = profile.LogLik(d);
  int iterations = 0;
  while (hi - lo >= options.tolerance && iterations < options.max_iterations) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = profile.LogLik(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = profile.LogLik(d);
    }
    for (auto [g, ll] : {std::pair{c, fc}, std::pair{d, fd}}) {
      if (ll > best_ll) {
        best_ll = ll;
        best_gamma = g;
      }
    }
    fit.loglik_trace.push_back(best_ll);
    ++iterations;
  }
  fit.converged = hi - lo < options.tolerance;
  fit.gamma = best_gamma;
  fit.loglik = best_ll;

  // Final GLS on the explicitly transformed data.
  std::vector<double> sizes(static_cast<std::size_t>(n_groups), 0.0);
  for (int g : group) sizes[static_cast<std::size_t>(g)] += 1.0;
  Eigen::MatrixXd xbar = Eigen::MatrixXd::Zero(n_groups, p);
  Eigen::VectorXd ybar = Eigen::VectorXd::Zero(n_groups);
  for (Eigen::Index r = 0; r < n; ++r) {
    xbar.row(group[static_cast<std::size_t>(r)]) += x.row(r);
    ybar(group[static_cast<std::size_t>(r)]) += y(r);
  }
  Eigen::MatrixXd xs = x;
  Eigen::VectorXd ys = y;
  for (Eigen::Index r = 0; r < n; ++r) {
    const int g = group[static_cast<std::size_t>(r)];
    const double ng = sizes[static_cast<std::size_t>(g)];
    const double shrink = 1.0 - 1.0 / std::sqrt(1.0 + ng * best_gamma);
    xs.row(r) -= shrink * xbar.row(g) / ng;
    ys(r) -= shrink * ybar(g) / ng;
  }
  fit.terms.assign(include_terms.begin(), include_terms.end());
  double rss = ys.squaredNorm();
  if (p > 0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xs);
    fit.coefficients = qr.solve(ys);
    rss = (ys - xs * fit.coefficients).squaredNorm();
  } else {
    fit.coefficients = Eigen::VectorXd(0);
  }
  const double dof = options.reml ? static_cast<double>(n - p) : static_cast<double>(n);
  fit.sigma_e2 = rss / dof;
  fit.sigma_u2 = best_gamma * fit.sigma_e2;
  if (p > 0) {
    const Eigen::MatrixXd gram = xs.transpose() * xs;
    fit.covariance = fit.sigma_e2 * gram.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  } else {
    fit.covariance = Eigen::MatrixXd(0, 0);
  }
  fit.standard_errors = fit.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  fit.p_values = Eigen::VectorXd(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    fit.p_values(k) = WaldPValue(fit.coefficients(k), fit.standard_errors(k));
  }
  return fit;
}

Fit BackwardEliminate(const Panel& panel, std::span<const std::string> full_terms, double alpha,
                      const Options& options) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  std::vector<std::string> terms(full_terms.begin(), full_terms.end());
  while (true) {
    Fit fit = FitLmm(panel, terms, options);
    if (terms.empty()) return fit;
    Eigen::Index worst = 0;
    for (Eigen::Index k = 1; k < fit.p_values.size(); ++k) {
      if (fit.p_values(k) > fit.p_values(worst)) worst = k;
    }
    if (fit.p_values(worst) < alpha) return fit;
    terms.erase(terms.begin() + worst);
  }
}

void WriteFitCsv(const std::filesystem::path& path, const Fit& fit) {
  auto out = csv::OpenForWrite(path);
  csv::Writer w(out);
  w.Row({"term", "coef", "stderr", "pvalue"});
  for (std::size_t k = 0; k < fit.terms.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    w.Row({fit.terms[k], csv::FormatDouble(fit.coefficients(i)),
           csv::FormatDouble(fit.standard_errors(i)), csv::FormatDouble(fit.p_values(i))});
  }
}

}  // namespace nudgelab::lmm
