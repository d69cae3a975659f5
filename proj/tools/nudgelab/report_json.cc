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


#include "report_json.h"

#include <cmath>
#include <fstream>
#include <limits>

#include "nudgelab/csv.h"

namespace nudgelab::cli {

using nlohmann::json;

namespace {

json Num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double Dbl(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw DataError("report.json: bad number " + s);
  }
  return j.get<double>();
}

json Vec(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(Num(v(i)));
  return out;
}

json Vec(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(Num(x));
  return out;
}

std::vector<double> DblVec(const json& j) {
  std::vector<double> out;
  for (const auto& x : j) out.push_back(Dbl(x));
  return out;
}

Eigen::VectorXd EigenVec(const json& j) {
  const auto v = DblVec(j);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json Opt(const std::optional<double>& v) { return v ? Num(*v) : json(nullptr); }

std::optional<double> OptDbl(const json& j) {
  if (j.is_null()) return std::nullopt;
  return Dbl(j);
}

json TTest(const stats::TTestResult& t) {
  return {{"t_stat", Num(t.t_stat)},      {"df", Num(t.df)},
          {"p_value", Num(t.p_value)},    {"alpha", Num(t.alpha)},
          {"significant", t.significant}, {"mean_diff", Num(t.mean_diff)},
          {"std_error", Num(t.std_error)}, {"ci_low", Num(t.ci_low)},
          {"ci_high", Num(t.ci_high)},    {"effect_size", Opt(t.effect_size)},
          {"power", Opt(t.power)}};
}

stats::TTestResult TTestFrom(const json& j) {
  stats::TTestResult t;
  t.t_stat = Dbl(j.at("t_stat"));
  t.df = Dbl(j.at("df"));
  t.p_value = Dbl(j.at("p_value"));
  t.alpha = Dbl(j.at("alpha"));
  t.significant = j.at("significant").get<bool>();
  t.mean_diff = Dbl(j.at("mean_diff"));
  t.std_error = Dbl(j.at("std_error"));
  t.ci_low = Dbl(j.at("ci_low"));
  t.ci_high = Dbl(j.at("ci_high"));
  t.effect_size = OptDbl(j.at("effect_size"));
  t.power = OptDbl(j.at("power"));
  return t;
}

json Tests(const std::vector<impact::DayTest>& tests) {
  json out = json::array();
  for (const auto& t : tests) {
    out.push_back({{"day", t.day}, {"test", t.test ? TTest(*t.test) : json(nullptr)}});
  }
  return out;
}

std::vector<impact::DayTest> TestsFrom(const json& j) {
  std::vector<impact::DayTest> out;
  for (const auto& e : j) {
    impact::DayTest t;
    t.day = e.at("day").get<Day>();
    if (!e.at("test").is_null()) t.test = TTestFrom(e.at("test"));
    out.push_back(std::move(t));
  }
  return out;
}

json Summary(const impact::TTestSummary& s) {
  return {{"n_days", s.n_days},
          {"n_significant", s.n_significant},
          {"pct_significant_days", Num(s.pct_significant_days)},
          {"largest_effect", Opt(s.largest_effect)},
          {"largest_power", Opt(s.largest_power)},
          {"average_effect", Opt(s.average_effect)},
          {"average_power", Opt(s.average_power)}};
}

impact::TTestSummary SummaryFrom(const json& j) {
  impact::TTestSummary s;
  s.n_days = j.at("n_days").get<std::size_t>();
  s.n_significant = j.at("n_significant").get<std::size_t>();
  s.pct_significant_days = Dbl(j.at("pct_significant_days"));
  s.largest_effect = OptDbl(j.at("largest_effect"));
  s.largest_power = OptDbl(j.at("largest_power"));
  s.average_effect = OptDbl(j.at("average_effect"));
  s.average_power = OptDbl(j.at("average_power"));
  return s;
}

json Series(const impact::SeriesReport& s) {
  return {{"daily", Tests(s.daily)},
          {"accumulated", Tests(s.accumulated)},
          {"daily_summary", Summary(s.daily_summary)},
          {"accumulated_summary", Summary(s.accumulated_summary)}};
}

impact::SeriesReport SeriesFrom(const json& j) {
  return {TestsFrom(j.at("daily")), TestsFrom(j.at("accumulated")),
          SummaryFrom(j.at("daily_summary")), SummaryFrom(j.at("accumulated_summary"))};
}

json Breakdown(const impact::SuccessBreakdown& b) {
  json shares = json::array();
  for (const auto& s : b.by_interaction) {
    shares.push_back({{"interaction", std::string(ToString(s.interaction))},
                      {"messages", s.messages},
                      {"successes", s.successes},
                      {"share_of_successes", Num(s.share_of_successes)},
                      {"success_rate", Num(s.success_rate)}});
  }
  return {{"scope", b.scope},
          {"messages", b.messages},
          {"successes", b.successes},
          {"overall_success_rate", Num(b.overall_success_rate)},
          {"by_interaction", shares}};
}

impact::SuccessBreakdown BreakdownFrom(const json& j) {
  impact::SuccessBreakdown b;
  b.scope = j.at("scope").get<std::string>();
  b.messages = j.at("messages").get<std::size_t>();
  b.successes = j.at("successes").get<std::size_t>();
  b.overall_success_rate = Dbl(j.at("overall_success_rate"));
  const auto& shares = j.at("by_interaction");
  if (shares.size() != b.by_interaction.size()) throw DataError("report.json: bad success shares");
  for (std::size_t i = 0; i < shares.size(); ++i) {
    auto& s = b.by_interaction[i];
    s.interaction = ParseInteraction(shares[i].at("interaction").get<std::string>());
    s.messages = shares[i].at("messages").get<std::size_t>();
    s.successes = shares[i].at("successes").get<std::size_t>();
    s.share_of_successes = Dbl(shares[i].at("share_of_successes"));
    s.success_rate = Dbl(shares[i].at("success_rate"));
  }
  return b;
}

json Success(const impact::SuccessAnalysis& s) {
  json parts = json::array();
  for (const auto& b : s.breakdowns) parts.push_back(Breakdown(b));
  return {{"overall", Breakdown(s.overall)}, {"breakdowns", parts}};
}

impact::SuccessAnalysis SuccessFrom(const json& j) {
  impact::SuccessAnalysis s;
  s.overall = BreakdownFrom(j.at("overall"));
  for (const auto& b : j.at("breakdowns")) s.breakdowns.push_back(BreakdownFrom(b));
  return s;
}

json FitJson(const lmm::Fit& f) {
  json cov = json::array();
  for (Eigen::Index r = 0; r < f.covariance.rows(); ++r) {
    cov.push_back(Vec(Eigen::VectorXd(f.covariance.row(r).transpose())));
  }
  return {{"terms", f.terms},
          {"coefficients", Vec(f.coefficients)},
          {"standard_errors", Vec(f.standard_errors)},
          {"p_values", Vec(f.p_values)},
          {"covariance", cov},
          {"sigma_u2", Num(f.sigma_u2)},
          {"sigma_e2", Num(f.sigma_e2)},
          {"gamma", Num(f.gamma)},
          {"loglik", Num(f.loglik)},
          {"converged", f.converged},
          {"reml", f.reml},
          {"n_obs", f.n_obs},
          {"n_groups", f.n_groups},
          {"loglik_trace", Vec(f.loglik_trace)}};
}

lmm::Fit FitFrom(const json& j) {
  lmm::Fit f;
  f.terms = j.at("terms").get<std::vector<std::string>>();
  f.coefficients = EigenVec(j.at("coefficients"));
  f.standard_errors = EigenVec(j.at("standard_errors"));
  f.p_values = EigenVec(j.at("p_values"));
  const auto& cov = j.at("covariance");
  const auto n = static_cast<Eigen::Index>(cov.size());
  f.covariance = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    f.covariance.row(r) = EigenVec(cov[static_cast<std::size_t>(r)]).transpose();
  }
  f.sigma_u2 = Dbl(j.at("sigma_u2"));
  f.sigma_e2 = Dbl(j.at("sigma_e2"));
  f.gamma = Dbl(j.at("gamma"));
  f.loglik = Dbl(j.at("loglik"));
  f.converged = j.at("converged").get<bool>();
  f.reml = j.at("reml").get<bool>();
  f.n_obs = j.at("n_obs").get<std::size_t>();
  f.n_groups = j.at("n_groups").get<std::size_t>();
  f.loglik_trace = DblVec(j.at("loglik_trace"));
  return f;
}

json Assignment(const impact::AssignmentMetrics& a) {
  json fractions = json::array();
  for (const auto& row : a.arm_fractions) fractions.push_back(Vec(row));
  json per_arm = json::array();
  for (const auto& p : a.per_nudge_arm) {
    per_arm.push_back({{"label", p.label},
                       {"avg_fraction", Num(p.avg_fraction)},
                       {"weeks_majority", p.weeks_majority}});
  }
  return {{"decision_days", a.decision_days},
          {"arm_labels", a.arm_labels},
          {"arm_fractions", fractions},
          {"nudged_fraction", Vec(a.nudged_fraction)},
          {"avg_fraction_nudged", Num(a.avg_fraction_nudged)},
          {"weeks_majority_nudged", a.weeks_majority_nudged},
          {"per_nudge_arm", per_arm}};
}

impact::AssignmentMetrics AssignmentFrom(const json& j) {
  impact::AssignmentMetrics a;
  a.decision_days = j.at("decision_days").get<std::vector<Day>>();
  a.arm_labels = j.at("arm_labels").get<std::vector<std::string>>();
  for (const auto& row : j.at("arm_fractions")) a.arm_fractions.push_back(DblVec(row));
  a.nudged_fraction = DblVec(j.at("nudged_fraction"));
  a.avg_fraction_nudged = Dbl(j.at("avg_fraction_nudged"));
  a.weeks_majority_nudged = j.at("weeks_majority_nudged").get<std::size_t>();
  for (const auto& p : j.at("per_nudge_arm")) {
    a.per_nudge_arm.push_back({p.at("label").get<std::string>(), Dbl(p.at("avg_fraction")),
                               p.at("weeks_majority").get<std::size_t>()});
  }
  return a;
}

bandit::SensitivityCategory ParseCategory(const std::string& text) {
  using C = bandit::SensitivityCategory;
  for (C c : {C::kLargeNegative, C::kMediumNegative, C::kSmallNegative, C::kNegligible,
              C::kSmallPositive, C::kMediumPositive, C::kLargePositive}) {
    if (bandit::ToString(c) == text) return c;
  }
  throw DataError("report.json: unknown sensitivity category " + text);
}

json SensitivityJson(const bandit::SensitivityReport& s) {
  json entries = json::array();
  for (const auto& e : s.entries) {
    entries.push_back({{"arm", e.arm},
                       {"trait", e.trait},
                       {"mean_derivative", Num(e.mean_derivative)},
                       {"soft_thresholded", Num(e.soft_thresholded)},
                       {"normalized", Num(e.normalized)},
                       {"category", std::string(bandit::ToString(e.category))}});
  }
  return {{"arms", s.arms}, {"traits", s.traits}, {"entries", entries}};
}

bandit::SensitivityReport SensitivityFrom(const json& j) {
  bandit::SensitivityReport s;
  s.arms = j.at("arms").get<std::vector<std::string>>();
  s.traits = j.at("traits").get<std::vector<std::string>>();
  for (const auto& e : j.at("entries")) {
    s.entries.push_back({e.at("arm").get<std::string>(), e.at("trait").get<std::string>(),
                         Dbl(e.at("mean_derivative")), Dbl(e.at("soft_thresholded")),
                         Dbl(e.at("normalized")), ParseCategory(e.at("category").get<std::string>())});
  }
  return s;
}

}  // namespace

json ReportToJson(const report::ImpactReport& r) {
  json comparisons = json::array();
  for (const auto& c : r.comparisons) {
    json strata = json::array();
    for (const auto& s : c.strata) {
      strata.push_back({{"stratum", s.stratum},
                        {"n_treated", s.n_treated},
                        {"n_control", s.n_control},
                        {"series", s.series ? Series(*s.series) : json(nullptr)}});
    }
    comparisons.push_back({{"name", c.name},
                           {"group", std::string(impact::ToString(c.group))},
                           {"n_treated", c.n_treated},
                           {"n_control", c.n_control},
                           {"series", c.series ? Series(*c.series) : json(nullptr)},
                           {"strata", strata},
                           {"success", c.success ? Success(*c.success) : json(nullptr)}});
  }
  json best = json::array();
  for (const auto& b : r.best_arms) {
    best.push_back({{"user_id", b.user_id},
                    {"best_arm", b.best_arm},
                    {"confidence", Num(b.confidence)},
                    {"probabilities", Vec(b.probabilities)}});
  }
  return {{"alpha", Num(r.alpha)},
          {"start_day", r.start_day},
          {"end_day", r.end_day},
          {"decision_days", r.decision_days},
          {"comparisons", comparisons},
          {"lmm_full", r.lmm_full ? FitJson(*r.lmm_full) : json(nullptr)},
          {"lmm_reduced", r.lmm_reduced ? FitJson(*r.lmm_reduced) : json(nullptr)},
          {"assignment", r.assignment ? Assignment(*r.assignment) : json(nullptr)},
          {"sensitivity", r.sensitivity ? SensitivityJson(*r.sensitivity) : json(nullptr)},
          {"best_arms", best},
          {"arm_labels", r.arm_labels},
          {"success", r.success ? Success(*r.success) : json(nullptr)},
          {"warnings", r.warnings}};
}

report::ImpactReport ReportFromJson(const json& j) {
  report::ImpactReport r;
  try {
    r.alpha = Dbl(j.at("alpha"));
    r.start_day = j.at("start_day").get<Day>();
    r.end_day = j.at("end_day").get<Day>();
    r.decision_days = j.at("decision_days").get<std::vector<Day>>();
    for (const auto& c : j.at("comparisons")) {
      report::Comparison cmp;
      cmp.name = c.at("name").get<std::string>();
      cmp.group = impact::ParseGroup(c.at("group").get<std::string>());
      cmp.n_treated = c.at("n_treated").get<std::size_t>();
      cmp.n_control = c.at("n_control").get<std::size_t>();
      if (!c.at("series").is_null()) cmp.series = SeriesFrom(c.at("series"));
      for (const auto& s : c.at("strata")) {
        impact::StratumReport sr;
        sr.stratum = s.at("stratum").get<std::string>();
        sr.n_treated = s.at("n_treated").get<std::size_t>();
        sr.n_control = s.at("n_control").get<std::size_t>();
        if (!s.at("series").is_null()) sr.series = SeriesFrom(s.at("series"));
        cmp.strata.push_back(std::move(sr));
      }
      if (!c.at("success").is_null()) cmp.success = SuccessFrom(c.at("success"));
      r.comparisons.push_back(std::move(cmp));
    }
    if (!j.at("lmm_full").is_null()) r.lmm_full = FitFrom(j.at("lmm_full"));
    if (!j.at("lmm_reduced").is_null()) r.lmm_reduced = FitFrom(j.at("lmm_reduced"));
    if (!j.at("assignment").is_null()) r.assignment = AssignmentFrom(j.at("assignment"));
    if (!j.at("sensitivity").is_null()) r.sensitivity = SensitivityFrom(j.at("sensitivity"));
    for (const auto& b : j.at("best_arms")) {
      r.best_arms.push_back({b.at("user_id").get<std::string>(), b.at("best_arm").get<int>(),
                             Dbl(b.at("confidence")), DblVec(b.at("probabilities"))});
    }
    r.arm_labels = j.at("arm_labels").get<std::vector<std::string>>();
    if (!j.at("success").is_null()) r.success = SuccessFrom(j.at("success"));
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw DataError(std::string("report.json: ") + e.what());
  }
  return r;
}

void WriteReportJson(const std::filesystem::path& path, const report::ImpactReport& report) {
  auto out = csv::OpenForWrite(path);
  out << ReportToJson(report).dump(2) << '\n';
}

report::ImpactReport ReadReportJson(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return ReportFromJson(j);
}

}  // namespace nudgelab::cli
