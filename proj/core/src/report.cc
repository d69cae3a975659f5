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

#include "nudgelab/report.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "nudgelab/csv.h"
#include "nudgelab/rng.h"

namespace nudgelab::report {

Replay ReplayBandit(const BehaviorLogs& logs, const traits::UserAttributes* attributes,
                    std::span<const bandit::Decision> decisions,
                    std::span<const std::string> arm_labels, const traits::ContextSpec& context,
                    const std::optional<bandit::Prior>& prior, bool intercept, Day data_end) {
  const int n_traits = static_cast<int>(context.size());
  const int dim = n_traits + (intercept ? 1 : 0);
  Replay replay{bandit::Model({arm_labels.begin(), arm_labels.end()}, n_traits,
                              prior ? *prior : bandit::Prior::Default(dim), intercept),
                {}, 0, 0.0};
  std::map<Day, std::vector<const bandit::Decision*>> by_day;
  for (const auto& d : decisions) by_day[d.day].push_back(&d);
  const traits::TraitSources sources{logs, attributes};
  for (const auto& [day, list] : by_day) {
    std::vector<UserId> cohort;
    for (const auto* d : list) cohort.push_back(d->user_id);
    std::sort(cohort.begin(), cohort.end());
    cohort.erase(std::unique(cohort.begin(), cohort.end()), cohort.end());
    auto contexts = traits::ComputeContexts(sources, cohort, day, context);
    if (day + 7 <= data_end) {
      for (const auto* d : list) {
        const auto pos = std::lower_bound(cohort.begin(), cohort.end(), d->user_id) - cohort.begin();
        const double r = traits::ComputeReward(logs.purchases, d->user_id, day).reward;
        replay.model.Update(d->chosen_arm, contexts[static_cast<std::size_t>(pos)].values, r);
        replay.total_reward += r;
        ++replay.n_updates;
      }
    }
    replay.last_contexts = std::move(contexts);
  }
  return replay;
}

namespace {

std::vector<Day> ResolveDecisionDays(const AnalysisInputs& in) {
  std::set<Day> days(in.decision_days.begin(), in.decision_days.end());
  if (days.empty() && in.decisions) {
    for (const auto& d : *in.decisions) days.insert(d.day);
  }
  if (days.empty() && in.nudges) {
    for (const auto& n : *in.nudges) days.insert(n.day);
  }
  if (days.empty()) {
    for (Day d = in.start_day; d + 7 <= in.end_day; d += 7) days.insert(d);
  }
  return {days.begin(), days.end()};
}

std::string Pct(double fraction, int decimals) {
  return csv::FormatFixed(100.0 * fraction, decimals) + "%";
}

std::string ShortArm(std::string_view label) {
  if (label == "personalized") return "per";
  if (label == "random") return "ran";
  return std::string(label);
}

}  // namespace

ImpactReport Analyze(const AnalysisInputs& in, const AnalysisOptions& options) {
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (in.end_day < in.start_day) throw ConfigError("analysis end_day precedes start_day");
  BehaviorLogs logs{PurchaseLog(in.purchases), LoginLog(in.logins),
                    NudgeLog(in.nudges ? *in.nudges : std::vector<NudgeEvent>{})};
  ImpactReport report;
  report.alpha = options.alpha;
  report.start_day = in.start_day;
  report.end_day = in.end_day;
  report.decision_days = ResolveDecisionDays(in);
  report.arm_labels = in.arm_labels;

  std::vector<UserId> participants;
  for (const auto& [user, p] : in.groups) participants.push_back(user);
  const auto control = impact::UsersIn(in.groups, {impact::Group::kPureControl});
  const auto panel =
      impact::DailyPanel::FromPurchases(logs.purchases, participants, in.start_day, in.end_day);
  const auto strata =
      impact::SpendingStrata(logs.purchases, participants, in.start_day, options.baseline_days);

  for (auto group : {impact::Group::kAdaptive, impact::Group::kNonAdaptive}) {
    const auto treated = impact::UsersIn(in.groups, {group});
    if (treated.empty()) continue;
    Comparison c;
    c.name = group == impact::Group::kAdaptive ? "Adaptive intervention" : "Non-adaptive intervention";
    c.group = group;
    c.n_treated = treated.size();
    c.n_control = control.size();
    if (treated.size() >= 2 && control.size() >= 2) {
      c.series = impact::DailySeriesTests(panel, treated, control, options.alpha);
      c.strata = impact::StratifiedTests(panel, treated, control, strata, options.alpha);
    } else {
      report.warnings.push_back(c.name + ": fewer than two users per group, t-tests skipped");
    }
    if (in.nudges) {
      std::vector<NudgeEvent> mine;
      for (const auto& n : *in.nudges) {
        if (std::binary_search(treated.begin(), treated.end(), n.user_id)) mine.push_back(n);
      }
      c.success = impact::AnalyzeSuccess(mine, logs.purchases, in.end_day + 1);
    }
    report.comparisons.push_back(std::move(c));
  }

  std::vector<Day> lmm_days;
  for (Day d : report.decision_days) {
    if (d + 7 <= in.end_day) lmm_days.push_back(d);
  }
  try {
    const auto weekly = impact::BuildWeeklyPanel(logs.purchases, logs.nudges, in.groups, lmm_days,
                                                 options.baseline_days);
    report.lmm_full = lmm::FitLmm(weekly.panel, weekly.full_terms, options.lmm);
    report.lmm_reduced =
        lmm::BackwardEliminate(weekly.panel, weekly.full_terms, options.alpha, options.lmm);
  } catch (const InfeasibleError& e) {
    report.warnings.push_back(std::string("LMM skipped: ") + e.what());
  }

  if (in.decisions && !in.decisions->empty()) {
    std::vector<std::string> nudge_arms;
    for (const auto& label : in.arm_labels) {
      if (label != ToString(ArmLabel::kControl)) nudge_arms.push_back(label);
    }
    report.assignment = impact::ComputeAssignmentMetrics(*in.decisions, in.arm_labels, nudge_arms);
    if (options.context.size() > 0) {
      const auto replay = ReplayBandit(logs, &in.attributes, *in.decisions, in.arm_labels,
                                       options.context, options.prior, options.intercept,
                                       in.end_day);
      try {
        report.sensitivity = bandit::Sensitivity(replay.model, replay.last_contexts,
                                                 options.lambda_factor, options.tau);
      } catch (const InfeasibleError& e) {
        report.warnings.push_back(std::string("sensitivity skipped: ") + e.what());
      }
      auto rng = MakeRng(options.seed, "best_arm");
      report.best_arms = bandit::BestArmConfidence(
          replay.model, replay.last_contexts, bandit::MonteCarlo{options.best_arm_draws, {}}, rng);
    } else {
      report.warnings.push_back("no context traits configured: sensitivity skipped");
    }
  }

  if (in.nudges) {
    report.success = impact::AnalyzeSuccess(*in.nudges, logs.purchases, in.end_day + 1, &in.groups);
  } else {
    report.warnings.push_back("nudge log missing: success analysis skipped");
  }
  return report;
}

std::vector<std::vector<std::string>> SummaryCells(const ImpactReport& report) {
  std::vector<std::vector<std::string>> rows(kSummaryRows.size());
  auto coef = [](const std::optional<lmm::Fit>& fit, std::string_view term) -> std::string {
    if (!fit) return "-";
    const auto i = fit->index(term);
    if (!i) return "-";
    return csv::FormatFixed(fit->coefficients(static_cast<Eigen::Index>(*i)), 2);
  };
  std::string nudged;
  if (report.lmm_full && report.lmm_full->index(lmm::kNudgedPersonalized)) {
    nudged = coef(report.lmm_reduced, lmm::kNudgedPersonalized) + " per / " +
             coef(report.lmm_reduced, lmm::kNudgedRandom) + " ran";
  } else {
    nudged = coef(report.lmm_reduced, lmm::kNudged);
  }
  const std::string baseline = coef(report.lmm_reduced, lmm::kBaseline);

  for (const auto& c : report.comparisons) {
    const auto* s = c.series ? &c.series->accumulated_summary : nullptr;
    auto opt = [](const std::optional<double>& v) {
      return v ? csv::FormatFixed(*v, 2) : std::string("-");
    };
    rows[0].push_back(s ? csv::FormatFixed(s->pct_significant_days, 0) + "%" : "-");
    rows[1].push_back(s ? opt(s->largest_effect) : "-");
    rows[2].push_back(s ? opt(s->largest_power) : "-");
    rows[3].push_back(s ? opt(s->average_effect) : "-");
    rows[4].push_back(s ? opt(s->average_power) : "-");
    rows[5].push_back(nudged);
    rows[6].push_back(baseline);

    const bool bandit_column = c.group == impact::Group::kAdaptive && report.assignment;
    if (bandit_column) {
      const auto& m = *report.assignment;
      if (m.per_nudge_arm.size() > 1) {
        std::string assigned;
        std::string majority;
        for (const auto& arm : m.per_nudge_arm) {
          const std::string sep = assigned.empty() ? "" : " / ";
          assigned += sep + Pct(arm.avg_fraction, 1) + " " + ShortArm(arm.label);
          majority += sep + std::to_string(arm.weeks_majority) + "/" +
                      std::to_string(m.n_weeks()) + " " + ShortArm(arm.label);
        }
        rows[7].push_back(assigned);
        rows[8].push_back(majority);
      } else {
        rows[7].push_back(Pct(m.avg_fraction_nudged, 1));
        rows[8].push_back(m.MajorityLabel());
      }
    } else {
      rows[7].push_back("");
      rows[8].push_back("");
    }

    if (c.success && c.success->overall.messages > 0) {
      std::string cell = Pct(c.success->overall.overall_success_rate, 1);
      std::vector<std::string> parts;
      for (const auto& b : c.success->breakdowns) {
        if (!b.scope.starts_with("arm:") || b.messages == 0) continue;
        parts.push_back(Pct(b.overall_success_rate, 1) + " " + ShortArm(b.scope.substr(4)));
      }
      if (parts.size() > 1) {
        cell += " (";
        for (std::size_t i = 0; i < parts.size(); ++i) cell += (i ? " / " : "") + parts[i];
        cell += ")";
      }
      rows[9].push_back(cell);
    } else {
      rows[9].push_back("-");
    }
  }
  return rows;
}

namespace {

void FitTable(std::ostringstream& md, const lmm::Fit& fit) {
  md << "| Term | Coef. | Std.Err. | p-value |\n|---|---:|---:|---:|\n";
  for (std::size_t k = 0; k < fit.terms.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    md << "| " << fit.terms[k] << " | " << csv::FormatFixed(fit.coefficients(i), 3) << " | "
       << csv::FormatFixed(fit.standard_errors(i), 3) << " | "
       << csv::FormatFixed(fit.p_values(i), 3) << " |\n";
  }
  md << "\nRandom intercept variance " << csv::FormatFixed(fit.sigma_u2, 3)
     << ", residual variance " << csv::FormatFixed(fit.sigma_e2, 3) << ", log-likelihood "
     << csv::FormatFixed(fit.loglik, 3) << (fit.reml ? " (REML)" : " (ML)") << ", "
     << fit.n_obs << " rows, " << fit.n_groups << " users.\n\n";
}

void SuccessTable(std::ostringstream& md, const impact::SuccessBreakdown& b) {
  md << "**" << b.scope << "**: " << b.successes << " of " << b.messages << " messages ("
     << Pct(b.overall_success_rate, 1) << ")\n\n";
  md << "| Interaction | Messages | Successes | Share of successes | Success rate |\n"
     << "|---|---:|---:|---:|---:|\n";
  for (const auto& s : b.by_interaction) {
    md << "| " << ToString(s.interaction) << " | " << s.messages << " | " << s.successes << " | "
       << Pct(s.share_of_successes, 1) << " | " << Pct(s.success_rate, 1) << " |\n";
  }
  md << "\n";
}

}  // namespace

std::string RenderMarkdown(const ImpactReport& report) {
  std::ostringstream md;
  md << "# Impact report\n\n";
  md << "Days " << report.start_day << " to " << report.end_day << ", "
     << report.decision_days.size() << " decision points, significance level "
     << csv::FormatFixed(100.0 * (1.0 - report.alpha), 0) << "%.\n\n";

  md << "## Summary\n\n| Metric |";
  for (const auto& c : report.comparisons) md << " " << c.name << " |";
  md << "\n|---|";
  for (std::size_t i = 0; i < report.comparisons.size(); ++i) md << "---|";
  md << "\n";
  const auto cells = SummaryCells(report);
  for (std::size_t r = 0; r < kSummaryRows.size(); ++r) {
    md << "| " << kSummaryRows[r] << " |";
    for (const auto& v : cells[r]) md << " " << v << " |";
    md << "\n";
  }
  md << "\nT-test rows use spend accumulated since the first day, over significant days only.\n\n";

  md << "## T-tests\n\n";
  md << "| Comparison | Series | Days | Significant | Largest effect | Average power |\n"
     << "|---|---|---:|---:|---:|---:|\n";
  for (const auto& c : report.comparisons) {
    if (!c.series) continue;
    for (const auto* which : {"daily", "accumulated"}) {
      const auto& s = std::string(which) == "daily" ? c.series->daily_summary
                                                    : c.series->accumulated_summary;
      md << "| " << c.name << " | " << which << " | " << s.n_days << " | " << s.n_significant
         << " | " << (s.largest_effect ? csv::FormatFixed(*s.largest_effect, 3) : "-") << " | "
         << (s.average_power ? csv::FormatFixed(*s.average_power, 3) : "-") << " |\n";
    }
    for (const auto& st : c.strata) {
      md << "| " << c.name << " | accumulated, " << st.stratum << " | ";
      if (!st.series) {
        md << "- | untestable | - | - |\n";
        continue;
      }
      const auto& s = st.series->accumulated_summary;
      md << s.n_days << " | " << s.n_significant << " | "
         << (s.largest_effect ? csv::FormatFixed(*s.largest_effect, 3) : "-") << " | "
         << (s.average_power ? csv::FormatFixed(*s.average_power, 3) : "-") << " |\n";
    }
  }
  md << "\n";

  if (report.lmm_full) {
    md << "## LMM, all terms\n\n";
    FitTable(md, *report.lmm_full);
  }
  if (report.lmm_reduced) {
    md << "## LMM, significant terms\n\n";
    FitTable(md, *report.lmm_reduced);
  }

  if (report.assignment) {
    const auto& m = *report.assignment;
    md << "## Bandit assignment\n\n| Day | Nudged |";
    for (const auto& l : m.arm_labels) md << " " << l << " |";
    md << "\n|---:|---:|";
    for (std::size_t i = 0; i < m.arm_labels.size(); ++i) md << "---:|";
    md << "\n";
    for (std::size_t w = 0; w < m.n_weeks(); ++w) {
      md << "| " << m.decision_days[w] << " | " << Pct(m.nudged_fraction[w], 1) << " |";
      for (double f : m.arm_fractions[w]) md << " " << Pct(f, 1) << " |";
      md << "\n";
    }
    md << "\n";
  }

  if (report.sensitivity) {
    const auto& s = *report.sensitivity;
    md << "## Bandit sensitivity\n\n| Trait |";
    for (const auto& a : s.arms) md << " " << a << " |";
    md << "\n|---|";
    for (std::size_t i = 0; i < s.arms.size(); ++i) md << "---|";
    md << "\n";
    for (std::size_t b = 0; b < s.traits.size(); ++b) {
      md << "| " << s.traits[b] << " |";
      for (std::size_t a = 0; a < s.arms.size(); ++a) md << " " << ToString(s.at(a, b).category) << " |";
      md << "\n";
    }
    md << "\n";
  }

  if (report.success) {
    md << "## Recommendation success\n\n";
    SuccessTable(md, report.success->overall);
    for (const auto& b : report.success->breakdowns) SuccessTable(md, b);
  }

  if (!report.warnings.empty()) {
    md << "## Notes\n\n";
    for (const auto& w : report.warnings) md << "- " << w << "\n";
  }
  return md.str();
}

namespace {

std::string EscapeXml(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

std::string RenderSeriesSvg(std::span<const impact::DayTest> tests, const std::string& title) {
  constexpr double kW = 720, kH = 360, kLeft = 60, kRight = 20, kTop = 36, kBottom = 40;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 0;
  bool any = false;
  for (const auto& d : tests) {
    if (!d.test) continue;
    if (!any) x0 = x1 = static_cast<double>(d.day);
    any = true;
    x0 = std::min(x0, static_cast<double>(d.day));
    x1 = std::max(x1, static_cast<double>(d.day));
    y0 = std::min(y0, d.test->ci_low);
    y1 = std::max(y1, d.test->ci_high);
  }
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) y1 = y0 + 1;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * (kW - kLeft - kRight); };
  auto py = [&](double y) { return kTop + (y1 - y) / (y1 - y0) * (kH - kTop - kBottom); };
  auto f = [](double v) { return csv::FormatFixed(v, 2); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kLeft << "\" y=\"22\" font-family=\"sans-serif\" font-size=\"14\">"
      << EscapeXml(title) << "</text>\n";
  if (any) {
    std::string upper, lower, mid;
    for (const auto& d : tests) {
      if (!d.test) continue;
      const double x = px(static_cast<double>(d.day));
      upper += f(x) + "," + f(py(d.test->ci_high)) + " ";
      mid += f(x) + "," + f(py(d.test->mean_diff)) + " ";
    }
    for (auto it = tests.rbegin(); it != tests.rend(); ++it) {
      if (!it->test) continue;
      lower += f(px(static_cast<double>(it->day))) + "," + f(py(it->test->ci_low)) + " ";
    }
    svg << "<polygon points=\"" << upper << lower << "\" fill=\"#9ecae1\" fill-opacity=\"0.5\"/>\n";
    svg << "<polyline points=\"" << mid << "\" fill=\"none\" stroke=\"#08519c\" stroke-width=\"1.5\"/>\n";
  }
  svg << "<line x1=\"" << f(kLeft) << "\" y1=\"" << f(py(0)) << "\" x2=\"" << f(kW - kRight)
      << "\" y2=\"" << f(py(0)) << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << f(kLeft) << "\" y=\"" << f(kH - 12) << "\" font-family=\"sans-serif\" "
      << "font-size=\"11\">day " << f(x0) << " to " << f(x1) << "</text>\n";
  svg << "<text x=\"4\" y=\"" << f(py(y1) + 4) << "\" font-family=\"sans-serif\" font-size=\"11\">"
      << f(y1) << "</text>\n";
  svg << "<text x=\"4\" y=\"" << f(py(y0)) << "\" font-family=\"sans-serif\" font-size=\"11\">"
      << f(y0) << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

std::string Slug(const Comparison& comparison) { return std::string(impact::ToString(comparison.group)); }

namespace {

void WriteText(const std::filesystem::path& path, const std::string& text) {
  auto out = csv::OpenForWrite(path);
  out << text;
}

void WriteSuccessRows(csv::Writer& w, const std::string& prefix, const impact::SuccessAnalysis& a) {
  auto rows = [&](const impact::SuccessBreakdown& b) {
    for (const auto& s : b.by_interaction) {
      w.Row({prefix + b.scope, std::string(ToString(s.interaction)), std::to_string(s.messages),
             std::to_string(s.successes), csv::FormatDouble(s.share_of_successes),
             csv::FormatDouble(s.success_rate)});
    }
  };
  rows(a.overall);
  for (const auto& b : a.breakdowns) rows(b);
}

}  // namespace

void WriteReport(const std::filesystem::path& dir, const ImpactReport& report) {
  WriteText(dir / "summary.md", RenderMarkdown(report));
  for (const auto& c : report.comparisons) {
    if (!c.series) continue;
    const std::string stem = "ttest_" + Slug(c);
    impact::WriteSeriesCsv(dir / (stem + "_daily.csv"), c.series->daily);
    impact::WriteSeriesCsv(dir / (stem + "_accumulated.csv"), c.series->accumulated);
    WriteText(dir / (stem + "_daily.svg"),
              RenderSeriesSvg(c.series->daily, c.name + " vs pure control, daily"));
    WriteText(dir / (stem + "_accumulated.svg"),
              RenderSeriesSvg(c.series->accumulated, c.name + " vs pure control, accumulated"));
    for (const auto& st : c.strata) {
      if (!st.series) continue;
      impact::WriteSeriesCsv(dir / (stem + "_" + st.stratum + "_accumulated.csv"),
                             st.series->accumulated);
    }
  }
  if (report.lmm_full) lmm::WriteFitCsv(dir / "lmm_full.csv", *report.lmm_full);
  if (report.lmm_reduced) lmm::WriteFitCsv(dir / "lmm_reduced.csv", *report.lmm_reduced);
  if (report.assignment) {
    auto out = csv::OpenForWrite(dir / "assignment.csv");
    csv::Writer w(out);
    std::vector<std::string> header = {"day", "nudged_fraction"};
    for (const auto& l : report.assignment->arm_labels) header.push_back("fraction_" + l);
    w.Row(header);
    const auto& m = *report.assignment;
    for (std::size_t k = 0; k < m.n_weeks(); ++k) {
      std::vector<std::string> row = {std::to_string(m.decision_days[k]),
                                      csv::FormatDouble(m.nudged_fraction[k])};
      for (double f : m.arm_fractions[k]) row.push_back(csv::FormatDouble(f));
      w.Row(row);
    }
  }
  if (report.sensitivity) {
    auto out = csv::OpenForWrite(dir / "sensitivity.csv");
    csv::Writer w(out);
    w.Row({"arm", "trait", "mean_derivative", "soft_thresholded", "normalized", "category"});
    for (const auto& e : report.sensitivity->entries) {
      w.Row({e.arm, e.trait, csv::FormatDouble(e.mean_derivative),
             csv::FormatDouble(e.soft_thresholded), csv::FormatDouble(e.normalized),
             std::string(ToString(e.category))});
    }
  }
  if (!report.best_arms.empty()) {
    auto out = csv::OpenForWrite(dir / "best_arm.csv");
    csv::Writer w(out);
    std::vector<std::string> header = {"user_id", "best_arm", "confidence"};
    for (const auto& l : report.arm_labels) header.push_back("p_" + l);
    w.Row(header);
    for (const auto& b : report.best_arms) {
      std::vector<std::string> row = {csv::QuoteIfNeeded(b.user_id),
                                      report.arm_labels.at(static_cast<std::size_t>(b.best_arm)),
                                      csv::FormatDouble(b.confidence)};
      for (double p : b.probabilities) row.push_back(csv::FormatDouble(p));
      w.Row(row);
    }
  }
  if (report.success) {
    auto out = csv::OpenForWrite(dir / "success.csv");
    csv::Writer w(out);
    w.Row({"scope", "interaction", "messages", "successes", "share_of_successes", "success_rate"});
    WriteSuccessRows(w, "", *report.success);
    for (const auto& c : report.comparisons) {
      if (c.success) WriteSuccessRows(w, Slug(c) + "/", *c.success);
    }
  }
}

}  // namespace nudgelab::report
