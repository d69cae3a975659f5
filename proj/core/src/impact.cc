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

#include "nudgelab/impact.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "nudgelab/csv.h"
#include "nudgelab/traits.h"

namespace nudgelab::impact {

std::string_view ToString(Group group) {
  switch (group) {
    case Group::kPureControl:
      return "pure_control";
    case Group::kAdaptive:
      return "adaptive";
    case Group::kNonAdaptive:
      return "non_adaptive";
  }
  return "pure_control";
}

Group ParseGroup(std::string_view text) {
  if (text == "pure_control") return Group::kPureControl;
  if (text == "adaptive") return Group::kAdaptive;
  if (text == "non_adaptive") return Group::kNonAdaptive;
  throw DataError("unknown group '" + std::string(text) + "'");
}

GroupMap ReadGroups(const std::filesystem::path& path) {
  const auto table = csv::Table::Read(path, kGroupsHeader);
  GroupMap groups;
  for (const auto& row : table.rows()) {
    Participant p{row[0], ParseGroup(row[1]), csv::ParseInt(row[2], "prior_participant") != 0};
    if (!groups.emplace(p.user_id, p).second) {
      throw DataError(path.string() + ": duplicate user '" + row[0] + "'");
    }
  }
  return groups;
}

void WriteGroups(const std::filesystem::path& path, const GroupMap& groups) {
  auto out = csv::OpenForWrite(path);
  csv::Writer w(out);
  w.Row(kGroupsHeader);
  for (const auto& [user, p] : groups) {
    w.Row({csv::QuoteIfNeeded(user), std::string(ToString(p.group)),
           p.prior_participant ? "1" : "0"});
  }
}

std::vector<UserId> UsersIn(const GroupMap& groups, std::initializer_list<Group> which) {
  std::vector<UserId> users;
  for (const auto& [user, p] : groups) {
    if (std::find(which.begin(), which.end(), p.group) != which.end()) users.push_back(user);
  }
  return users;
}

DailyPanel::DailyPanel(Day first_day, Day last_day) : first_(first_day), last_(last_day) {
  if (last_day < first_day) throw ConfigError("daily panel needs first_day <= last_day");
}

DailyPanel DailyPanel::FromPurchases(const PurchaseLog& log, std::span<const UserId> users,
                                     Day first_day, Day last_day) {
  DailyPanel panel(first_day, last_day);
  for (const auto& user : users) {
    panel.AddUser(user);
    for (const auto& e : log.ForUserBetween(user, first_day, last_day)) {
      panel.Add(user, e.day, e.revenue);
    }
  }
  return panel;
}

void DailyPanel::AddUser(const UserId& user) {
  spend_.try_emplace(user, n_days(), 0.0);
}

void DailyPanel::Add(const UserId& user, Day day, double amount) {
  if (day < first_ || day > last_) return;
  auto it = spend_.try_emplace(user, n_days(), 0.0).first;
  it->second[static_cast<std::size_t>(day - first_)] += amount;
}

std::span<const double> DailyPanel::Series(std::string_view user) const {
  auto it = spend_.find(user);
  if (it == spend_.end()) throw ConfigError("user '" + std::string(user) + "' not in panel");
  return it->second;
}

std::vector<double> DailyPanel::DayValues(std::span<const UserId> users, Day day) const {
  if (day < first_ || day > last_) throw ConfigError("day outside the panel range");
  std::vector<double> values;
  values.reserve(users.size());
  for (const auto& u : users) values.push_back(Series(u)[static_cast<std::size_t>(day - first_)]);
  return values;
}

std::vector<double> DailyPanel::AccumulatedValues(std::span<const UserId> users, Day day) const {
  if (day < first_ || day > last_) throw ConfigError("day outside the panel range");
  std::vector<double> values;
  values.reserve(users.size());
  for (const auto& u : users) {
    const auto s = Series(u);
    double total = 0.0;
    for (Day d = first_; d <= day; ++d) total += s[static_cast<std::size_t>(d - first_)];
    values.push_back(total);
  }
  return values;
}

TTestSummary Summarize(std::span<const DayTest> tests) {
  TTestSummary s;
  s.n_days = tests.size();
  double effect_sum = 0.0;
  double power_sum = 0.0;
  for (const auto& d : tests) {
    if (!d.test || !d.test->significant) continue;
    ++s.n_significant;
    const double effect = *d.test->effect_size;
    const double power = *d.test->power;
    effect_sum += effect;
    power_sum += power;
    if (!s.largest_effect || std::abs(effect) > std::abs(*s.largest_effect)) {
      s.largest_effect = effect;
    }
    if (!s.largest_power || power > *s.largest_power) s.largest_power = power;
  }
  if (s.n_days > 0) {
    s.pct_significant_days =
        100.0 * static_cast<double>(s.n_significant) / static_cast<double>(s.n_days);
  }
  if (s.n_significant > 0) {
    s.average_effect = effect_sum / static_cast<double>(s.n_significant);
    s.average_power = power_sum / static_cast<double>(s.n_significant);
  }
  return s;
}

namespace {

std::optional<stats::TTestResult> TryTest(const std::vector<double>& xs,
                                          const std::vector<double>& ys, double alpha) {
  try {
    return stats::WelchTTest(xs, ys, alpha);
  } catch (const InfeasibleError&) {
    return std::nullopt;
  }
}

}  // namespace

SeriesReport DailySeriesTests(const DailyPanel& panel, std::span<const UserId> treated,
                              std::span<const UserId> control, double alpha) {
  if (treated.size() < 2 || control.size() < 2) {
    throw InfeasibleError("t-test series needs at least two treated and two control users");
  }
  SeriesReport report;
  std::vector<double> acc_t(treated.size(), 0.0);
  std::vector<double> acc_c(control.size(), 0.0);
  for (Day day = panel.first_day(); day <= panel.last_day(); ++day) {
    const auto xt = panel.DayValues(treated, day);
    const auto xc = panel.DayValues(control, day);
    for (std::size_t i = 0; i < xt.size(); ++i) acc_t[i] += xt[i];
    for (std::size_t i = 0; i < xc.size(); ++i) acc_c[i] += xc[i];
    report.daily.push_back({day, TryTest(xt, xc, alpha)});
    report.accumulated.push_back({day, TryTest(acc_t, acc_c, alpha)});
  }
  report.daily_summary = Summarize(report.daily);
  report.accumulated_summary = Summarize(report.accumulated);
  return report;
}

std::vector<StratumReport> StratifiedTests(const DailyPanel& panel,
                                           std::span<const UserId> treated,
                                           std::span<const UserId> control, const Strata& strata,
                                           double alpha) {
  std::map<std::string, std::pair<std::vector<UserId>, std::vector<UserId>>> split;
  auto lookup = [&](const UserId& u) -> const std::string& {
    auto it = strata.find(u);
    if (it == strata.end()) throw ConfigError("user '" + u + "' has no stratum");
    return it->second;
  };
  for (const auto& u : treated) split[lookup(u)].first.push_back(u);
  for (const auto& u : control) split[lookup(u)].second.push_back(u);
  std::vector<StratumReport> out;
  for (auto& [name, users] : split) {
    StratumReport r;
    r.stratum = name;
    r.n_treated = users.first.size();
    r.n_control = users.second.size();
    if (r.n_treated >= 2 && r.n_control >= 2) {
      r.series = DailySeriesTests(panel, users.first, users.second, alpha);
    }
    out.push_back(std::move(r));
  }
  return out;
}

Strata SpendingStrata(const PurchaseLog& log, std::span<const UserId> users, Day t,
                      int window_days) {
  std::vector<std::pair<double, UserId>> ranked;
  for (const auto& u : users) ranked.emplace_back(traits::TrailingRevenue(log, u, t, window_days), u);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  const std::size_t top = (ranked.size() + 1) / 2;
  Strata strata;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    strata[ranked[i].second] = i < top ? "top_50" : "bottom_50";
  }
  return strata;
}

namespace {

std::size_t InteractionIndex(Interaction i) {
  switch (i) {
    case Interaction::kOpened:
      return 0;
    case Interaction::kClosed:
      return 1;
    case Interaction::kIgnored:
      return 2;
  }
  return 2;
}

SuccessBreakdown Tally(std::string scope, const std::vector<std::pair<Interaction, bool>>& items) {
  SuccessBreakdown b;
  b.scope = std::move(scope);
  for (std::size_t k = 0; k < 3; ++k) b.by_interaction[k].interaction = kAllInteractions[k];
  for (const auto& [interaction, success] : items) {
    auto& share = b.by_interaction[InteractionIndex(interaction)];
    ++share.messages;
    ++b.messages;
    if (success) {
      ++share.successes;
      ++b.successes;
    }
  }
  if (b.messages > 0) {
    b.overall_success_rate = static_cast<double>(b.successes) / static_cast<double>(b.messages);
  }
  for (auto& share : b.by_interaction) {
    if (share.messages > 0) {
      share.success_rate =
          static_cast<double>(share.successes) / static_cast<double>(share.messages);
    }
    if (b.successes > 0) {
      share.share_of_successes =
          static_cast<double>(share.successes) / static_cast<double>(b.successes);
    }
  }
  return b;
}

}  // namespace

SuccessAnalysis AnalyzeSuccess(std::span<const NudgeEvent> nudges, const PurchaseLog& log,
                               Day horizon_end, const GroupMap* groups) {
  std::vector<std::pair<Interaction, bool>> all;
  std::map<std::string, std::vector<std::pair<Interaction, bool>>> by_arm;
  std::map<std::string, std::vector<std::pair<Interaction, bool>>> by_group;
  for (const auto& n : nudges) {
    const ItemId* item = n.infrequent_item();
    if (item == nullptr) continue;
    bool success = false;
    if (horizon_end - 1 > n.day) {
      for (const auto& e : log.ForUserBetween(n.user_id, n.day + 1, horizon_end - 1)) {
        if (e.item_id == *item) {
          success = true;
          break;
        }
      }
    }
    all.emplace_back(n.interaction, success);
    by_arm[std::string(ToString(n.arm))].emplace_back(n.interaction, success);
    if (groups != nullptr) {
      auto it = groups->find(n.user_id);
      if (it != groups->end()) {
        by_group[std::string(ToString(it->second.group))].emplace_back(n.interaction, success);
      }
    }
  }
  SuccessAnalysis analysis;
  analysis.overall = Tally("all", all);
  for (const auto& [arm, items] : by_arm) analysis.breakdowns.push_back(Tally("arm:" + arm, items));
  for (const auto& [group, items] : by_group) {
    analysis.breakdowns.push_back(Tally("group:" + group, items));
  }
  return analysis;
}

std::string AssignmentMetrics::MajorityLabel() const {
  return std::to_string(weeks_majority_nudged) + "/" + std::to_string(n_weeks());
}

AssignmentMetrics ComputeAssignmentMetrics(std::span<const bandit::Decision> decisions,
                                           std::span<const std::string> arm_labels,
                                           std::span<const std::string> nudge_arms) {
  AssignmentMetrics m;
  m.arm_labels.assign(arm_labels.begin(), arm_labels.end());
  const auto n_arms = arm_labels.size();
  std::vector<bool> is_nudge(n_arms, false);
  for (const auto& label : nudge_arms) {
    auto it = std::find(arm_labels.begin(), arm_labels.end(), label);
    if (it == arm_labels.end()) throw ConfigError("unknown nudge arm '" + label + "'");
    is_nudge[static_cast<std::size_t>(it - arm_labels.begin())] = true;
  }
  std::map<Day, std::vector<std::size_t>> counts;
  for (const auto& d : decisions) {
    if (d.chosen_arm < 0 || static_cast<std::size_t>(d.chosen_arm) >= n_arms) {
      throw DataError("decision arm index out of range");
    }
    auto& c = counts.try_emplace(d.day, n_arms, 0).first->second;
    ++c[static_cast<std::size_t>(d.chosen_arm)];
  }
  for (std::size_t k = 0; k < n_arms; ++k) {
    if (is_nudge[k]) m.per_nudge_arm.push_back({m.arm_labels[k], 0.0, 0});
  }
  for (const auto& [day, c] : counts) {
    std::size_t total = 0;
    for (auto v : c) total += v;
    std::vector<double> fractions(n_arms);
    double nudged = 0.0;
    std::size_t slot = 0;
    for (std::size_t k = 0; k < n_arms; ++k) {
      fractions[k] = static_cast<double>(c[k]) / static_cast<double>(total);
      if (is_nudge[k]) {
        nudged += fractions[k];
        auto& arm = m.per_nudge_arm[slot++];
        arm.avg_fraction += fractions[k];
        if (fractions[k] > 0.5) ++arm.weeks_majority;
      }
    }
    m.decision_days.push_back(day);
    m.arm_fractions.push_back(std::move(fractions));
    m.nudged_fraction.push_back(nudged);
    m.avg_fraction_nudged += nudged;
    if (nudged > 0.5) ++m.weeks_majority_nudged;
  }
  if (!counts.empty()) {
    const auto n = static_cast<double>(counts.size());
    m.avg_fraction_nudged /= n;
    for (auto& arm : m.per_nudge_arm) arm.avg_fraction /= n;
  }
  return m;
}

WeeklyPanel BuildWeeklyPanel(const PurchaseLog& purchases, const NudgeLog& nudges,
                             const GroupMap& groups, std::span<const Day> decision_days,
                             int baseline_days) {
  if (decision_days.empty()) throw InfeasibleError("weekly panel needs decision points");
  std::vector<Day> days(decision_days.begin(), decision_days.end());
  std::sort(days.begin(), days.end());
  days.erase(std::unique(days.begin(), days.end()), days.end());

  bool any_non_adaptive = false;
  bool any_prior = false;
  for (const auto& [user, p] : groups) {
    any_non_adaptive |= p.group == Group::kNonAdaptive;
    any_prior |= p.prior_participant;
  }
  bool any_personalized = false;
  bool any_random = false;
  for (const auto& n : nudges.all()) {
    if (!groups.count(n.user_id) || !n.pair) continue;
    any_personalized |= n.arm == ArmLabel::kPersonalized;
    any_random |= n.arm == ArmLabel::kRandom;
  }
  const bool split_nudges = any_personalized && any_random;

  // Baseline spend, min-max scaled across participants.
  std::map<UserId, double, std::less<>> baseline;
  double lo = 0.0;
  double hi = 0.0;
  bool first = true;
  for (const auto& [user, p] : groups) {
    const double v = traits::TrailingRevenue(purchases, user, days.front(), baseline_days);
    baseline[user] = v;
    lo = first ? v : std::min(lo, v);
    hi = first ? v : std::max(hi, v);
    first = false;
  }

  const std::size_t n_rows = groups.size() * days.size();
  std::vector<UserId> subjects;
  subjects.reserve(n_rows);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n_rows));
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n_rows));
  Eigen::VectorXd adaptive(ones.size()), non_adaptive(ones.size()), nudged(ones.size()),
      nudged_per(ones.size()), nudged_ran(ones.size()), prior(ones.size()), base(ones.size()),
      week(ones.size()), week_int(ones.size()), week_ad(ones.size()), week_non(ones.size());
  Eigen::Index r = 0;
  for (const auto& [user, p] : groups) {
    const double b = hi > lo ? (baseline[user] - lo) / (hi - lo) : 0.0;
    const double is_ad = p.group == Group::kAdaptive ? 1.0 : 0.0;
    const double is_non = p.group == Group::kNonAdaptive ? 1.0 : 0.0;
    for (std::size_t k = 0; k < days.size(); ++k, ++r) {
      const Day d = days[k];
      const double t = static_cast<double>(k + 1);
      subjects.push_back(user);
      y(r) = traits::TrailingRevenue(purchases, user, d + 7, 7);
      double per = 0.0;
      double ran = 0.0;
      for (const auto& n : nudges.ForUserBetween(user, d, d + 6)) {
        if (!n.pair) continue;
        (n.arm == ArmLabel::kRandom ? ran : per) = 1.0;
      }
      adaptive(r) = is_ad;
      non_adaptive(r) = is_non;
      nudged(r) = std::max(per, ran);
      nudged_per(r) = per;
      nudged_ran(r) = ran;
      prior(r) = p.prior_participant ? 1.0 : 0.0;
      base(r) = b;
      week(r) = t;
      week_int(r) = (is_ad + is_non) * t;
      week_ad(r) = is_ad * t;
      week_non(r) = is_non * t;
    }
  }

  WeeklyPanel out{lmm::Panel(std::move(subjects), std::move(y)), {}};
  auto add = [&](std::string_view name, Eigen::VectorXd col) {
    out.panel.AddTerm(std::string(name), std::move(col));
    out.full_terms.emplace_back(name);
  };
  add(lmm::kIntercept, ones);
  add(lmm::kAdaptive, adaptive);
  if (any_non_adaptive) add(lmm::kNonAdaptive, non_adaptive);
  if (split_nudges) {
    add(lmm::kNudgedPersonalized, nudged_per);
    add(lmm::kNudgedRandom, nudged_ran);
  } else {
    add(lmm::kNudged, nudged);
  }
  if (any_prior) add(lmm::kPriorParticipant, prior);
  add(lmm::kBaseline, base);
  add(lmm::kWeek, week);
  if (any_non_adaptive) {
    add(lmm::kWeekInAdaptive, week_ad);
    add(lmm::kWeekInNonAdaptive, week_non);
  } else {
    add(lmm::kWeekInIntervention, week_int);
  }
  return out;
}

void WriteSeriesCsv(const std::filesystem::path& path, std::span<const DayTest> tests) {
  auto out = csv::OpenForWrite(path);
  csv::Writer w(out);
  w.Row({"day", "mean_diff", "ci_low", "ci_high", "t_stat", "df", "p_value", "significant"});
  for (const auto& d : tests) {
    if (!d.test) {
      w.Row({std::to_string(d.day), "", "", "", "", "", "", "0"});
      continue;
    }
    const auto& t = *d.test;
    w.Row({std::to_string(d.day), csv::FormatDouble(t.mean_diff), csv::FormatDouble(t.ci_low),
           csv::FormatDouble(t.ci_high), csv::FormatDouble(t.t_stat), csv::FormatDouble(t.df),
           csv::FormatDouble(t.p_value), t.significant ? "1" : "0"});
  }
}

}  // namespace nudgelab::impact
