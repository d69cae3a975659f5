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


#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.h"
#include "nudgelab/impact.h"

namespace nudgelab::impact {
namespace {

using fixture::Buy;

std::vector<UserId> Names(const std::string& prefix, int n) {
  std::vector<UserId> out;
  for (int k = 0; k < n; ++k) out.push_back(prefix + std::to_string(k));
  return out;
}

// Daily spend ~ Exp(mean 20) for every user on days [0, days), plus `uplift`
// from `uplift_day` on for the users in `lifted`.
DailyPanel SyntheticPanel(const std::vector<UserId>& users, const std::vector<UserId>& lifted, int days,
                          double uplift, Day uplift_day, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> spend(1.0 / 20.0);
  DailyPanel panel(0, days - 1);
  for (const auto& u : users) {
    panel.AddUser(u);
    const bool up = std::find(lifted.begin(), lifted.end(), u) != lifted.end();
    for (Day d = 0; d < days; ++d) panel.Add(u, d, spend(rng) + (up && d >= uplift_day ? uplift : 0.0));
  }
  return panel;
}

TEST(DailyPanel, FillsMissingDaysWithZero) {
  const PurchaseLog log({Buy("a", "x", 3, 2, 5.0), Buy("a", "y", 3, 1, 1.0), Buy("a", "x", 9, 1, 4.0),
                         Buy("b", "x", 1, 1, 8.0)});
  const std::vector<UserId> users = {"a", "b", "c"};
  const auto panel = DailyPanel::FromPurchases(log, users, 2, 6);
  EXPECT_EQ(panel.n_days(), 5u);
  const auto a = panel.Series("a");
  EXPECT_EQ(std::vector<double>(a.begin(), a.end()), (std::vector<double>{0, 11, 0, 0, 0}));
  EXPECT_EQ(panel.DayValues(users, 3), (std::vector<double>{11, 0, 0}));
  EXPECT_EQ(panel.AccumulatedValues(users, 6), (std::vector<double>{11, 0, 0}));
  EXPECT_TRUE(panel.has_user("c"));
  EXPECT_FALSE(panel.has_user("d"));
  EXPECT_THROW(panel.Series("d"), ConfigError);
  EXPECT_THROW(DailyPanel(5, 4), ConfigError);
}

TEST(DailySeriesTests, IdenticalGroupsHaveNoSignificantDay) {
  const auto treated = Names("t", 20);
  const auto control = Names("c", 20);
  DailyPanel panel(0, 13);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> spend(0.0, 50.0);
  for (int k = 0; k < 20; ++k) {
    panel.AddUser(treated[k]);
    panel.AddUser(control[k]);
    for (Day d = 0; d <= 13; ++d) {
      const double v = spend(rng);
      panel.Add(treated[k], d, v);
      panel.Add(control[k], d, v);
    }
  }
  const auto report = DailySeriesTests(panel, treated, control);
  EXPECT_EQ(report.daily.size(), 14u);
  EXPECT_EQ(report.daily_summary.pct_significant_days, 0.0);
  EXPECT_EQ(report.accumulated_summary.n_significant, 0u);
  EXPECT_FALSE(report.daily_summary.largest_effect.has_value());
  for (const auto& d : report.accumulated) EXPECT_NEAR(d.test->t_stat, 0.0, 1e-12);
}

TEST(DailySeriesTests, AllZeroDaysAreUntestable) {
  const auto treated = Names("t", 3);
  const auto control = Names("c", 3);
  DailyPanel panel(0, 2);
  for (const auto& u : treated) panel.AddUser(u);
  for (const auto& u : control) panel.AddUser(u);
  const auto report = DailySeriesTests(panel, treated, control);
  for (const auto& d : report.daily) EXPECT_FALSE(d.test.has_value());
  EXPECT_EQ(report.daily_summary.n_days, 3u);
  EXPECT_EQ(report.daily_summary.n_significant, 0u);
}

TEST(DailySeriesTests, InjectedUpliftShowsUpAfterOnset) {
  const auto treated = Names("t", 100);
  const auto control = Names("c", 100);
  auto users = treated;
  users.insert(users.end(), control.begin(), control.end());
  const auto panel = SyntheticPanel(users, treated, 30, 25.0, 10, 41);
  const auto report = DailySeriesTests(panel, treated, control);
  // Onset: first day from which the accumulated test stays significant.
  Day onset = -1;
  for (auto it = report.accumulated.rbegin(); it != report.accumulated.rend(); ++it) {
    if (!it->test->significant) break;
    onset = it->day;
  }
  EXPECT_GE(onset, 10);
  EXPECT_LE(onset, 14);
  EXPECT_GT(report.daily_summary.pct_significant_days, 50.0);
  const auto& s = report.daily_summary;
  ASSERT_TRUE(s.largest_effect && s.average_effect && s.largest_power && s.average_power);
  EXPECT_GE(std::abs(*s.largest_effect), std::abs(*s.average_effect));
  EXPECT_GE(*s.largest_power, *s.average_power);
}

TEST(Summarize, HandComputed) {
  auto sig = [](Day day, double effect, double power) {
    stats::TTestResult t;
    t.significant = true;
    t.effect_size = effect;
    t.power = power;
    return DayTest{day, t};
  };
  stats::TTestResult flat;
  const std::vector<DayTest> tests = {sig(0, 0.2, 0.5), {1, flat}, sig(2, -0.6, 0.9), {3, std::nullopt}};
  const auto s = Summarize(tests);
  EXPECT_EQ(s.n_days, 4u);
  EXPECT_EQ(s.n_significant, 2u);
  EXPECT_DOUBLE_EQ(s.pct_significant_days, 50.0);
  EXPECT_DOUBLE_EQ(*s.largest_effect, -0.6);
  EXPECT_DOUBLE_EQ(*s.average_effect, -0.2);
  EXPECT_DOUBLE_EQ(*s.largest_power, 0.9);
  EXPECT_DOUBLE_EQ(*s.average_power, 0.7);
}

TEST(StratifiedTests, SingleStratumEqualsUnstratified) {
  const auto treated = Names("t", 30);
  const auto control = Names("c", 30);
  auto users = treated;
  users.insert(users.end(), control.begin(), control.end());
  const auto panel = SyntheticPanel(users, treated, 12, 10.0, 4, 2);
  Strata strata;
  for (const auto& u : users) strata[u] = "all";
  const auto strat = StratifiedTests(panel, treated, control, strata);
  const auto plain = DailySeriesTests(panel, treated, control);
  ASSERT_EQ(strat.size(), 1u);
  ASSERT_TRUE(strat[0].series.has_value());
  ASSERT_EQ(strat[0].series->accumulated.size(), plain.accumulated.size());
  for (std::size_t k = 0; k < plain.accumulated.size(); ++k) {
    EXPECT_EQ(strat[0].series->accumulated[k].test->t_stat, plain.accumulated[k].test->t_stat);
    EXPECT_EQ(strat[0].series->daily[k].test->p_value, plain.daily[k].test->p_value);
  }
  strata.erase("c3");
  EXPECT_THROW(StratifiedTests(panel, treated, control, strata), ConfigError);
}

TEST(StratifiedTests, UpliftOnlyInTopStratum) {
  const auto treated = Names("t", 80);
  const auto control = Names("c", 80);
  auto users = treated;
  users.insert(users.end(), control.begin(), control.end());
  std::vector<UserId> lifted;
  Strata strata;
  for (int k = 0; k < 80; ++k) {
    const bool top = k < 40;
    strata[treated[k]] = top ? "top_50" : "bottom_50";
    strata[control[k]] = top ? "top_50" : "bottom_50";
    if (top) lifted.push_back(treated[k]);
  }
  const auto panel = SyntheticPanel(users, lifted, 28, 30.0, 0, 19);
  const auto reports = StratifiedTests(panel, treated, control, strata);
  ASSERT_EQ(reports.size(), 2u);
  EXPECT_EQ(reports[0].stratum, "bottom_50");
  EXPECT_EQ(reports[1].stratum, "top_50");
  EXPECT_EQ(reports[1].n_treated, 40u);
  EXPECT_FALSE(reports[0].series->accumulated.back().test->significant);
  EXPECT_TRUE(reports[1].series->accumulated.back().test->significant);
  EXPECT_LT(reports[0].series->daily_summary.pct_significant_days, 25.0);
  EXPECT_GT(reports[1].series->daily_summary.pct_significant_days, 75.0);
}

TEST(StratifiedTests, SmallStratumIsUntestable) {
  const auto panel = SyntheticPanel({"t0", "t1", "t2", "c0", "c1", "c2"}, {}, 3, 0, 0, 1);
  const std::vector<UserId> treated = {"t0", "t1", "t2"}, control = {"c0", "c1", "c2"};
  const Strata strata = {{"t0", "a"}, {"t1", "a"}, {"t2", "b"}, {"c0", "a"}, {"c1", "a"}, {"c2", "b"}};
  const auto reports = StratifiedTests(panel, treated, control, strata);
  ASSERT_EQ(reports.size(), 2u);
  EXPECT_TRUE(reports[0].series.has_value());
  EXPECT_FALSE(reports[1].series.has_value());
  EXPECT_EQ(reports[1].n_control, 1u);
}

TEST(SpendingStrata, UpperHalfRoundsUp) {
  const PurchaseLog log({Buy("a", "x", 50, 1, 10), Buy("b", "x", 50, 1, 30), Buy("c", "x", 50, 1, 20),
                         Buy("d", "x", 50, 1, 20), Buy("e", "x", 5, 1, 999)});
  const std::vector<UserId> users = {"a", "b", "c", "d", "e"};
  const auto strata = SpendingStrata(log, users, 60, 30);
  EXPECT_EQ(strata.at("b"), "top_50");
  EXPECT_EQ(strata.at("c"), "top_50");
  EXPECT_EQ(strata.at("d"), "top_50");
  EXPECT_EQ(strata.at("a"), "bottom_50");
  EXPECT_EQ(strata.at("e"), "bottom_50");
}

NudgeEvent Message(const UserId& user, Day day, const ItemId& infrequent, Interaction interaction,
                   ArmLabel arm = ArmLabel::kPersonalized) {
  return {user, day, std::make_pair(ItemId("other"), infrequent), arm, interaction};
}

TEST(AnalyzeSuccess, SixMessageLog) {
  const std::vector<NudgeEvent> nudges = {
      Message("u1", 10, "a", Interaction::kOpened),   // bought on 12: success
      Message("u2", 10, "b", Interaction::kClosed),   // bought on 19: success
      Message("u3", 10, "c", Interaction::kIgnored),  // bought a different item
      Message("u4", 10, "d", Interaction::kOpened, ArmLabel::kRandom),  // bought before the nudge
      Message("u5", 10, "e", Interaction::kClosed, ArmLabel::kRandom),  // bought the same day
      Message("u6", 10, "f", Interaction::kIgnored),  // bought on the horizon day
      {"u7", 10, std::nullopt, ArmLabel::kControl, Interaction::kIgnored},
  };
  const PurchaseLog log({Buy("u1", "a", 12), Buy("u2", "b", 19), Buy("u3", "z", 12), Buy("u4", "d", 9),
                         Buy("u5", "e", 10), Buy("u6", "f", 20)});
  const auto result = AnalyzeSuccess(nudges, log, 20);
  const auto& all = result.overall;
  EXPECT_EQ(all.scope, "all");
  EXPECT_EQ(all.messages, 6u);
  EXPECT_EQ(all.successes, 2u);
  EXPECT_DOUBLE_EQ(all.overall_success_rate, 1.0 / 3.0);
  const std::array<Interaction, 3> order = {Interaction::kOpened, Interaction::kClosed, Interaction::kIgnored};
  const std::array<double, 3> share = {0.5, 0.5, 0.0};
  double total = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(all.by_interaction[k].interaction, order[k]);
    EXPECT_EQ(all.by_interaction[k].messages, 2u);
    EXPECT_DOUBLE_EQ(all.by_interaction[k].share_of_successes, share[k]);
    EXPECT_DOUBLE_EQ(all.by_interaction[k].success_rate, share[k]);
    total += all.by_interaction[k].share_of_successes;
  }
  EXPECT_DOUBLE_EQ(total, 1.0);
  ASSERT_EQ(result.breakdowns.size(), 2u);
  EXPECT_EQ(result.breakdowns[0].scope, "arm:personalized");
  EXPECT_EQ(result.breakdowns[0].successes, 2u);
  EXPECT_EQ(result.breakdowns[1].scope, "arm:random");
  EXPECT_EQ(result.breakdowns[1].successes, 0u);
  // One more day of horizon turns u6 into a success.
  EXPECT_EQ(AnalyzeSuccess(nudges, log, 21).overall.successes, 3u);
  const auto none = AnalyzeSuccess(nudges, PurchaseLog(std::vector<PurchaseEvent>{}), 100);
  EXPECT_EQ(none.overall.successes, 0u);
  EXPECT_EQ(none.overall.overall_success_rate, 0.0);

  GroupMap groups;
  for (int k = 1; k <= 7; ++k) {
    const auto u = "u" + std::to_string(k);
    groups[u] = {u, k % 2 ? Group::kAdaptive : Group::kNonAdaptive, false};
  }
  const auto with_groups = AnalyzeSuccess(nudges, log, 20, &groups);
  ASSERT_EQ(with_groups.breakdowns.size(), 4u);
  EXPECT_EQ(with_groups.breakdowns[2].scope, "group:adaptive");
  EXPECT_EQ(with_groups.breakdowns[2].messages, 3u);
  EXPECT_EQ(with_groups.breakdowns[3].scope, "group:non_adaptive");
}

TEST(AnalyzeSuccess, SharesSumToOneOnRandomLogs) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> day(0, 40), item(0, 4), user(0, 9), inter(0, 2);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<NudgeEvent> nudges;
    std::vector<PurchaseEvent> buys;
    for (int k = 0; k < 30; ++k) {
      nudges.push_back(Message("u" + std::to_string(user(rng)), day(rng), "i" + std::to_string(item(rng)),
                               static_cast<Interaction>(inter(rng))));
      buys.push_back(Buy("u" + std::to_string(user(rng)), "i" + std::to_string(item(rng)), day(rng)));
    }
    const auto result = AnalyzeSuccess(nudges, PurchaseLog(buys), 41);
    if (result.overall.successes == 0) continue;
    double total = 0;
    for (const auto& s : result.overall.by_interaction) total += s.share_of_successes;
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

std::vector<bandit::Decision> Week(Day day, int nudged, int total) {
  std::vector<bandit::Decision> out;
  for (int k = 0; k < total; ++k) out.push_back({"u" + std::to_string(k), day, k < nudged ? 1 + k % 2 : 0, {}, {}});
  return out;
}

TEST(AssignmentMetrics, HandcraftedWeeks) {
  std::vector<bandit::Decision> decisions;
  for (const auto& [day, n] : std::vector<std::pair<Day, int>>{{0, 6}, {7, 4}, {14, 7}}) {
    const auto w = Week(day, n, 10);
    decisions.insert(decisions.end(), w.begin(), w.end());
  }
  const std::vector<std::string> labels = {"control", "personalized", "random"};
  const std::vector<std::string> nudge_arms = {"personalized", "random"};
  const auto m = ComputeAssignmentMetrics(decisions, labels, nudge_arms);
  EXPECT_NEAR(m.avg_fraction_nudged, 17.0 / 30.0, 1e-12);
  EXPECT_EQ(m.MajorityLabel(), "2/3");
  EXPECT_EQ(m.nudged_fraction, (std::vector<double>{0.6, 0.4, 0.7}));
  ASSERT_EQ(m.per_nudge_arm.size(), 2u);
  EXPECT_NEAR(m.per_nudge_arm[0].avg_fraction, (0.3 + 0.2 + 0.4) / 3, 1e-12);
  EXPECT_EQ(m.per_nudge_arm[0].weeks_majority, 0u);

  std::vector<bandit::Decision> idle;
  for (Day day : {0, 7, 14, 21}) {
    const auto w = Week(day, 0, 5);
    idle.insert(idle.end(), w.begin(), w.end());
  }
  const auto z = ComputeAssignmentMetrics(idle, labels, nudge_arms);
  EXPECT_EQ(z.avg_fraction_nudged, 0.0);
  EXPECT_EQ(z.MajorityLabel(), "0/4");
  const std::vector<std::string> bogus = {"sms"};
  EXPECT_THROW(ComputeAssignmentMetrics(idle, labels, bogus), ConfigError);
  idle[0].chosen_arm = 3;
  EXPECT_THROW(ComputeAssignmentMetrics(idle, labels, nudge_arms), DataError);
}

TEST(BuildWeeklyPanel, HandComputedRows) {
  const PurchaseLog purchases({Buy("a", "x", 5, 1, 40.0), Buy("a", "x", 12, 1, 7.0), Buy("b", "x", 9, 1, 10.0),
                               Buy("b", "x", 18, 1, 3.0), Buy("c", "x", 17, 1, 2.0)});
  std::vector<NudgeEvent> n = {Message("a", 10, "y", Interaction::kOpened),
                               {"b", 10, std::nullopt, ArmLabel::kControl, Interaction::kIgnored},
                               Message("b", 17, "y", Interaction::kClosed)};
  const NudgeLog nudges(n);
  GroupMap groups = {{"a", {"a", Group::kAdaptive, false}},
                     {"b", {"b", Group::kAdaptive, true}},
                     {"c", {"c", Group::kPureControl, false}}};
  const std::vector<Day> days = {17, 10};
  const auto wp = BuildWeeklyPanel(purchases, nudges, groups, days);
  const std::vector<std::string> terms = {"Intercept", "Adaptive intervention", "Nudged that week",
                                          "Previous experiment participant", "Baseline expenditure",
                                          "Week number", "Week number in intervention"};
  EXPECT_EQ(wp.full_terms, terms);
  const auto& p = wp.panel;
  ASSERT_EQ(p.rows(), 6u);
  EXPECT_EQ(p.subjects(), (std::vector<UserId>{"a", "a", "b", "b", "c", "c"}));
  // y: spend in (d, d + 7].
  EXPECT_EQ(p.y(), (Eigen::VectorXd(6) << 7, 0, 0, 3, 2, 0).finished());
  EXPECT_EQ(p.column("Nudged that week"), (Eigen::VectorXd(6) << 1, 0, 0, 1, 0, 0).finished());
  // Baseline: 90 days up to day 10 gives a 40, b 10, c 0.
  EXPECT_EQ(p.column("Baseline expenditure"), (Eigen::VectorXd(6) << 1, 1, 0.25, 0.25, 0, 0).finished());
  EXPECT_EQ(p.column("Week number"), (Eigen::VectorXd(6) << 1, 2, 1, 2, 1, 2).finished());
  EXPECT_EQ(p.column("Week number in intervention"), (Eigen::VectorXd(6) << 1, 2, 1, 2, 0, 0).finished());
  EXPECT_EQ(p.column("Previous experiment participant"), (Eigen::VectorXd(6) << 0, 0, 1, 1, 0, 0).finished());

  groups["d"] = {"d", Group::kNonAdaptive, false};
  n.push_back(Message("d", 10, "y", Interaction::kIgnored, ArmLabel::kRandom));
  const auto split = BuildWeeklyPanel(purchases, NudgeLog(n), groups, days);
  const std::vector<std::string> split_terms = {
      "Intercept", "Adaptive intervention", "Non-adaptive intervention", "Nudged that week (personalized)",
      "Nudged that week (random)", "Previous experiment participant", "Baseline expenditure", "Week number",
      "Week number in adaptive", "Week number in non adaptive"};
  EXPECT_EQ(split.full_terms, split_terms);
  EXPECT_THROW(BuildWeeklyPanel(purchases, nudges, groups, {}), InfeasibleError);
}

TEST(Groups, FileRoundTripAndParsing) {
  const auto dir = fixture::TempDir("groups");
  const GroupMap groups = {{"a", {"a", Group::kAdaptive, true}}, {"b", {"b", Group::kPureControl, false}}};
  WriteGroups(dir / "g.csv", groups);
  const auto back = ReadGroups(dir / "g.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.at("a").group, Group::kAdaptive);
  EXPECT_TRUE(back.at("a").prior_participant);
  EXPECT_EQ(UsersIn(back, {Group::kPureControl}), (std::vector<UserId>{"b"}));
  EXPECT_THROW(ParseGroup("treatment"), DataError);
  for (Group g : {Group::kPureControl, Group::kAdaptive, Group::kNonAdaptive}) EXPECT_EQ(ParseGroup(ToString(g)), g);
}

TEST(WriteSeriesCsv, UntestableDaysHaveBlankFields) {
  const auto dir = fixture::TempDir("series");
  stats::TTestResult t;
  t.significant = true;
  const std::vector<DayTest> tests = {{4, std::nullopt}, {5, t}};
  WriteSeriesCsv(dir / "s.csv", tests);
  const auto text = fixture::ReadFile(dir / "s.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "day,mean_diff,ci_low,ci_high,t_stat,df,p_value,significant");
  EXPECT_NE(text.find("\n4,,,,,,,0\n"), std::string::npos);
  EXPECT_NE(text.find("\n5,"), std::string::npos);
}

}  // namespace
}  // namespace nudgelab::impact
