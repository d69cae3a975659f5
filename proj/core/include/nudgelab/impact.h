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

#ifndef NUDGELAB_IMPACT_H_
#define NUDGELAB_IMPACT_H_

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nudgelab/bandit.h"
#include "nudgelab/common.h"
#include "nudgelab/lmm.h"
#include "nudgelab/logs.h"
#include "nudgelab/stats.h"

// Impact analysis of an intervention against a pure-control group: daily
// and accumulated t-test series, stratified series, weekly mixed-model
// panels, recommendation success and bandit assignment metrics.
namespace nudgelab::impact {

enum class Group { kPureControl, kAdaptive, kNonAdaptive };
std::string_view ToString(Group group);
Group ParseGroup(std::string_view text);

struct Participant {
  UserId user_id;
  Group group = Group::kPureControl;
  bool prior_participant = false;
};
using GroupMap = std::map<UserId, Participant, std::less<>>;

inline const std::vector<std::string> kGroupsHeader = {"user_id", "group", "prior_participant"};
GroupMap ReadGroups(const std::filesystem::path& path);
void WriteGroups(const std::filesystem::path& path, const GroupMap& groups);
std::vector<UserId> UsersIn(const GroupMap& groups, std::initializer_list<Group> which);

// Per-user daily expenditure over the inclusive day range [first, last].
// Days without purchases hold 0.
class DailyPanel {
 public:
  DailyPanel(Day first_day, Day last_day);
  static DailyPanel FromPurchases(const PurchaseLog& log, std::span<const UserId> users,
                                  Day first_day, Day last_day);

  void AddUser(const UserId& user);
  // Adds to the user's spend on `day`; days outside the range are ignored.
  void Add(const UserId& user, Day day, double amount);

  Day first_day() const { return first_; }
  Day last_day() const { return last_; }
  std::size_t n_days() const { return static_cast<std::size_t>(last_ - first_ + 1); }
  bool has_user(std::string_view user) const { return spend_.count(user) > 0; }
  std::span<const double> Series(std::string_view user) const;
  // Per-user values on `day`: daily spend, or spend accumulated since first_day.
  std::vector<double> DayValues(std::span<const UserId> users, Day day) const;
  std::vector<double> AccumulatedValues(std::span<const UserId> users, Day day) const;

 private:
  Day first_;
  Day last_;
  std::map<UserId, std::vector<double>, std::less<>> spend_;
};

struct DayTest {
  Day day = 0;
  std::optional<stats::TTestResult> test;  // empty when the day is untestable
};

// Headline-table aggregate over a test series. Effects and powers are taken
// over significant days only and are absent when no day is significant.
struct TTestSummary {
  std::size_t n_days = 0;
  std::size_t n_significant = 0;
  double pct_significant_days = 0.0;
  std::optional<double> largest_effect;  // largest in magnitude, sign kept
  std::optional<double> largest_power;
  std::optional<double> average_effect;
  std::optional<double> average_power;
};
TTestSummary Summarize(std::span<const DayTest> tests);

struct SeriesReport {
  std::vector<DayTest> daily;
  std::vector<DayTest> accumulated;
  TTestSummary daily_summary;
  TTestSummary accumulated_summary;
};

// Welch tests of treated against control on every day of the panel, both on
// that day's spend and on spend accumulated since the panel start.
SeriesReport DailySeriesTests(const DailyPanel& panel, std::span<const UserId> treated,
                              std::span<const UserId> control, double alpha = 0.1);

using Strata = std::map<UserId, std::string, std::less<>>;

struct StratumReport {
  std::string stratum;
  std::size_t n_treated = 0;
  std::size_t n_control = 0;
  // Empty when the stratum has fewer than two users in either group.
  std::optional<SeriesReport> series;
};

// DailySeriesTests within each stratum, ordered by stratum name. Throws
// ConfigError when a treated or control user has no stratum.
std::vector<StratumReport> StratifiedTests(const DailyPanel& panel,
                                           std::span<const UserId> treated,
                                           std::span<const UserId> control, const Strata& strata,
                                           double alpha = 0.1);

// "top_50" for the upper half of `users` by revenue in (t - window, t]
// (ceil of half, ties by id), "bottom_50" for the rest.
Strata SpendingStrata(const PurchaseLog& log, std::span<const UserId> users, Day t,
                      int window_days = 90);

struct InteractionShare {
  Interaction interaction = Interaction::kIgnored;
  std::size_t messages = 0;
  std::size_t successes = 0;
  double share_of_successes = 0.0;  // successes / all successes in scope
  double success_rate = 0.0;        // successes / messages with this interaction
};

struct SuccessBreakdown {
  std::string scope;  // "all", "arm:<label>", "group:<group>"
  std::size_t messages = 0;
  std::size_t successes = 0;
  double overall_success_rate = 0.0;
  std::array<InteractionShare, 3> by_interaction;  // opened, closed, ignored
};

struct SuccessAnalysis {
  SuccessBreakdown overall;
  std::vector<SuccessBreakdown> breakdowns;  // per arm, then per group when known
};

// A message with a recommendation succeeds when its user buys the
// infrequent item on a day d with nudge day < d < horizon_end. Control-arm
// entries carry no recommendation and are skipped.
SuccessAnalysis AnalyzeSuccess(std::span<const NudgeEvent> nudges, const PurchaseLog& log,
                               Day horizon_end, const GroupMap* groups = nullptr);

struct ArmAssignment {
  std::string label;
  double avg_fraction = 0.0;
  std::size_t weeks_majority = 0;
};

struct AssignmentMetrics {
  std::vector<Day> decision_days;
  std::vector<std::string> arm_labels;
  std::vector<std::vector<double>> arm_fractions;  // [decision point][arm]
  std::vector<double> nudged_fraction;             // per decision point
  double avg_fraction_nudged = 0.0;
  std::size_t weeks_majority_nudged = 0;  // fraction strictly above 0.5
  std::vector<ArmAssignment> per_nudge_arm;

  std::size_t n_weeks() const { return decision_days.size(); }
  std::string MajorityLabel() const;  // "k/n"
};

AssignmentMetrics ComputeAssignmentMetrics(std::span<const bandit::Decision> decisions,
                                           std::span<const std::string> arm_labels,
                                           std::span<const std::string> nudge_arms);

struct WeeklyPanel {
  lmm::Panel panel;
  std::vector<std::string> full_terms;
};

// One row per participant and decision point k (1-based week number):
//   y   spend in (d_k, d_k + 7]
//   y0  spend in the 90 days up to the first decision point, min-max scaled
//   group indicators, nudged-that-week indicators, week number and its
//   interaction with the intervention groups.
// Non-adaptive group terms appear only when that group is populated, the
// nudge indicator is split by arm when both personalized and random
// messages were sent, and the prior-participant indicator appears when any
// participant carries it.
WeeklyPanel BuildWeeklyPanel(const PurchaseLog& purchases, const NudgeLog& nudges,
                             const GroupMap& groups, std::span<const Day> decision_days,
                             int baseline_days = 90);

void WriteSeriesCsv(const std::filesystem::path& path, std::span<const DayTest> tests);

}  // namespace nudgelab::impact

#endif  // NUDGELAB_IMPACT_H_
