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

#ifndef NUDGELAB_TRAITS_H_
#define NUDGELAB_TRAITS_H_

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nudgelab/common.h"
#include "nudgelab/logs.h"

// Behavioral traits computed from the purchase, login and nudge logs: item
// recency and cadence, bandit contexts, rewards and cohort eligibility.
namespace nudgelab::traits {

// Days since `user` last bought `item` at or before day `t`, or -1 if never.
int DaysSinceLastPurchase(const PurchaseLog& log, std::string_view user, std::string_view item,
                          Day t);

// Mean gap between the distinct days `user` bought `item` within
// (t - 30 * months, t]. Empty when fewer than two purchase days fall in it.
std::optional<double> AvgInterpurchaseDays(const PurchaseLog& log, std::string_view user,
                                           std::string_view item, Day t, int months);

// Recency ratio d / dbar; empty when the item was never bought or has no
// positive cadence in the window.
std::optional<double> RecencyRatio(const PurchaseLog& log, std::string_view user,
                                   std::string_view item, Day t, int months);

// Static per-user attributes (e.g. region encodings) exposed as traits
// `attribute_<k>`.
using UserAttributes = std::map<UserId, std::vector<double>, std::less<>>;

std::vector<std::string> AttributeHeader(std::size_t n_attributes);
UserAttributes ReadAttributes(const std::filesystem::path& path);
void WriteAttributes(const std::filesystem::path& path, const UserAttributes& attributes);

enum class TraitKind {
  kDaysSinceLastNudge,       // days_since_last_nudge
  kDaysWithOrder,            // days_with_order_<W>
  kExpenditure,              // expenditure_<W>
  kExpenditureCurrentMonth,  // expenditure_current_month
  kLoginCount,               // login_count_<W>
  kDaysBetweenLogins,        // days_between_logins_<W>
  kInAppTime,                // in_app_time_<W>
  kDaysSinceFirstLogin,      // days_since_first_login
  kOpenedNudges,             // opened_nudges_<W>
  kAttribute,                // attribute_<k>
};

struct TraitSpec {
  std::string name;
  TraitKind kind = TraitKind::kDaysSinceLastNudge;
  int window_days = 0;      // trailing window for windowed kinds
  int attribute_index = 0;  // for kAttribute
};

// Throws ConfigError for names outside the supported trait set.
TraitSpec ParseTrait(std::string_view name);

struct ContextSpec {
  std::vector<TraitSpec> traits;
  // Never-nudged users (and anything older) are capped here before scaling
  // days_since_last_nudge to [0, 1].
  int nudge_cap_days = 70;

  static ContextSpec FromNames(const std::vector<std::string>& names, int nudge_cap_days);
  std::vector<std::string> Names() const;
  std::size_t size() const { return traits.size(); }
};

struct ContextVector {
  UserId user_id;
  Day day = 0;
  std::shared_ptr<const std::vector<std::string>> names;
  std::vector<double> values;
};

struct TraitSources {
  const BehaviorLogs& logs;
  const UserAttributes* attributes = nullptr;
};

// Contexts for every cohort member as of day `t`. Raw traits are min-max
// scaled over the cohort (zero range maps to 0); days_since_last_nudge is
// instead scaled by the cap so that never-nudged users read 1.0.
std::vector<ContextVector> ComputeContexts(const TraitSources& sources,
                                           std::span<const UserId> cohort, Day t,
                                           const ContextSpec& spec);

// Single-user view of ComputeContexts; `user` must belong to `cohort`.
ContextVector ComputeContext(const TraitSources& sources, std::string_view user, Day t,
                             const ContextSpec& spec, std::span<const UserId> cohort);

struct RewardObservation {
  UserId user_id;
  Day decision_day = 0;
  double reward = 0.0;
};

// reward = ln(1 + revenue of `user` in (decision_day, decision_day + window_days]).
RewardObservation ComputeReward(const PurchaseLog& log, std::string_view user, Day decision_day,
                                int window_days = 7);

// Revenue of `user` with day in (t - window_days, t].
double TrailingRevenue(const PurchaseLog& log, std::string_view user, Day t, int window_days);

struct CohortRules {
  int login_recency_days = 40;
  int login_frequency_window_days = 60;
  double min_logins_per_week = 1.0;
  double exclude_top_spender_pct = 20.0;
  int spend_window_days = 90;
};

// Users (from either log) that logged in within the recency window, average
// at least `min_logins_per_week` logins over the frequency window, and are
// not among the top `exclude_top_spender_pct` percent of all users by
// trailing revenue. Sorted by id.
std::vector<UserId> EligibleCohort(const PurchaseLog& purchases, const LoginLog& logins, Day t,
                                   const CohortRules& rules);

}  // namespace nudgelab::traits

#endif  // NUDGELAB_TRAITS_H_
