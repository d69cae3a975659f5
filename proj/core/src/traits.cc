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

#include "nudgelab/traits.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>

#include "nudgelab/csv.h"

namespace nudgelab::traits {

int DaysSinceLastPurchase(const PurchaseLog& log, std::string_view user, std::string_view item,
                          Day t) {
  const auto events = log.ForUserBetween(user, std::numeric_limits<Day>::min(), t);
  for (auto it = events.rbegin(); it != events.rend(); ++it) {
    if (it->item_id == item) return static_cast<int>(t - it->day);
  }
  return -1;
}

std::optional<double> AvgInterpurchaseDays(const PurchaseLog& log, std::string_view user,
                                           std::string_view item, Day t, int months) {
  if (months < 1) throw ConfigError("cadence window must be at least one month");
  const Day first = t - static_cast<Day>(kDaysPerMonth) * months + 1;
  std::optional<Day> first_day;
  Day last_day = 0;
  int distinct_days = 0;
  for (const auto& e : log.ForUserBetween(user, first, t)) {
    if (e.item_id != item) continue;
    if (!first_day) {
      first_day = e.day;
      last_day = e.day;
      distinct_days = 1;
    } else if (e.day != last_day) {
      last_day = e.day;
      ++distinct_days;
    }
  }
  if (distinct_days < 2) return std::nullopt;
  // Consecutive gaps telescope to (last - first).
  return static_cast<double>(last_day - *first_day) / (distinct_days - 1);
}

std::optional<double> RecencyRatio(const PurchaseLog& log, std::string_view user,
                                   std::string_view item, Day t, int months) {
  const int days = DaysSinceLastPurchase(log, user, item, t);
  if (days < 0) return std::nullopt;
  const auto cadence = AvgInterpurchaseDays(log, user, item, t, months);
  if (!cadence || *cadence <= 0.0) return std::nullopt;
  return days / *cadence;
}

std::vector<std::string> AttributeHeader(std::size_t n_attributes) {
  std::vector<std::string> header = {"user_id"};
  for (std::size_t k = 0; k < n_attributes; ++k) header.push_back("attribute_" + std::to_string(k));
  return header;
}

UserAttributes ReadAttributes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": missing header");
  const auto header = csv::SplitRecord(line);
  if (header.empty() || header[0] != "user_id" || header != AttributeHeader(header.size() - 1)) {
    throw DataError(path.string() + ": expected header user_id,attribute_0,...");
  }
  in.clear();
  in.seekg(0);
  const auto table = csv::Table::Parse(in, header, path.string());
  UserAttributes attributes;
  for (const auto& row : table.rows()) {
    std::vector<double> values;
    for (std::size_t k = 1; k < row.size(); ++k) {
      values.push_back(csv::ParseDouble(row[k], header[k]));
    }
    attributes[row[0]] = std::move(values);
  }
  return attributes;
}

void WriteAttributes(const std::filesystem::path& path, const UserAttributes& attributes) {
  const std::size_t n = attributes.empty() ? 0 : attributes.begin()->second.size();
  auto out = csv::OpenForWrite(path);
  csv::Writer w(out);
  w.Row(AttributeHeader(n));
  for (const auto& [user, values] : attributes) {
    std::vector<std::string> row = {user};
    for (double v : values) row.push_back(csv::FormatDouble(v));
    w.Row(row);
  }
}

namespace {

struct KindPrefix {
  std::string_view prefix;
  TraitKind kind;
};

constexpr KindPrefix kWindowed[] = {
    {"days_with_order_", TraitKind::kDaysWithOrder},
    {"expenditure_", TraitKind::kExpenditure},
    {"login_count_", TraitKind::kLoginCount},
    {"days_between_logins_", TraitKind::kDaysBetweenLogins},
    {"in_app_time_", TraitKind::kInAppTime},
    {"opened_nudges_", TraitKind::kOpenedNudges},
    {"attribute_", TraitKind::kAttribute},
};

std::optional<int> ParsePositive(std::string_view text, bool allow_zero) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  if (value < 0 || (value == 0 && !allow_zero)) return std::nullopt;
  return value;
}

double RawTrait(const TraitSpec& trait, const TraitSources& src, std::string_view user, Day t) {
  const BehaviorLogs& logs = src.logs;
  switch (trait.kind) {
    case TraitKind::kDaysSinceLastNudge:
      // Handled by the caller (scaled by the cap, not min-max).
      return 0.0;
    case TraitKind::kDaysWithOrder: {
      std::set<Day> days;
      for (const auto& e : logs.purchases.ForUserBetween(user, t - trait.window_days + 1, t)) {
        days.insert(e.day);
      }
      return static_cast<double>(days.size());
    }
    case TraitKind::kExpenditure:
      return TrailingRevenue(logs.purchases, user, t, trait.window_days);
    case TraitKind::kExpenditureCurrentMonth: {
      const Day month_start = t - (t % kDaysPerMonth);
      double total = 0.0;
      for (const auto& e : logs.purchases.ForUserBetween(user, month_start, t)) total += e.revenue;
      return total;
    }
    case TraitKind::kLoginCount:
      return static_cast<double>(
          logs.logins.ForUserBetween(user, t - trait.window_days + 1, t).size());
    case TraitKind::kDaysBetweenLogins: {
      std::set<Day> days;
      for (const auto& e : logs.logins.ForUserBetween(user, t - trait.window_days + 1, t)) {
        days.insert(e.day);
      }
      if (days.size() < 2) return static_cast<double>(trait.window_days);
      return static_cast<double>(*days.rbegin() - *days.begin()) / (days.size() - 1);
    }
    case TraitKind::kInAppTime: {
      double total = 0.0;
      for (const auto& e : logs.logins.ForUserBetween(user, t - trait.window_days + 1, t)) {
        total += e.session_seconds;
      }
      return total;
    }
    case TraitKind::kDaysSinceFirstLogin: {
      const auto events = logs.logins.ForUserBetween(user, std::numeric_limits<Day>::min(), t);
      return events.empty() ? 0.0 : static_cast<double>(t - events.front().day);
    }
    case TraitKind::kOpenedNudges: {
      // Nudges sent on day t are decided after the context is observed.
      int opened = 0;
      for (const auto& e : logs.nudges.ForUserBetween(user, t - trait.window_days, t - 1)) {
        if (e.interaction == Interaction::kOpened && e.arm != ArmLabel::kControl) ++opened;
      }
      return opened;
    }
    case TraitKind::kAttribute: {
      if (src.attributes == nullptr) {
        throw ConfigError("trait " + trait.name + " requires a user attribute table");
      }
      auto it = src.attributes->find(user);
      if (it == src.attributes->end() ||
          static_cast<std::size_t>(trait.attribute_index) >= it->second.size()) {
        throw DataError("missing " + trait.name + " for user " + std::string(user));
      }
      return it->second[trait.attribute_index];
    }
  }
  return 0.0;
}

double ScaledDaysSinceLastNudge(const NudgeLog& nudges, std::string_view user, Day t, int cap) {
  const auto events = nudges.ForUserBetween(user, std::numeric_limits<Day>::min(), t - 1);
  for (auto it = events.rbegin(); it != events.rend(); ++it) {
    if (it->arm == ArmLabel::kControl) continue;
    const double days = static_cast<double>(t - it->day);
    return std::min(days, static_cast<double>(cap)) / cap;
  }
  return 1.0;
}

}  // namespace

TraitSpec ParseTrait(std::string_view name) {
  TraitSpec spec;
  spec.name = std::string(name);
  if (name == "days_since_last_nudge" || name == "normalized_days_since_last_nudge") {
    spec.kind = TraitKind::kDaysSinceLastNudge;
    return spec;
  }
  if (name == "expenditure_current_month") {
    spec.kind = TraitKind::kExpenditureCurrentMonth;
    return spec;
  }
  if (name == "days_since_first_login") {
    spec.kind = TraitKind::kDaysSinceFirstLogin;
    return spec;
  }
  for (const auto& [prefix, kind] : kWindowed) {
    if (!name.starts_with(prefix)) continue;
    const bool is_attribute = kind == TraitKind::kAttribute;
    if (auto n = ParsePositive(name.substr(prefix.size()), is_attribute)) {
      spec.kind = kind;
      if (is_attribute) {
        spec.attribute_index = *n;
      } else {
        spec.window_days = *n;
      }
      return spec;
    }
  }
  throw ConfigError("unknown trait '" + std::string(name) + "'");
}

ContextSpec ContextSpec::FromNames(const std::vector<std::string>& names, int nudge_cap_days) {
  if (nudge_cap_days < 1) throw ConfigError("nudge_cap_days must be >= 1");
  ContextSpec spec;
  spec.nudge_cap_days = nudge_cap_days;
  std::set<std::string> seen;
  for (const auto& name : names) {
    if (!seen.insert(name).second) throw ConfigError("duplicate trait '" + name + "'");
    spec.traits.push_back(ParseTrait(name));
  }
  return spec;
}

std::vector<std::string> ContextSpec::Names() const {
  std::vector<std::string> names;
  for (const auto& t : traits) names.push_back(t.name);
  return names;
}

std::vector<ContextVector> ComputeContexts(const TraitSources& sources,
                                           std::span<const UserId> cohort, Day t,
                                           const ContextSpec& spec) {
  auto names = std::make_shared<const std::vector<std::string>>(spec.Names());
  std::vector<ContextVector> contexts(cohort.size());
  for (std::size_t u = 0; u < cohort.size(); ++u) {
    contexts[u].user_id = cohort[u];
    contexts[u].day = t;
    contexts[u].names = names;
    contexts[u].values.resize(spec.size());
  }
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const TraitSpec& trait = spec.traits[k];
    if (trait.kind == TraitKind::kDaysSinceLastNudge) {
      for (std::size_t u = 0; u < cohort.size(); ++u) {
        contexts[u].values[k] =
            ScaledDaysSinceLastNudge(sources.logs.nudges, cohort[u], t, spec.nudge_cap_days);
      }
      continue;
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t u = 0; u < cohort.size(); ++u) {
      const double v = RawTrait(trait, sources, cohort[u], t);
      if (!std::isfinite(v)) throw DataError("non-finite trait " + trait.name);
      contexts[u].values[k] = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double range = hi - lo;
    for (auto& c : contexts) {
      c.values[k] = range > 0.0 ? std::clamp((c.values[k] - lo) / range, 0.0, 1.0) : 0.0;
    }
  }
  return contexts;
}

ContextVector ComputeContext(const TraitSources& sources, std::string_view user, Day t,
                             const ContextSpec& spec, std::span<const UserId> cohort) {
  auto it = std::find(cohort.begin(), cohort.end(), user);
  if (it == cohort.end()) throw ConfigError("user " + std::string(user) + " is not in the cohort");
  auto contexts = ComputeContexts(sources, cohort, t, spec);
  return std::move(contexts[static_cast<std::size_t>(it - cohort.begin())]);
}

double TrailingRevenue(const PurchaseLog& log, std::string_view user, Day t, int window_days) {
  double total = 0.0;
  for (const auto& e : log.ForUserBetween(user, t - window_days + 1, t)) total += e.revenue;
  return total;
}

RewardObservation ComputeReward(const PurchaseLog& log, std::string_view user, Day decision_day,
                                int window_days) {
  if (window_days < 1) throw ConfigError("reward window must be at least one day");
  const double spend = TrailingRevenue(log, user, decision_day + window_days, window_days);
  return {std::string(user), decision_day, std::log1p(spend)};
}

std::vector<UserId> EligibleCohort(const PurchaseLog& purchases, const LoginLog& logins, Day t,
                                   const CohortRules& rules) {
  if (rules.login_recency_days < 1 || rules.login_frequency_window_days < 1 ||
      rules.spend_window_days < 1 || rules.min_logins_per_week < 0.0 ||
      rules.exclude_top_spender_pct < 0.0 || rules.exclude_top_spender_pct > 100.0) {
    throw ConfigError("invalid cohort rules");
  }
  std::set<UserId> pool;
  for (auto& u : purchases.Users()) pool.insert(std::move(u));
  for (auto& u : logins.Users()) pool.insert(std::move(u));

  // Spender ranking is taken over the whole pool so that relaxing the login
  // rules never pushes a retained user into the excluded top bucket.
  std::vector<std::pair<double, UserId>> spend;
  spend.reserve(pool.size());
  for (const auto& u : pool) spend.emplace_back(TrailingRevenue(purchases, u, t, rules.spend_window_days), u);
  std::sort(spend.begin(), spend.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  const auto n_excluded = static_cast<std::size_t>(
      std::floor(rules.exclude_top_spender_pct / 100.0 * static_cast<double>(pool.size()) + 1e-9));
  std::set<UserId> excluded;
  for (std::size_t i = 0; i < n_excluded && i < spend.size(); ++i) excluded.insert(spend[i].second);

  const double min_logins =
      rules.min_logins_per_week * rules.login_frequency_window_days / 7.0;
  std::vector<UserId> cohort;
  for (const auto& u : pool) {
    if (excluded.count(u)) continue;
    if (logins.ForUserBetween(u, t - rules.login_recency_days + 1, t).empty()) continue;
    const auto n_logins = logins.ForUserBetween(u, t - rules.login_frequency_window_days + 1, t).size();
    if (static_cast<double>(n_logins) + 1e-9 < min_logins) continue;
    cohort.push_back(u);
  }
  return cohort;
}

}  // namespace nudgelab::traits
