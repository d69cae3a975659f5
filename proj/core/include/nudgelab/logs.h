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

#ifndef NUDGELAB_LOGS_H_
#define NUDGELAB_LOGS_H_

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nudgelab/common.h"

namespace nudgelab {

struct PurchaseEvent {
  UserId user_id;
  ItemId item_id;
  Day day = 0;
  int quantity = 1;
  double unit_price = 0.0;
  double revenue = 0.0;  // quantity * unit_price
};

// Validating constructor: rejects negative days, non-positive quantities and
// negative or non-finite prices.
PurchaseEvent MakePurchase(UserId user, ItemId item, Day day, int quantity, double unit_price);

enum class ArmLabel { kControl, kPersonalized, kRandom };
enum class Interaction { kOpened, kClosed, kIgnored };

std::string_view ToString(ArmLabel arm);
std::string_view ToString(Interaction interaction);
ArmLabel ParseArmLabel(std::string_view text);
Interaction ParseInteraction(std::string_view text);

inline constexpr Interaction kAllInteractions[] = {Interaction::kOpened, Interaction::kClosed,
                                                    Interaction::kIgnored};

// A delivered (or, for the control arm, withheld) message. When a pair is
// present it is stored as (frequent item, infrequent item).
struct NudgeEvent {
  UserId user_id;
  Day day = 0;
  std::optional<std::pair<ItemId, ItemId>> pair;
  ArmLabel arm = ArmLabel::kControl;
  Interaction interaction = Interaction::kIgnored;

  const ItemId* infrequent_item() const { return pair ? &pair->second : nullptr; }
};

struct LoginEvent {
  UserId user_id;
  Day day = 0;
  double session_seconds = 0.0;
};

// Immutable event log ordered by (user, day) with O(log n) per-user lookup.
// Events with equal (user, day) keep their insertion order.
template <typename Event>
class UserIndexedLog {
 public:
  UserIndexedLog() = default;
  explicit UserIndexedLog(std::vector<Event> events) : events_(std::move(events)) {
    std::stable_sort(events_.begin(), events_.end(), [](const Event& a, const Event& b) {
      if (a.user_id != b.user_id) return a.user_id < b.user_id;
      return a.day < b.day;
    });
    std::size_t begin = 0;
    while (begin < events_.size()) {
      std::size_t end = begin;
      while (end < events_.size() && events_[end].user_id == events_[begin].user_id) ++end;
      ranges_.emplace(events_[begin].user_id, std::make_pair(begin, end));
      begin = end;
    }
  }

  std::span<const Event> all() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }

  std::span<const Event> ForUser(std::string_view user) const {
    auto it = ranges_.find(user);
    if (it == ranges_.end()) return {};
    return std::span<const Event>(events_).subspan(it->second.first,
                                                   it->second.second - it->second.first);
  }

  // Events of `user` with day in [first, last].
  std::span<const Event> ForUserBetween(std::string_view user, Day first, Day last) const {
    auto events = ForUser(user);
    auto lo = std::lower_bound(events.begin(), events.end(), first,
                               [](const Event& e, Day d) { return e.day < d; });
    auto hi = std::upper_bound(lo, events.end(), last,
                               [](Day d, const Event& e) { return d < e.day; });
    return std::span<const Event>(lo, hi);
  }

  std::vector<UserId> Users() const {
    std::vector<UserId> users;
    users.reserve(ranges_.size());
    for (const auto& [user, range] : ranges_) users.push_back(user);
    return users;
  }

 private:
  std::vector<Event> events_;
  std::map<UserId, std::pair<std::size_t, std::size_t>, std::less<>> ranges_;
};

using PurchaseLog = UserIndexedLog<PurchaseEvent>;
using LoginLog = UserIndexedLog<LoginEvent>;
using NudgeLog = UserIndexedLog<NudgeEvent>;

// The three behavioral logs every analysis consumes.
struct BehaviorLogs {
  PurchaseLog purchases;
  LoginLog logins;
  NudgeLog nudges;
};

// Item availability; items absent from the map count as out of stock.
using StockTable = std::map<ItemId, bool, std::less<>>;

bool InStock(const StockTable& stock, std::string_view item);

// CSV schemas. Headers are validated exactly.
inline const std::vector<std::string> kPurchaseHeader = {"user_id", "item_id", "day", "quantity",
                                                         "unit_price"};
inline const std::vector<std::string> kNudgeHeader = {"user_id", "day",       "item_i",
                                                      "item_j",  "arm_label", "interaction"};
inline const std::vector<std::string> kLoginHeader = {"user_id", "day", "session_seconds"};
inline const std::vector<std::string> kStockHeader = {"item_id", "in_stock"};

std::vector<PurchaseEvent> ReadPurchases(const std::filesystem::path& path);
std::vector<NudgeEvent> ReadNudges(const std::filesystem::path& path);
std::vector<LoginEvent> ReadLogins(const std::filesystem::path& path);
StockTable ReadStock(const std::filesystem::path& path);

void WritePurchases(const std::filesystem::path& path, std::span<const PurchaseEvent> events);
void WriteNudges(const std::filesystem::path& path, std::span<const NudgeEvent> events);
void WriteLogins(const std::filesystem::path& path, std::span<const LoginEvent> events);
void WriteStock(const std::filesystem::path& path, const StockTable& stock);

}  // namespace nudgelab

#endif  // NUDGELAB_LOGS_H_
