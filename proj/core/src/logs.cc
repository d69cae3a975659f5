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

#include "nudgelab/logs.h"

#include <cmath>

#include "nudgelab/csv.h"

namespace nudgelab {

PurchaseEvent MakePurchase(UserId user, ItemId item, Day day, int quantity, double unit_price) {
  if (day < 0) throw DataError("purchase day must be >= 0");
  if (quantity < 1) throw DataError("purchase quantity must be >= 1");
  if (!std::isfinite(unit_price) || unit_price < 0.0) {
    throw DataError("purchase unit_price must be finite and >= 0");
  }
  PurchaseEvent e;
  e.user_id = std::move(user);
  e.item_id = std::move(item);
  e.day = day;
  e.quantity = quantity;
  e.unit_price = unit_price;
  e.revenue = static_cast<double>(quantity) * unit_price;
  return e;
}

std::string_view ToString(ArmLabel arm) {
  switch (arm) {
    case ArmLabel::kControl:
      return "control";
    case ArmLabel::kPersonalized:
      return "personalized";
    case ArmLabel::kRandom:
      return "random";
  }
  return "control";
}

std::string_view ToString(Interaction interaction) {
  switch (interaction) {
    case Interaction::kOpened:
      return "opened";
    case Interaction::kClosed:
      return "closed";
    case Interaction::kIgnored:
      return "ignored";
  }
  return "ignored";
}

ArmLabel ParseArmLabel(std::string_view text) {
  if (text == "control") return ArmLabel::kControl;
  if (text == "personalized") return ArmLabel::kPersonalized;
  if (text == "random") return ArmLabel::kRandom;
  throw DataError("unknown arm label '" + std::string(text) + "'");
}

Interaction ParseInteraction(std::string_view text) {
  if (text == "opened") return Interaction::kOpened;
  if (text == "closed") return Interaction::kClosed;
  if (text == "ignored") return Interaction::kIgnored;
  throw DataError("unknown interaction '" + std::string(text) + "'");
}

bool InStock(const StockTable& stock, std::string_view item) {
  auto it = stock.find(item);
  return it != stock.end() && it->second;
}

namespace {

std::string Where(const csv::Table& t, std::size_t row) {
  return t.source() + " row " + std::to_string(row + 1);
}

}  // namespace

std::vector<PurchaseEvent> ReadPurchases(const std::filesystem::path& path) {
  const auto table = csv::Table::Read(path, kPurchaseHeader);
  std::vector<PurchaseEvent> events;
  events.reserve(table.rows().size());
  for (std::size_t r = 0; r < table.rows().size(); ++r) {
    const auto& f = table.rows()[r];
    try {
      events.push_back(MakePurchase(f[0], f[1], csv::ParseInt(f[2], "day"),
                                    static_cast<int>(csv::ParseInt(f[3], "quantity")),
                                    csv::ParseDouble(f[4], "unit_price")));
    } catch (const DataError& e) {
      throw DataError(Where(table, r) + ": " + e.what());
    }
  }
  return events;
}

std::vector<NudgeEvent> ReadNudges(const std::filesystem::path& path) {
  const auto table = csv::Table::Read(path, kNudgeHeader);
  std::vector<NudgeEvent> events;
  events.reserve(table.rows().size());
  for (std::size_t r = 0; r < table.rows().size(); ++r) {
    const auto& f = table.rows()[r];
    try {
      NudgeEvent e;
      e.user_id = f[0];
      e.day = csv::ParseInt(f[1], "day");
      if (e.day < 0) throw DataError("nudge day must be >= 0");
      e.arm = ParseArmLabel(f[4]);
      e.interaction = ParseInteraction(f[5]);
      const bool has_pair = !f[2].empty() || !f[3].empty();
      if (has_pair) {
        if (f[2].empty() || f[3].empty()) throw DataError("incomplete item pair");
        if (e.arm == ArmLabel::kControl) throw DataError("control nudge cannot carry a pair");
        e.pair = std::make_pair(f[2], f[3]);
      } else if (e.arm != ArmLabel::kControl) {
        throw DataError("recommendation nudge without an item pair");
      }
      events.push_back(std::move(e));
    } catch (const DataError& e) {
      throw DataError(Where(table, r) + ": " + e.what());
    }
  }
  return events;
}

std::vector<LoginEvent> ReadLogins(const std::filesystem::path& path) {
  const auto table = csv::Table::Read(path, kLoginHeader);
  std::vector<LoginEvent> events;
  events.reserve(table.rows().size());
  for (std::size_t r = 0; r < table.rows().size(); ++r) {
    const auto& f = table.rows()[r];
    LoginEvent e{f[0], 0, 0.0};
    try {
      e.day = csv::ParseInt(f[1], "day");
      e.session_seconds = csv::ParseDouble(f[2], "session_seconds");
    } catch (const DataError& err) {
      throw DataError(Where(table, r) + ": " + err.what());
    }
    if (e.day < 0 || e.session_seconds < 0.0) {
      throw DataError(Where(table, r) + ": negative day or session length");
    }
    events.push_back(std::move(e));
  }
  return events;
}

StockTable ReadStock(const std::filesystem::path& path) {
  const auto table = csv::Table::Read(path, kStockHeader);
  StockTable stock;
  for (std::size_t r = 0; r < table.rows().size(); ++r) {
    const auto& f = table.rows()[r];
    if (f[1] != "0" && f[1] != "1") {
      throw DataError(Where(table, r) + ": in_stock must be 0 or 1");
    }
    stock[f[0]] = f[1] == "1";
  }
  return stock;
}

void WritePurchases(const std::filesystem::path& path, std::span<const PurchaseEvent> events) {
  auto out = csv::OpenForWrite(path);
  csv::Writer w(out);
  w.Row(kPurchaseHeader);
  for (const auto& e : events) {
    w.Row({e.user_id, e.item_id, std::to_string(e.day), std::to_string(e.quantity),
           csv::FormatDouble(e.unit_price)});
  }
}

void WriteNudges(const std::filesystem::path& path, std::span<const NudgeEvent> events) {
  auto out = csv::OpenForWrite(path);
  csv::Writer w(out);
  w.Row(kNudgeHeader);
  for (const auto& e : events) {
    w.Row({e.user_id, std::to_string(e.day), e.pair ? e.pair->first : "",
           e.pair ? e.pair->second : "", std::string(ToString(e.arm)),
           std::string(ToString(e.interaction))});
  }
}

void WriteLogins(const std::filesystem::path& path, std::span<const LoginEvent> events) {
  auto out = csv::OpenForWrite(path);
  csv::Writer w(out);
  w.Row(kLoginHeader);
  for (const auto& e : events) {
    w.Row({e.user_id, std::to_string(e.day), csv::FormatDouble(e.session_seconds)});
  }
}

void WriteStock(const std::filesystem::path& path, const StockTable& stock) {
  auto out = csv::OpenForWrite(path);
  csv::Writer w(out);
  w.Row(kStockHeader);
  for (const auto& [item, in_stock] : stock) w.Row({item, in_stock ? "1" : "0"});
}

}  // namespace nudgelab
