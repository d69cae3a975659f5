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

#include "nudgelab/itempair.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <utility>

#include "nudgelab/csv.h"
#include "nudgelab/traits.h"

namespace nudgelab::itempair {

ItemPair MakePair(ItemId a, ItemId b) {
  if (a == b) throw ConfigError("an item pair needs two distinct items, got " + a + " twice");
  ItemPair pair;
  if (b < a) std::swap(a, b);
  pair.item_i = std::move(a);
  pair.item_j = std::move(b);
  return pair;
}

RankingMode ParseRankingMode(std::string_view text) {
  if (text == "count") return RankingMode::kCount;
  if (text == "revenue") return RankingMode::kRevenue;
  throw ConfigError("unknown ranking mode '" + std::string(text) + "'");
}

CandidateList GenerateCandidatePairs(const PurchaseLog& log, const StockTable& stock, Day t,
                                     const CandidateOptions& options) {
  if (options.months < 1) throw ConfigError("candidate window must be at least one month");
  const Day first = t - static_cast<Day>(kDaysPerMonth) * options.months + 1;

  struct Totals {
    long count = 0;
    double revenue = 0.0;
  };
  std::map<std::pair<ItemId, ItemId>, Totals> totals;

  // A basket is one user's purchases on one day.
  std::map<ItemId, double> basket;
  auto flush = [&] {
    for (auto a = basket.begin(); a != basket.end(); ++a) {
      for (auto b = std::next(a); b != basket.end(); ++b) {
        Totals& tot = totals[{a->first, b->first}];
        tot.count += 1;
        tot.revenue += a->second + b->second;
      }
    }
    basket.clear();
  };
  const PurchaseEvent* prev = nullptr;
  for (const auto& e : log.all()) {
    if (e.day < first || e.day > t) continue;
    if (prev != nullptr && (prev->user_id != e.user_id || prev->day != e.day)) flush();
    basket[e.item_id] += e.revenue;
    prev = &e;
  }
  flush();

  std::vector<ItemPair> ranked;
  ranked.reserve(totals.size());
  for (const auto& [key, tot] : totals) {
    ranked.push_back({key.first, key.second, tot.count, tot.revenue});
  }
  const bool by_count = options.mode == RankingMode::kCount;
  std::sort(ranked.begin(), ranked.end(), [by_count](const ItemPair& a, const ItemPair& b) {
    if (by_count && a.co_purchase_count != b.co_purchase_count) {
      return a.co_purchase_count > b.co_purchase_count;
    }
    if (a.co_purchase_revenue != b.co_purchase_revenue) {
      return a.co_purchase_revenue > b.co_purchase_revenue;
    }
    if (a.co_purchase_count != b.co_purchase_count) {
      return a.co_purchase_count > b.co_purchase_count;
    }
    if (a.item_i != b.item_i) return a.item_i < b.item_i;
    return a.item_j < b.item_j;
  });
  if (ranked.size() > options.max_pairs) ranked.resize(options.max_pairs);

  CandidateList list;
  list.as_of_day = t;
  list.ranking_mode = options.mode;
  for (auto& pair : ranked) {
    if (InStock(stock, pair.item_i) && InStock(stock, pair.item_j)) {
      list.pairs.push_back(std::move(pair));
    }
  }
  return list;
}

namespace {

struct Recency {
  int days = -1;
  std::optional<double> ratio;

  bool recent() const { return ratio && *ratio > 0.0 && *ratio < 1.0; }
};

Recency Measure(const PurchaseLog& log, std::string_view user, const ItemId& item, Day t,
                int months) {
  Recency r;
  r.days = traits::DaysSinceLastPurchase(log, user, item, t);
  if (r.days >= 0) r.ratio = traits::RecencyRatio(log, user, item, t, months);
  return r;
}

}  // namespace

std::vector<Recommendation> FilterPairsForUser(const CandidateList& candidates,
                                               const PurchaseLog& log, std::string_view user,
                                               Day t, int months) {
  struct Retained {
    Recommendation rec;
    Recency frequent;
    Recency infrequent;
  };
  std::vector<Retained> retained;
  for (const auto& pair : candidates.pairs) {
    const Recency ri = Measure(log, user, pair.item_i, t, months);
    const Recency rj = Measure(log, user, pair.item_j, t, months);
    Retained r;
    if (ri.recent() && !rj.recent()) {
      r = {{std::string(user), t, pair, pair.item_i, pair.item_j}, ri, rj};
    } else if (rj.recent() && !ri.recent()) {
      r = {{std::string(user), t, pair, pair.item_j, pair.item_i}, rj, ri};
    } else {
      continue;
    }
    retained.push_back(std::move(r));
  }

  const bool any_never = std::any_of(retained.begin(), retained.end(),
                                     [](const Retained& r) { return r.infrequent.days == -1; });
  std::vector<Recommendation> out;
  if (any_never) {
    for (auto& r : retained) {
      if (r.infrequent.days == -1) out.push_back(std::move(r.rec));
    }
    return out;
  }
  constexpr double kUnbounded = std::numeric_limits<double>::infinity();
  auto gap = [](const Retained& r) {
    return r.infrequent.ratio ? std::abs(*r.frequent.ratio - *r.infrequent.ratio) : kUnbounded;
  };
  double best = -1.0;
  for (const auto& r : retained) best = std::max(best, gap(r));
  for (auto& r : retained) {
    if (gap(r) == best) out.push_back(std::move(r.rec));
  }
  return out;
}

std::optional<Recommendation> Recommend(const CandidateList& candidates, const PurchaseLog& log,
                                        std::string_view user, Day t, Rng& rng, int months) {
  auto filtered = FilterPairsForUser(candidates, log, user, t, months);
  if (filtered.empty()) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, filtered.size() - 1);
  return std::move(filtered[pick(rng)]);
}

ItemPair RandomPair(std::span<const ItemId> catalog, const StockTable& stock, Rng& rng) {
  std::vector<const ItemId*> available;
  for (const auto& item : catalog) {
    if (InStock(stock, item)) available.push_back(&item);
  }
  if (available.size() < 2) throw ConfigError("random pair needs at least two in-stock items");
  std::uniform_int_distribution<std::size_t> first(0, available.size() - 1);
  std::uniform_int_distribution<std::size_t> second(0, available.size() - 2);
  const std::size_t a = first(rng);
  std::size_t b = second(rng);
  if (b >= a) ++b;
  return MakePair(*available[a], *available[b]);
}

Recommendation OrientForUser(const ItemPair& pair, const PurchaseLog& log, std::string_view user,
                             Day t, int months) {
  const Recency ri = Measure(log, user, pair.item_i, t, months);
  const Recency rj = Measure(log, user, pair.item_j, t, months);
  bool i_infrequent;
  if (ri.days == -1 || rj.days == -1) {
    i_infrequent = ri.days == -1;
  } else {
    constexpr double kUnbounded = std::numeric_limits<double>::infinity();
    i_infrequent = ri.ratio.value_or(kUnbounded) >= rj.ratio.value_or(kUnbounded);
  }
  Recommendation rec{std::string(user), t, pair, pair.item_j, pair.item_i};
  if (!i_infrequent) std::swap(rec.frequent_item, rec.infrequent_item);
  return rec;
}

std::string RenderMessage(const Recommendation& rec) {
  return "Pharmacies in your area typically purchase " + rec.frequent_item + " and " +
         rec.infrequent_item + ". Click here to order now!";
}

void WriteRecommendations(const std::filesystem::path& path, std::span<const Recommendation> recs,
                          bool with_message) {
  auto out = csv::OpenForWrite(path);
  csv::Writer w(out);
  auto header = kRecommendationHeader;
  if (with_message) header.push_back("message");
  w.Row(header);
  for (const auto& r : recs) {
    std::vector<std::string> row = {r.user_id, std::to_string(r.day), r.pair.item_i, r.pair.item_j,
                                    r.infrequent_item};
    if (with_message) row.push_back(RenderMessage(r));
    w.Row(row);
  }
}

}  // namespace nudgelab::itempair
