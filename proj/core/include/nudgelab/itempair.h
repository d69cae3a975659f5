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

#ifndef NUDGELAB_ITEMPAIR_H_
#define NUDGELAB_ITEMPAIR_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nudgelab/common.h"
#include "nudgelab/logs.h"
#include "nudgelab/rng.h"

// Co-purchase pair recommendations: a population-level candidate list of
// pairs bought together, filtered per user down to pairs where one item is
// bought on cadence and the other is new (or lapsed) for that user.
namespace nudgelab::itempair {

// Unordered pair stored canonically with item_i < item_j.
struct ItemPair {
  ItemId item_i;
  ItemId item_j;
  long co_purchase_count = 0;
  double co_purchase_revenue = 0.0;

  friend bool operator==(const ItemPair& a, const ItemPair& b) {
    return a.item_i == b.item_i && a.item_j == b.item_j;
  }
};

// Canonicalizes (a, b); throws ConfigError when a == b.
ItemPair MakePair(ItemId a, ItemId b);

enum class RankingMode { kCount, kRevenue };

RankingMode ParseRankingMode(std::string_view text);

struct CandidateList {
  Day as_of_day = 0;
  RankingMode ranking_mode = RankingMode::kRevenue;
  std::vector<ItemPair> pairs;  // descending rank
};

struct CandidateOptions {
  int months = 3;
  RankingMode mode = RankingMode::kRevenue;
  std::size_t max_pairs = 100;
};

// Pairs bought by the same user on the same day within (t - 30 * months, t],
// ranked by `mode` (ties: revenue, then count, then item ids), truncated to
// `max_pairs`, then restricted to pairs with both items in stock.
CandidateList GenerateCandidatePairs(const PurchaseLog& log, const StockTable& stock, Day t,
                                     const CandidateOptions& options = {});

struct Recommendation {
  UserId user_id;
  Day day = 0;
  ItemPair pair;
  ItemId frequent_item;
  ItemId infrequent_item;
};

// Per-user filtering of `candidates`, preserving candidate order:
//  (a) one item is bought recently relative to its cadence (ratio in (0, 1));
//  (b) the other was never bought or is off cadence (ratio not in (0, 1));
//  (c) pairs whose other item was never bought take precedence; otherwise
//      only the pairs with the largest recency-ratio gap are kept. An item
//      without a defined cadence counts as an unbounded gap.
std::vector<Recommendation> FilterPairsForUser(const CandidateList& candidates,
                                               const PurchaseLog& log, std::string_view user,
                                               Day t, int months = 3);

// Uniform choice among the filtered pairs; empty when none qualifies.
std::optional<Recommendation> Recommend(const CandidateList& candidates, const PurchaseLog& log,
                                        std::string_view user, Day t, Rng& rng, int months = 3);

// Two distinct in-stock catalog items chosen uniformly without replacement.
// Throws ConfigError with fewer than two in-stock items.
ItemPair RandomPair(std::span<const ItemId> catalog, const StockTable& stock, Rng& rng);

// Which member of an arbitrary pair counts as the infrequent item for
// `user`: a never-bought item first (item_i on ties), otherwise the item
// with the larger recency ratio, an undefined ratio counting as largest.
Recommendation OrientForUser(const ItemPair& pair, const PurchaseLog& log, std::string_view user,
                             Day t, int months = 3);

// "Pharmacies in your area typically purchase A and B. Click here to order now!"
std::string RenderMessage(const Recommendation& rec);

inline const std::vector<std::string> kRecommendationHeader = {"user_id", "day", "item_i", "item_j",
                                                               "infrequent_item"};

void WriteRecommendations(const std::filesystem::path& path, std::span<const Recommendation> recs,
                          bool with_message);

}  // namespace nudgelab::itempair

#endif  // NUDGELAB_ITEMPAIR_H_
