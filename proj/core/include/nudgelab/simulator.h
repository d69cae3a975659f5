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

#ifndef NUDGELAB_SIMULATOR_H_
#define NUDGELAB_SIMULATOR_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nudgelab/bandit.h"
#include "nudgelab/common.h"
#include "nudgelab/impact.h"
#include "nudgelab/itempair.h"
#include "nudgelab/logs.h"
#include "nudgelab/report.h"
#include "nudgelab/rng.h"
#include "nudgelab/traits.h"

// Synthetic pharmacy populations with a known nudge effect, and weekly
// experiment runs (bandit-assigned, non-adaptive and pure-control groups)
// over them.
namespace nudgelab::sim {

struct PopulationSpec {
  int n_users = 200;
  int n_items = 40;
  // Per-user order-rate multiplier ~ LogNormal(spend_log_mu, spend_log_sigma).
  double spend_log_mu = 0.0;
  double spend_log_sigma = 0.5;
  double weekly_purchase_rate = 2.0;  // order days per week at multiplier 1
  double items_per_order = 3.0;       // expected habitual items per order
  int usual_items = 8;                // habitual items per user
  double mean_quantity = 2.0;         // quantity ~ 1 + Poisson(mean_quantity - 1)
  double price_log_mu = 2.3;
  double price_log_sigma = 0.5;
  // Affinity pairs (anchor, partner): when the anchor is in a basket the
  // partner joins with probability pair_affinity, but only for users who
  // know the partner (each does with probability partner_awareness).
  int n_affinity_pairs = 10;
  double pair_affinity = 0.5;
  double partner_awareness = 0.5;
  double login_rate = 0.6;  // mean daily login probability
  double mean_session_seconds = 300.0;
  double stockout_probability = 0.05;  // per item, redrawn every 7 days
  int n_attributes = 0;                // static uniform(0, 1) attributes
  double prior_participant_fraction = 0.0;
  int history_days = 120;  // days simulated before the first decision

  void Validate() const;
};

struct SimItem {
  ItemId id;
  double price = 0.0;
};

struct SimUser {
  UserId id;
  double rate_multiplier = 1.0;
  double login_probability = 0.0;
  std::vector<int> usual_items;
  std::vector<bool> knows_partner;  // per affinity pair
  std::vector<double> attributes;
  bool prior_participant = false;
};

class Population {
 public:
  static Population Synthesize(const PopulationSpec& spec, std::uint64_t seed);

  const PopulationSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }
  std::span<const SimItem> items() const { return items_; }
  std::span<const SimUser> users() const { return users_; }
  std::span<const std::pair<int, int>> affinity_pairs() const { return pairs_; }
  std::vector<ItemId> Catalog() const;
  traits::UserAttributes Attributes() const;

  // Item indices of one order occasion of `user`; may be empty.
  std::vector<int> DrawBasket(std::size_t user, Rng& rng) const;
  // Availability during the 7-day block containing `day`.
  StockTable StockAt(Day day) const;

 private:
  PopulationSpec spec_;
  std::uint64_t seed_ = 0;
  std::vector<SimItem> items_;
  std::vector<SimUser> users_;
  std::vector<std::pair<int, int>> pairs_;
};

struct EffectModel {
  double immediate_uplift = 0.0;  // expected extra spend per adoption
  double adopt_probability = 0.0;
  // P(delay = k weeks), k = 0, 1, ...; an adoption after a nudge on day d
  // lands on day d + 7 k + 1.
  std::vector<double> delay_weeks_pmf = {1.0};
  double novelty_decay = 1.0;  // per earlier exposure
  // Indexed opened, closed, ignored.
  std::array<double, 3> interaction_probabilities = {0.10, 0.35, 0.55};
  std::array<double, 3> adoption_multipliers = {1.5, 1.2, 0.8};
  // Exposures credited to prior participants before the run starts.
  int prior_participant_exposures = 0;
  // Optional context dependence: uplift scaled by (1 - s) + 2 s v, where v
  // is the user's attribute `modifier_attribute` and s the strength.
  int modifier_attribute = -1;
  double modifier_strength = 0.0;

  void Validate() const;
  // adopt_probability * multiplier(interaction) * novelty_decay^exposures.
  double AdoptionProbability(Interaction interaction, int exposures) const;
};

enum class AssignmentScheme { kAdaptive, kPureRandom, kMicroRandomized };
AssignmentScheme ParseAssignmentScheme(std::string_view text);
std::string_view ToString(AssignmentScheme scheme);

struct WeekdaySwitch {
  int from_week = 0;  // 1-based decision point from which the new weekday applies
  int weekday = 0;
};

struct ExperimentDesign {
  int weeks = 8;
  int decision_weekday = 0;  // day % 7 of decision days
  std::optional<WeekdaySwitch> weekday_switch;
  double split_pure_control = 0.35;
  double split_adaptive = 0.60;
  double split_non_adaptive = 0.05;
  std::vector<ArmLabel> adaptive_arms = {ArmLabel::kControl, ArmLabel::kPersonalized};
  AssignmentScheme scheme = AssignmentScheme::kAdaptive;
  double micro_randomized_p = 0.5;  // nudge probability under kMicroRandomized
  traits::ContextSpec context;
  traits::CohortRules cohort;
  std::optional<bandit::Prior> prior;  // default prior when empty
  bool intercept = true;
  bandit::SamplingMethod sampling = bandit::SamplingMethod::kTwoStep;
  itempair::CandidateOptions candidates;

  // Throws ConfigError for inconsistent settings.
  void Validate(const PopulationSpec& population) const;
  std::vector<std::string> ArmLabels() const;
  // Decision days of a run whose history covers days [0, history_days).
  std::vector<Day> DecisionDays(int history_days) const;
};

struct SimResult {
  std::vector<PurchaseEvent> purchases;
  std::vector<LoginEvent> logins;
  std::vector<NudgeEvent> nudges;
  std::vector<bandit::Decision> decisions;
  impact::GroupMap groups;
  traits::UserAttributes attributes;
  std::vector<ItemId> catalog;
  StockTable final_stock;
  std::vector<std::string> arm_labels;
  std::vector<Day> decision_days;
  Day start_day = 0;
  Day end_day = -1;  // last simulated day
  double total_revenue = 0.0;
  double adaptive_reward = 0.0;  // sum of rewards over bandit decisions
  EffectModel ground_truth;
  std::uint64_t seed = 0;
};

// Day-by-day state of a run: baseline behavior from per-user streams (so
// different policies on one seed see the same baseline), pending adopted
// purchases and per-user exposure counts.
class World {
 public:
  World(const Population& population, const EffectModel& effect, std::uint64_t seed, Day horizon);

  Day current_day() const { return day_; }
  // Simulates days (current_day, last].
  void AdvanceTo(Day last);

  struct Delivery {
    UserId user_id;
    ArmLabel arm = ArmLabel::kControl;
    std::optional<itempair::Recommendation> recommendation;
  };
  // Records messages sent on the current day, samples interactions and
  // schedules adoptions that land no later than the horizon.
  std::vector<NudgeEvent> Deliver(std::span<const Delivery> deliveries, Rng& rng);

  const std::vector<PurchaseEvent>& purchases() const { return purchases_; }
  const std::vector<LoginEvent>& logins() const { return logins_; }
  double total_revenue() const { return total_revenue_; }
  int exposures(std::string_view user) const;

 private:
  void Emit(PurchaseEvent e);

  const Population& population_;
  EffectModel effect_;
  Day horizon_;
  Day day_ = -1;
  std::vector<Rng> baseline_rngs_;
  std::map<UserId, std::size_t, std::less<>> user_index_;
  std::map<UserId, int, std::less<>> exposures_;
  std::multimap<Day, PurchaseEvent> pending_;
  std::vector<PurchaseEvent> purchases_;
  std::vector<LoginEvent> logins_;
  double total_revenue_ = 0.0;
};

// Delivers one week's messages and simulates up to `next_day`.
std::vector<NudgeEvent> StepWeek(World& world, std::span<const World::Delivery> deliveries,
                                 Day next_day, Rng& rng);

// Full run: eligibility at the first decision day, group split by largest
// remainder, weekly decisions, bandit updates once each reward window has
// closed. weeks = 0 yields empty logs.
SimResult RunExperiment(const ExperimentDesign& design, const Population& population,
                        const EffectModel& effect, std::uint64_t seed);

report::AnalysisInputs AnalysisInputsFor(const SimResult& result);
report::AnalysisOptions AnalysisOptionsFor(const ExperimentDesign& design, double alpha,
                                           std::uint64_t seed);

struct Replication {
  std::uint64_t seed = 0;
  double adaptive_reward = 0.0;
  report::ImpactReport report;
};

// n_reps independent runs with seeds DeriveSeed(base_seed, "rep", r), each
// on its own synthesized population and fully analyzed.
std::vector<Replication> Replicate(const ExperimentDesign& design, const PopulationSpec& spec,
                                   const EffectModel& effect, int n_reps, std::uint64_t base_seed,
                                   double alpha = 0.1);

}  // namespace nudgelab::sim

#endif  // NUDGELAB_SIMULATOR_H_
