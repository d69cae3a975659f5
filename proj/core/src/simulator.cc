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

#include "nudgelab/simulator.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>

namespace nudgelab::sim {

namespace {

std::string PaddedId(const char* prefix, int index, int count) {
  const int width = static_cast<int>(std::to_string(std::max(count - 1, 0)).size());
  std::string digits = std::to_string(index);
  return prefix + std::string(static_cast<std::size_t>(width) - digits.size(), '0') + digits;
}

double LogNormal(double mu, double sigma, Rng& rng) {
  if (sigma == 0.0) return std::exp(mu);
  return std::lognormal_distribution<double>(mu, sigma)(rng);
}

bool Bernoulli(double p, Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

int Poisson(double mean, Rng& rng) {
  if (!(mean > 0.0)) return 0;
  return std::poisson_distribution<int>(mean)(rng);
}

void Require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

void PopulationSpec::Validate() const {
  Require(n_users >= 2, "population needs n_users >= 2");
  Require(n_items >= 2, "population needs n_items >= 2");
  Require(spend_log_sigma >= 0.0 && price_log_sigma >= 0.0, "log-normal sigmas must be >= 0");
  Require(weekly_purchase_rate >= 0.0 && items_per_order >= 0.0 && login_rate >= 0.0 &&
              mean_session_seconds >= 0.0,
          "population rates must be >= 0");
  Require(mean_quantity >= 1.0, "mean_quantity must be >= 1");
  Require(n_affinity_pairs >= 0 && 2 * n_affinity_pairs <= n_items,
          "affinity pairs need two distinct items each");
  Require(usual_items >= 1 && usual_items <= n_items - n_affinity_pairs,
          "usual_items must fit among the non-partner items");
  for (double p : {pair_affinity, partner_awareness, stockout_probability,
                   prior_participant_fraction}) {
    Require(p >= 0.0 && p <= 1.0, "population probabilities must lie in [0, 1]");
  }
  Require(n_attributes >= 0, "n_attributes must be >= 0");
  Require(history_days >= 1, "history_days must be >= 1");
}

Population Population::Synthesize(const PopulationSpec& spec, std::uint64_t seed) {
  spec.Validate();
  Population pop;
  pop.spec_ = spec;
  pop.seed_ = seed;
  auto rng = MakeRng(seed, "population");

  for (int i = 0; i < spec.n_items; ++i) {
    const double price = LogNormal(spec.price_log_mu, spec.price_log_sigma, rng);
    pop.items_.push_back({PaddedId("item_", i, spec.n_items),
                          std::max(0.01, std::round(price * 100.0) / 100.0)});
  }
  std::vector<int> order(static_cast<std::size_t>(spec.n_items));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> is_partner(order.size(), false);
  std::vector<double> weight(order.size(), 1.0);
  for (int k = 0; k < spec.n_affinity_pairs; ++k) {
    const int anchor = order[static_cast<std::size_t>(2 * k)];
    const int partner = order[static_cast<std::size_t>(2 * k + 1)];
    pop.pairs_.emplace_back(anchor, partner);
    is_partner[static_cast<std::size_t>(partner)] = true;
    weight[static_cast<std::size_t>(anchor)] = 3.0;  // anchors are popular
  }
  for (std::size_t i = 0; i < weight.size(); ++i) {
    if (is_partner[i]) weight[i] = 0.0;
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int u = 0; u < spec.n_users; ++u) {
    SimUser user;
    user.id = PaddedId("u", u, spec.n_users);
    user.rate_multiplier = LogNormal(spec.spend_log_mu, spec.spend_log_sigma, rng);
    user.login_probability = std::clamp(spec.login_rate * (0.5 + unit(rng)), 0.0, 1.0);
    auto w = weight;
    for (int k = 0; k < spec.usual_items; ++k) {
      std::discrete_distribution<int> pick(w.begin(), w.end());
      const int item = pick(rng);
      user.usual_items.push_back(item);
      w[static_cast<std::size_t>(item)] = 0.0;
    }
    std::sort(user.usual_items.begin(), user.usual_items.end());
    for (int k = 0; k < spec.n_affinity_pairs; ++k) {
      user.knows_partner.push_back(unit(rng) < spec.partner_awareness);
    }
    for (int a = 0; a < spec.n_attributes; ++a) user.attributes.push_back(unit(rng));
    user.prior_participant = unit(rng) < spec.prior_participant_fraction;
    pop.users_.push_back(std::move(user));
  }
  return pop;
}

std::vector<ItemId> Population::Catalog() const {
  std::vector<ItemId> ids;
  for (const auto& item : items_) ids.push_back(item.id);
  return ids;
}

traits::UserAttributes Population::Attributes() const {
  traits::UserAttributes attributes;
  if (spec_.n_attributes == 0) return attributes;
  for (const auto& u : users_) attributes[u.id] = u.attributes;
  return attributes;
}

std::vector<int> Population::DrawBasket(std::size_t user, Rng& rng) const {
  const auto& u = users_.at(user);
  const double q = std::min(1.0, spec_.items_per_order / static_cast<double>(spec_.usual_items));
  std::vector<int> basket;
  for (int item : u.usual_items) {
    if (Bernoulli(q, rng)) basket.push_back(item);
  }
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    const auto [anchor, partner] = pairs_[k];
    if (!u.knows_partner[k]) continue;
    if (!std::binary_search(u.usual_items.begin(), u.usual_items.end(), anchor)) continue;
    if (std::find(basket.begin(), basket.end(), anchor) == basket.end()) continue;
    if (Bernoulli(spec_.pair_affinity, rng)) basket.push_back(partner);
  }
  return basket;
}

StockTable Population::StockAt(Day day) const {
  auto rng = MakeRng(seed_, "stock", static_cast<std::uint64_t>(std::max<Day>(day, 0) / 7));
  StockTable stock;
  for (const auto& item : items_) stock[item.id] = !Bernoulli(spec_.stockout_probability, rng);
  return stock;
}

void EffectModel::Validate() const {
  Require(immediate_uplift >= 0.0, "immediate_uplift must be >= 0");
  Require(adopt_probability >= 0.0 && adopt_probability <= 1.0,
          "adopt_probability must lie in [0, 1]");
  Require(novelty_decay > 0.0 && novelty_decay <= 1.0, "novelty_decay must lie in (0, 1]");
  Require(!delay_weeks_pmf.empty(), "delay distribution must not be empty");
  double total = 0.0;
  for (double p : delay_weeks_pmf) {
    Require(p >= 0.0, "delay probabilities must be >= 0");
    total += p;
  }
  Require(std::abs(total - 1.0) < 1e-9, "delay probabilities must sum to 1");
  total = 0.0;
  for (double p : interaction_probabilities) {
    Require(p >= 0.0 && p <= 1.0, "interaction probabilities must lie in [0, 1]");
    total += p;
  }
  Require(std::abs(total - 1.0) < 1e-9, "interaction probabilities must sum to 1");
  for (double m : adoption_multipliers) Require(m >= 0.0, "adoption multipliers must be >= 0");
  Require(prior_participant_exposures >= 0, "prior_participant_exposures must be >= 0");
  Require(modifier_strength >= 0.0 && modifier_strength <= 1.0,
          "modifier_strength must lie in [0, 1]");
}

double EffectModel::AdoptionProbability(Interaction interaction, int exposures) const {
  std::size_t k = interaction == Interaction::kOpened ? 0 : interaction == Interaction::kClosed ? 1 : 2;
  const double p = adopt_probability * adoption_multipliers[k] * std::pow(novelty_decay, exposures);
  return std::clamp(p, 0.0, 1.0);
}

AssignmentScheme ParseAssignmentScheme(std::string_view text) {
  if (text == "adaptive") return AssignmentScheme::kAdaptive;
  if (text == "pure_random") return AssignmentScheme::kPureRandom;
  if (text == "micro_randomized") return AssignmentScheme::kMicroRandomized;
  throw ConfigError("unknown assignment scheme '" + std::string(text) + "'");
}

std::string_view ToString(AssignmentScheme scheme) {
  switch (scheme) {
    case AssignmentScheme::kAdaptive:
      return "adaptive";
    case AssignmentScheme::kPureRandom:
      return "pure_random";
    case AssignmentScheme::kMicroRandomized:
      return "micro_randomized";
  }
  return "adaptive";
}

void ExperimentDesign::Validate(const PopulationSpec& population) const {
  Require(weeks >= 0, "weeks must be >= 0");
  Require(decision_weekday >= 0 && decision_weekday < 7, "decision_weekday must lie in [0, 6]");
  if (weekday_switch) {
    Require(weekday_switch->from_week >= 1, "weekday switch week must be >= 1");
    Require(weekday_switch->weekday >= 0 && weekday_switch->weekday < 7,
            "weekday switch day must lie in [0, 6]");
  }
  for (double s : {split_pure_control, split_adaptive, split_non_adaptive}) {
    Require(s >= 0.0 && s <= 1.0, "group splits must lie in [0, 1]");
  }
  Require(std::abs(split_pure_control + split_adaptive + split_non_adaptive - 1.0) < 1e-9,
          "group splits must sum to 1");
  Require(micro_randomized_p >= 0.0 && micro_randomized_p <= 1.0,
          "micro-randomization probability must lie in [0, 1]");
  Require(candidates.months >= 1, "candidate window must be >= 1 month");
  std::vector<ArmLabel> arms = adaptive_arms;
  std::sort(arms.begin(), arms.end());
  Require(std::adjacent_find(arms.begin(), arms.end()) == arms.end(), "adaptive arms must be unique");
  if (split_adaptive > 0.0) {
    Require(adaptive_arms.size() >= 2, "the adaptive group needs at least two arms");
    Require(std::find(arms.begin(), arms.end(), ArmLabel::kControl) != arms.end(),
            "the adaptive arms must include control");
    Require(context.size() >= 1, "the adaptive group needs at least one context trait");
  }
  for (const auto& t : context.traits) {
    if (t.kind == traits::TraitKind::kAttribute) {
      Require(t.attribute_index < population.n_attributes,
              "trait '" + t.name + "' exceeds the population's attributes");
    }
  }
  if (prior) prior->Validate(static_cast<int>(context.size()) + (intercept ? 1 : 0));
}

std::vector<std::string> ExperimentDesign::ArmLabels() const {
  std::vector<std::string> labels;
  for (auto a : adaptive_arms) labels.emplace_back(ToString(a));
  return labels;
}

std::vector<Day> ExperimentDesign::DecisionDays(int history_days) const {
  std::vector<Day> days;
  Day start = history_days;
  while (start % 7 != decision_weekday) ++start;
  for (int k = 0; k < weeks; ++k) {
    Day d = start + 7 * static_cast<Day>(k);
    if (weekday_switch && k + 1 >= weekday_switch->from_week) {
      d = d - decision_weekday + weekday_switch->weekday;
      while (!days.empty() && d <= days.back()) d += 7;
    }
    days.push_back(d);
  }
  return days;
}

World::World(const Population& population, const EffectModel& effect, std::uint64_t seed,
             Day horizon)
    : population_(population), effect_(effect), horizon_(horizon) {
  const auto users = population.users();
  for (std::size_t u = 0; u < users.size(); ++u) {
    baseline_rngs_.push_back(MakeRng(seed, "baseline", u));
    user_index_[users[u].id] = u;
    exposures_[users[u].id] = users[u].prior_participant ? effect.prior_participant_exposures : 0;
  }
}

void World::Emit(PurchaseEvent e) {
  total_revenue_ += e.revenue;
  purchases_.push_back(std::move(e));
}

void World::AdvanceTo(Day last) {
  const auto& spec = population_.spec();
  const auto users = population_.users();
  const auto items = population_.items();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Day day = day_ + 1; day <= last; ++day) {
    for (std::size_t u = 0; u < users.size(); ++u) {
      auto& rng = baseline_rngs_[u];
      const double p_order = std::min(1.0, spec.weekly_purchase_rate * users[u].rate_multiplier / 7.0);
      if (unit(rng) < p_order) {
        for (int item : population_.DrawBasket(u, rng)) {
          const int quantity = 1 + Poisson(spec.mean_quantity - 1.0, rng);
          const auto& it = items[static_cast<std::size_t>(item)];
          Emit(MakePurchase(users[u].id, it.id, day, quantity, it.price));
        }
      }
      if (unit(rng) < users[u].login_probability) {
        const double seconds =
            spec.mean_session_seconds > 0.0
                ? std::round(std::exponential_distribution<double>(1.0 / spec.mean_session_seconds)(rng))
                : 0.0;
        logins_.push_back({users[u].id, day, seconds});
      }
    }
    auto [lo, hi] = pending_.equal_range(day);
    for (auto it = lo; it != hi; ++it) Emit(std::move(it->second));
    pending_.erase(lo, hi);
  }
  day_ = std::max(day_, last);
}

int World::exposures(std::string_view user) const {
  auto it = exposures_.find(user);
  return it == exposures_.end() ? 0 : it->second;
}

std::vector<NudgeEvent> World::Deliver(std::span<const Delivery> deliveries, Rng& rng) {
  std::vector<NudgeEvent> out;
  std::discrete_distribution<int> interaction(effect_.interaction_probabilities.begin(),
                                              effect_.interaction_probabilities.end());
  std::discrete_distribution<int> delay(effect_.delay_weeks_pmf.begin(),
                                        effect_.delay_weeks_pmf.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& d : deliveries) {
    auto idx = user_index_.find(d.user_id);
    if (idx == user_index_.end()) throw ConfigError("delivery to unknown user '" + d.user_id + "'");
    NudgeEvent e;
    e.user_id = d.user_id;
    e.day = day_;
    e.arm = d.arm;
    e.interaction = Interaction::kIgnored;
    if (d.arm != ArmLabel::kControl && d.recommendation) {
      const auto& rec = *d.recommendation;
      e.pair = std::make_pair(rec.frequent_item, rec.infrequent_item);
      e.interaction = kAllInteractions[interaction(rng)];
      int& seen = exposures_[d.user_id];
      const double p = effect_.AdoptionProbability(e.interaction, seen);
      ++seen;
      if (unit(rng) < p) {
        const Day when = day_ + 7 * static_cast<Day>(delay(rng)) + 1;
        const auto& user = population_.users()[idx->second];
        double amount = effect_.immediate_uplift;
        if (effect_.modifier_attribute >= 0) {
          const double v = user.attributes.at(static_cast<std::size_t>(effect_.modifier_attribute));
          amount *= (1.0 - effect_.modifier_strength) + 2.0 * effect_.modifier_strength * v;
        }
        double price = 0.0;
        for (const auto& item : population_.items()) {
          if (item.id == rec.infrequent_item) price = item.price;
        }
        const int quantity = price > 0.0 ? Poisson(amount / price, rng) : 0;
        if (quantity > 0 && when <= horizon_) {
          pending_.emplace(when, MakePurchase(d.user_id, rec.infrequent_item, when, quantity, price));
        }
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<NudgeEvent> StepWeek(World& world, std::span<const World::Delivery> deliveries,
                                 Day next_day, Rng& rng) {
  auto nudges = world.Deliver(deliveries, rng);
  world.AdvanceTo(next_day);
  return nudges;
}

namespace {

// Largest-remainder apportionment of n users over the split fractions.
std::array<std::size_t, 3> Apportion(std::size_t n, const std::array<double, 3>& splits) {
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> rem{};
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double quota = splits[k] * static_cast<double>(n);
    counts[k] = static_cast<std::size_t>(std::floor(quota + 1e-9));
    rem[k] = quota - static_cast<double>(counts[k]);
    assigned += counts[k];
  }
  while (assigned < n) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < 3; ++k) {
      if (rem[k] > rem[best]) best = k;
    }
    ++counts[best];
    rem[best] = -1.0;
    ++assigned;
  }
  return counts;
}

struct PendingUpdate {
  std::size_t decision;
  std::vector<double> traits;
};

}  // namespace

SimResult RunExperiment(const ExperimentDesign& design, const Population& population,
                        const EffectModel& effect, std::uint64_t seed) {
  design.Validate(population.spec());
  effect.Validate();
  if (effect.modifier_attribute >= population.spec().n_attributes) {
    throw ConfigError("effect modifier attribute exceeds the population's attributes");
  }
  SimResult res;
  res.ground_truth = effect;
  res.seed = seed;
  res.arm_labels = design.ArmLabels();
  res.catalog = population.Catalog();
  res.attributes = population.Attributes();
  res.start_day = population.spec().history_days;
  res.end_day = res.start_day - 1;
  if (design.weeks == 0) return res;

  const auto days = design.DecisionDays(population.spec().history_days);
  const Day horizon = days.back() + 7;
  res.decision_days = days;
  res.start_day = days.front();
  res.end_day = horizon;

  World world(population, effect, seed, horizon);
  world.AdvanceTo(days.front());

  // Participants and groups.
  auto eligible = traits::EligibleCohort(PurchaseLog(world.purchases()), LoginLog(world.logins()),
                                         days.front(), design.cohort);
  if (eligible.empty()) throw InfeasibleError("no eligible users at the first decision day");
  auto group_rng = MakeRng(seed, "groups");
  std::shuffle(eligible.begin(), eligible.end(), group_rng);
  const auto counts = Apportion(
      eligible.size(), {design.split_pure_control, design.split_adaptive, design.split_non_adaptive});
  std::map<UserId, bool, std::less<>> prior_flag;
  for (const auto& u : population.users()) prior_flag[u.id] = u.prior_participant;
  std::vector<UserId> adaptive, non_adaptive;
  for (std::size_t i = 0; i < eligible.size(); ++i) {
    impact::Group g = i < counts[0]                ? impact::Group::kPureControl
                      : i < counts[0] + counts[1] ? impact::Group::kAdaptive
                                                  : impact::Group::kNonAdaptive;
    res.groups[eligible[i]] = {eligible[i], g, prior_flag[eligible[i]]};
    if (g == impact::Group::kAdaptive) adaptive.push_back(eligible[i]);
    if (g == impact::Group::kNonAdaptive) non_adaptive.push_back(eligible[i]);
  }
  std::sort(adaptive.begin(), adaptive.end());
  std::sort(non_adaptive.begin(), non_adaptive.end());

  const int n_traits = static_cast<int>(design.context.size());
  const int dim = n_traits + (design.intercept ? 1 : 0);
  std::optional<bandit::Model> model;
  if (!adaptive.empty()) {
    model.emplace(res.arm_labels, n_traits, design.prior ? *design.prior : bandit::Prior::Default(dim),
                  design.intercept);
  }
  const int n_arms = static_cast<int>(res.arm_labels.size());
  const int control_arm = model ? model->ArmIndex(ToString(ArmLabel::kControl)) : -1;

  auto policy_rng = MakeRng(seed, "policy");
  auto rec_rng = MakeRng(seed, "recommend");
  auto effect_rng = MakeRng(seed, "effect");
  std::vector<PendingUpdate> pending;
  const int months = design.candidates.months;

  auto settle = [&](const PurchaseLog& log, Day now) {
    std::vector<PendingUpdate> keep;
    for (auto& p : pending) {
      const auto& d = res.decisions[p.decision];
      if (d.day + 7 > now) {
        keep.push_back(std::move(p));
        continue;
      }
      const double r = traits::ComputeReward(log, d.user_id, d.day).reward;
      model->Update(d.chosen_arm, p.traits, r);
      res.adaptive_reward += r;
    }
    pending = std::move(keep);
  };

  for (std::size_t k = 0; k < days.size(); ++k) {
    const Day d = days[k];
    world.AdvanceTo(d);
    BehaviorLogs logs{PurchaseLog(world.purchases()), LoginLog(world.logins()), NudgeLog(res.nudges)};
    if (model) settle(logs.purchases, d);
    const auto stock = population.StockAt(d);
    const auto candidates =
        itempair::GenerateCandidatePairs(logs.purchases, stock, d, design.candidates);
    auto random_rec = [&](const UserId& u) -> std::optional<itempair::Recommendation> {
      try {
        const auto pair = itempair::RandomPair(res.catalog, stock, rec_rng);
        auto rec = itempair::OrientForUser(pair, logs.purchases, u, d, months);
        rec.day = d;
        return rec;
      } catch (const ConfigError&) {
        return std::nullopt;
      }
    };

    std::vector<World::Delivery> deliveries;
    if (!adaptive.empty()) {
      const traits::TraitSources sources{logs, &res.attributes};
      const auto contexts = traits::ComputeContexts(sources, adaptive, d, design.context);
      for (std::size_t i = 0; i < adaptive.size(); ++i) {
        const auto& u = adaptive[i];
        const auto personal = itempair::Recommend(candidates, logs.purchases, u, d, rec_rng, months);
        std::vector<bool> feasible(static_cast<std::size_t>(n_arms), true);
        for (int a = 0; a < n_arms; ++a) {
          if (design.adaptive_arms[static_cast<std::size_t>(a)] == ArmLabel::kPersonalized) {
            feasible[static_cast<std::size_t>(a)] = personal.has_value();
          }
        }
        bandit::Decision dec;
        dec.user_id = u;
        dec.day = d;
        if (design.scheme == AssignmentScheme::kAdaptive) {
          dec.sampled_scores = bandit::SampleScores(*model, contexts[i].values, policy_rng, design.sampling);
          for (int a = 0; a < n_arms; ++a) {
            if (!feasible[static_cast<std::size_t>(a)]) {
              dec.sampled_scores[static_cast<std::size_t>(a)] = -std::numeric_limits<double>::infinity();
            }
          }
        } else {
          std::vector<double> probs(static_cast<std::size_t>(n_arms), 0.0);
          std::vector<int> nudge_arms;
          for (int a = 0; a < n_arms; ++a) {
            if (a != control_arm && feasible[static_cast<std::size_t>(a)]) nudge_arms.push_back(a);
          }
          if (design.scheme == AssignmentScheme::kPureRandom) {
            const double share = 1.0 / static_cast<double>(nudge_arms.size() + 1);
            probs[static_cast<std::size_t>(control_arm)] = share;
            for (int a : nudge_arms) probs[static_cast<std::size_t>(a)] = share;
          } else if (nudge_arms.empty()) {
            probs[static_cast<std::size_t>(control_arm)] = 1.0;
          } else {
            probs[static_cast<std::size_t>(control_arm)] = 1.0 - design.micro_randomized_p;
            for (int a : nudge_arms) {
              probs[static_cast<std::size_t>(a)] =
                  design.micro_randomized_p / static_cast<double>(nudge_arms.size());
            }
          }
          dec.sampled_scores = probs;
          dec.assignment_probabilities = probs;
        }
        if (design.scheme == AssignmentScheme::kAdaptive) {
          dec.chosen_arm = bandit::ArgMax(dec.sampled_scores);
        } else {
          std::discrete_distribution<int> pick(dec.sampled_scores.begin(), dec.sampled_scores.end());
          dec.chosen_arm = pick(policy_rng);
        }
        const ArmLabel arm = design.adaptive_arms[static_cast<std::size_t>(dec.chosen_arm)];
        World::Delivery delivery{u, arm, std::nullopt};
        if (arm == ArmLabel::kPersonalized) delivery.recommendation = personal;
        if (arm == ArmLabel::kRandom) delivery.recommendation = random_rec(u);
        if (arm != ArmLabel::kControl && !delivery.recommendation) delivery.arm = ArmLabel::kControl;
        deliveries.push_back(std::move(delivery));
        pending.push_back({res.decisions.size(), contexts[i].values});
        res.decisions.push_back(std::move(dec));
      }
    }
    for (const auto& u : non_adaptive) {
      World::Delivery delivery{u, ArmLabel::kRandom, random_rec(u)};
      if (!delivery.recommendation) delivery.arm = ArmLabel::kControl;
      deliveries.push_back(std::move(delivery));
    }
    auto sent = world.Deliver(deliveries, effect_rng);
    res.nudges.insert(res.nudges.end(), sent.begin(), sent.end());
  }

  world.AdvanceTo(horizon);
  if (model) settle(PurchaseLog(world.purchases()), horizon);
  res.purchases = world.purchases();
  res.logins = world.logins();
  res.total_revenue = world.total_revenue();
  res.final_stock = population.StockAt(days.back());
  return res;
}

report::AnalysisInputs AnalysisInputsFor(const SimResult& result) {
  report::AnalysisInputs in;
  in.purchases = result.purchases;
  in.logins = result.logins;
  in.nudges = result.nudges;
  in.decisions = result.decisions;
  in.arm_labels = result.arm_labels;
  in.groups = result.groups;
  in.attributes = result.attributes;
  in.decision_days = result.decision_days;
  in.start_day = result.start_day;
  in.end_day = std::max(result.end_day, result.start_day);
  return in;
}

report::AnalysisOptions AnalysisOptionsFor(const ExperimentDesign& design, double alpha,
                                           std::uint64_t seed) {
  report::AnalysisOptions options;
  options.alpha = alpha;
  options.context = design.context;
  options.prior = design.prior;
  options.intercept = design.intercept;
  options.seed = seed;
  return options;
}

std::vector<Replication> Replicate(const ExperimentDesign& design, const PopulationSpec& spec,
                                   const EffectModel& effect, int n_reps, std::uint64_t base_seed,
                                   double alpha) {
  if (n_reps < 1) throw ConfigError("n_reps must be >= 1");
  std::vector<Replication> out;
  for (int r = 0; r < n_reps; ++r) {
    const auto seed = DeriveSeed(base_seed, "rep", static_cast<std::uint64_t>(r));
    const auto population = Population::Synthesize(spec, seed);
    const auto result = RunExperiment(design, population, effect, seed);
    out.push_back({seed, result.adaptive_reward,
                   report::Analyze(AnalysisInputsFor(result), AnalysisOptionsFor(design, alpha, seed))});
  }
  return out;
}

}  // namespace nudgelab::sim
