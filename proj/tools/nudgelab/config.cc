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

#include "config.h"

#include <fstream>
#include <set>

namespace nudgelab::cli {

using nlohmann::json;

namespace {

// Typed, strict view of one JSON object.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError(name_ + " must be a JSON object");
  }

  template <typename T>
  void Get(const std::string& key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(name_ + "." + key + ": " + e.what());
    }
  }

  template <typename T>
  void Get(const std::string& key, std::optional<T>& out) {
    T value{};
    if (!Has(key)) {
      seen_.insert(key);
      return;
    }
    Get(key, value);
    out = value;
  }

  bool Has(const std::string& key) const { return j_.contains(key); }

  std::optional<Section> Child(const std::string& key) {
    seen_.insert(key);
    if (!Has(key)) return std::nullopt;
    return Section(j_.at(key), name_ + "." + key);
  }

  const json& At(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void Finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown config key " + name_ + "." + key);
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

std::filesystem::path Resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

template <typename T, std::size_t N>
void GetArray(Section& s, const std::string& key, std::array<T, N>& out) {
  std::vector<T> v;
  s.Get(key, v);
  if (v.empty()) return;
  if (v.size() != N) throw ConfigError(key + " needs " + std::to_string(N) + " entries");
  std::copy(v.begin(), v.end(), out.begin());
}

void ParsePopulation(Section s, sim::PopulationSpec& p) {
  s.Get("n_users", p.n_users);
  s.Get("n_items", p.n_items);
  s.Get("spend_log_mu", p.spend_log_mu);
  s.Get("spend_log_sigma", p.spend_log_sigma);
  s.Get("weekly_purchase_rate", p.weekly_purchase_rate);
  s.Get("items_per_order", p.items_per_order);
  s.Get("usual_items", p.usual_items);
  s.Get("mean_quantity", p.mean_quantity);
  s.Get("price_log_mu", p.price_log_mu);
  s.Get("price_log_sigma", p.price_log_sigma);
  s.Get("n_affinity_pairs", p.n_affinity_pairs);
  s.Get("pair_affinity", p.pair_affinity);
  s.Get("partner_awareness", p.partner_awareness);
  s.Get("login_rate", p.login_rate);
  s.Get("mean_session_seconds", p.mean_session_seconds);
  s.Get("stockout_probability", p.stockout_probability);
  s.Get("n_attributes", p.n_attributes);
  s.Get("prior_participant_fraction", p.prior_participant_fraction);
  s.Get("history_days", p.history_days);
  s.Finish();
  p.Validate();
}

void ParseEffect(Section s, sim::EffectModel& e) {
  s.Get("immediate_uplift", e.immediate_uplift);
  s.Get("adopt_probability", e.adopt_probability);
  s.Get("delay_weeks_pmf", e.delay_weeks_pmf);
  s.Get("novelty_decay", e.novelty_decay);
  GetArray(s, "interaction_probabilities", e.interaction_probabilities);
  GetArray(s, "adoption_multipliers", e.adoption_multipliers);
  s.Get("prior_participant_exposures", e.prior_participant_exposures);
  s.Get("modifier_attribute", e.modifier_attribute);
  s.Get("modifier_strength", e.modifier_strength);
  s.Finish();
  e.Validate();
}

bandit::Prior ParsePrior(Section s, int dim) {
  bandit::Prior prior = bandit::Prior::Default(dim);
  double scale = 1.0;
  s.Get("precision_scale", scale);
  prior.precision *= scale;
  std::vector<double> mean;
  s.Get("mean", mean);
  if (!mean.empty()) {
    if (static_cast<int>(mean.size()) != dim) throw ConfigError("prior.mean has wrong length");
    prior.mean = Eigen::Map<Eigen::VectorXd>(mean.data(), dim);
  }
  std::vector<std::vector<double>> precision;
  s.Get("precision", precision);
  if (!precision.empty()) {
    if (static_cast<int>(precision.size()) != dim) throw ConfigError("prior.precision has wrong size");
    for (int r = 0; r < dim; ++r) {
      if (static_cast<int>(precision[static_cast<std::size_t>(r)].size()) != dim) {
        throw ConfigError("prior.precision has wrong size");
      }
      for (int c = 0; c < dim; ++c) prior.precision(r, c) = precision[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
  }
  s.Get("shape", prior.shape);
  s.Get("rate", prior.rate);
  s.Finish();
  prior.Validate(dim);
  return prior;
}

void ParseCohort(Section s, traits::CohortRules& c) {
  s.Get("login_recency_days", c.login_recency_days);
  s.Get("login_frequency_window_days", c.login_frequency_window_days);
  s.Get("min_logins_per_week", c.min_logins_per_week);
  s.Get("exclude_top_spender_pct", c.exclude_top_spender_pct);
  s.Get("spend_window_days", c.spend_window_days);
  s.Finish();
}

void ParseDesign(Section s, sim::ExperimentDesign& d) {
  s.Get("weeks", d.weeks);
  s.Get("decision_weekday", d.decision_weekday);
  if (auto sw = s.Child("weekday_switch")) {
    sim::WeekdaySwitch w;
    sw->Get("from_week", w.from_week);
    sw->Get("weekday", w.weekday);
    sw->Finish();
    d.weekday_switch = w;
  }
  if (auto sp = s.Child("splits")) {
    sp->Get("pure_control", d.split_pure_control);
    sp->Get("adaptive", d.split_adaptive);
    sp->Get("non_adaptive", d.split_non_adaptive);
    sp->Finish();
  }
  std::vector<std::string> arms;
  s.Get("adaptive_arms", arms);
  if (!arms.empty()) {
    d.adaptive_arms.clear();
    for (const auto& a : arms) {
      try {
        d.adaptive_arms.push_back(ParseArmLabel(a));
      } catch (const DataError& e) {
        throw ConfigError(e.what());
      }
    }
  }
  std::string scheme = std::string(sim::ToString(d.scheme));
  s.Get("scheme", scheme);
  d.scheme = sim::ParseAssignmentScheme(scheme);
  s.Get("micro_randomized_p", d.micro_randomized_p);
  std::vector<std::string> context = d.context.Names();
  int cap = d.context.nudge_cap_days;
  s.Get("context", context);
  s.Get("nudge_cap_days", cap);
  d.context = traits::ContextSpec::FromNames(context, cap);
  if (auto c = s.Child("cohort")) ParseCohort(*c, d.cohort);
  s.Get("intercept", d.intercept);
  if (auto p = s.Child("prior")) {
    d.prior = ParsePrior(*p, static_cast<int>(d.context.size()) + (d.intercept ? 1 : 0));
  }
  std::string sampling = d.sampling == bandit::SamplingMethod::kTwoStep ? "two_step" : "student_t";
  s.Get("sampling", sampling);
  d.sampling = bandit::ParseSamplingMethod(sampling);
  if (auto c = s.Child("candidates")) {
    c->Get("months", d.candidates.months);
    std::string mode = d.candidates.mode == itempair::RankingMode::kCount ? "count" : "revenue";
    c->Get("mode", mode);
    d.candidates.mode = itempair::ParseRankingMode(mode);
    c->Get("max_pairs", d.candidates.max_pairs);
    c->Finish();
  }
  s.Finish();
}

}  // namespace

RunConfig ParseConfig(const json& j, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  cfg.base_dir = base_dir;
  cfg.raw = j;
  Section root(j, "config");
  root.Get("seed", cfg.seed);
  root.Get("alpha", cfg.alpha);
  std::optional<std::string> out;
  root.Get("out", out);
  if (out) cfg.out = Resolve(base_dir, *out);
  if (auto s = root.Child("population")) ParsePopulation(*s, cfg.population);
  if (auto s = root.Child("effect")) ParseEffect(*s, cfg.effect);
  if (auto s = root.Child("design")) ParseDesign(*s, cfg.design);
  if (auto s = root.Child("inputs")) {
    auto path = [&](const char* key, std::optional<std::filesystem::path>& dst) {
      std::optional<std::string> v;
      s->Get(key, v);
      if (v) dst = Resolve(base_dir, *v);
    };
    path("purchases", cfg.inputs.purchases);
    path("logins", cfg.inputs.logins);
    path("nudges", cfg.inputs.nudges);
    path("decisions", cfg.inputs.decisions);
    path("groups", cfg.inputs.groups);
    path("attributes", cfg.inputs.attributes);
    path("stock", cfg.inputs.stock);
    path("model", cfg.inputs.model);
    path("report", cfg.inputs.report);
    s->Finish();
  }
  if (auto s = root.Child("analysis")) {
    s->Get("start_day", cfg.analysis.start_day);
    s->Get("end_day", cfg.analysis.end_day);
    s->Get("decision_days", cfg.analysis.decision_days);
    s->Get("lambda_factor", cfg.analysis.lambda_factor);
    s->Get("tau", cfg.analysis.tau);
    s->Get("reml", cfg.analysis.reml);
    s->Get("best_arm_draws", cfg.analysis.best_arm_draws);
    s->Get("baseline_days", cfg.analysis.baseline_days);
    s->Finish();
  }
  if (auto s = root.Child("recommend")) {
    s->Get("day", cfg.recommend.day);
    s->Get("eligible_only", cfg.recommend.eligible_only);
    s->Get("with_message", cfg.recommend.with_message);
    s->Finish();
  }
  if (auto s = root.Child("assign")) {
    s->Get("day", cfg.assign.day);
    s->Get("method", cfg.assign.method);
    s->Get("ucb_alpha", cfg.assign.ucb_alpha);
    s->Finish();
    if (cfg.assign.method != "thompson" && cfg.assign.method != "ucb") {
      throw ConfigError("assign.method must be thompson or ucb");
    }
  }
  root.Finish();
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  return cfg;
}

RunConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return ParseConfig(j, path.parent_path());
}

json DesignToJson(const sim::ExperimentDesign& d) {
  json j;
  j["weeks"] = d.weeks;
  j["decision_weekday"] = d.decision_weekday;
  if (d.weekday_switch) {
    j["weekday_switch"] = {{"from_week", d.weekday_switch->from_week},
                           {"weekday", d.weekday_switch->weekday}};
  }
  j["splits"] = {{"pure_control", d.split_pure_control},
                 {"adaptive", d.split_adaptive},
                 {"non_adaptive", d.split_non_adaptive}};
  j["adaptive_arms"] = d.ArmLabels();
  j["scheme"] = std::string(sim::ToString(d.scheme));
  j["micro_randomized_p"] = d.micro_randomized_p;
  j["context"] = d.context.Names();
  j["nudge_cap_days"] = d.context.nudge_cap_days;
  j["cohort"] = {{"login_recency_days", d.cohort.login_recency_days},
                 {"login_frequency_window_days", d.cohort.login_frequency_window_days},
                 {"min_logins_per_week", d.cohort.min_logins_per_week},
                 {"exclude_top_spender_pct", d.cohort.exclude_top_spender_pct},
                 {"spend_window_days", d.cohort.spend_window_days}};
  j["intercept"] = d.intercept;
  if (d.prior) {
    const auto& p = *d.prior;
    std::vector<std::vector<double>> precision;
    for (Eigen::Index r = 0; r < p.precision.rows(); ++r) {
      precision.emplace_back(p.precision.row(r).begin(), p.precision.row(r).end());
    }
    j["prior"] = {{"mean", std::vector<double>(p.mean.begin(), p.mean.end())},
                  {"precision", precision},
                  {"shape", p.shape},
                  {"rate", p.rate}};
  }
  j["sampling"] = d.sampling == bandit::SamplingMethod::kTwoStep ? "two_step" : "student_t";
  j["candidates"] = {{"months", d.candidates.months},
                     {"mode", d.candidates.mode == itempair::RankingMode::kCount ? "count" : "revenue"},
                     {"max_pairs", d.candidates.max_pairs}};
  return j;
}

}  // namespace nudgelab::cli
