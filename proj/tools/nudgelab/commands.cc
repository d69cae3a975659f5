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


#include "commands.h"

#include <algorithm>
#include <iostream>
#include <limits>
#include <set>

#include "CLI11.hpp"
#include "nudgelab/bandit.h"
#include "nudgelab/csv.h"
#include "nudgelab/impact.h"
#include "nudgelab/itempair.h"
#include "nudgelab/report.h"
#include "nudgelab/simulator.h"
#include "nudgelab/traits.h"
#include "report_json.h"

namespace nudgelab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t RequireSeed(const Invocation& inv, std::string_view command) {
  if (!inv.seed) throw ConfigError(std::string(command) + " needs a seed (--seed or config seed)");
  return *inv.seed;
}

const fs::path& RequireInput(const std::optional<fs::path>& path, std::string_view name) {
  if (!path) throw ConfigError("missing inputs." + std::string(name));
  if (!fs::exists(*path)) throw DataError("input file not found: " + path->string());
  return *path;
}

const std::optional<fs::path>& OptionalInput(const std::optional<fs::path>& path) {
  if (path && !fs::exists(*path)) throw DataError("input file not found: " + path->string());
  return path;
}

report::AnalysisOptions OptionsFor(const Invocation& inv, std::uint64_t seed) {
  auto options = sim::AnalysisOptionsFor(inv.config.design, inv.alpha, seed);
  const auto& a = inv.config.analysis;
  options.lambda_factor = a.lambda_factor;
  options.tau = a.tau;
  options.best_arm_draws = a.best_arm_draws;
  options.baseline_days = a.baseline_days;
  options.lmm.reml = a.reml;
  return options;
}

void WriteJson(const fs::path& path, const json& j) {
  auto out = csv::OpenForWrite(path);
  out << j.dump(2) << '\n';
}

Day LastDay(std::span<const PurchaseEvent> purchases) {
  Day last = 0;
  for (const auto& p : purchases) last = std::max(last, p.day);
  return last;
}

std::vector<UserId> AllUsers(const PurchaseLog& purchases, const LoginLog& logins) {
  std::set<UserId> users;
  for (auto& u : purchases.Users()) users.insert(u);
  for (auto& u : logins.Users()) users.insert(u);
  return {users.begin(), users.end()};
}

}  // namespace

void Simulate(const Invocation& inv) {
  const auto seed = RequireSeed(inv, "simulate");
  const auto& cfg = inv.config;
  const auto population = sim::Population::Synthesize(cfg.population, seed);
  const auto result = sim::RunExperiment(cfg.design, population, cfg.effect, seed);

  const fs::path& out = inv.out;
  WritePurchases(out / "purchases.csv", result.purchases);
  WriteLogins(out / "logins.csv", result.logins);
  WriteNudges(out / "nudges.csv", result.nudges);
  bandit::WriteDecisions(out / "decisions.csv", result.decisions, result.arm_labels);
  impact::WriteGroups(out / "groups.csv", result.groups);
  traits::WriteAttributes(out / "attributes.csv", result.attributes);
  WriteStock(out / "stock.csv", result.final_stock);

  const auto inputs = sim::AnalysisInputsFor(result);
  const BehaviorLogs logs{PurchaseLog(result.purchases), LoginLog(result.logins),
                          NudgeLog(result.nudges)};
  const auto replay = report::ReplayBandit(logs, &result.attributes, result.decisions,
                                           result.arm_labels, cfg.design.context, cfg.design.prior,
                                           cfg.design.intercept, inputs.end_day);
  replay.model.SaveFile(out / "model.txt");

  // A config that re-runs the analysis on the files above.
  json run = cfg.raw;
  run.erase("out");
  run.erase("recommend");
  run.erase("assign");
  run["seed"] = seed;
  run["alpha"] = inv.alpha;
  run["design"] = DesignToJson(cfg.design);
  run["inputs"] = {{"purchases", "purchases.csv"}, {"logins", "logins.csv"},
                   {"nudges", "nudges.csv"},       {"decisions", "decisions.csv"},
                   {"groups", "groups.csv"},       {"attributes", "attributes.csv"},
                   {"stock", "stock.csv"},         {"model", "model.txt"},
                   {"report", "report/report.json"}};
  run["analysis"] = {{"start_day", inputs.start_day},
                     {"end_day", inputs.end_day},
                     {"decision_days", inputs.decision_days},
                     {"lambda_factor", cfg.analysis.lambda_factor},
                     {"tau", cfg.analysis.tau},
                     {"reml", cfg.analysis.reml},
                     {"best_arm_draws", cfg.analysis.best_arm_draws},
                     {"baseline_days", cfg.analysis.baseline_days}};
  WriteJson(out / "run.json", run);

  const auto report = report::Analyze(inputs, OptionsFor(inv, seed));
  report::WriteReport(out / "report", report);
  WriteReportJson(out / "report" / "report.json", report);
}

void Recommend(const Invocation& inv) {
  const auto seed = RequireSeed(inv, "recommend");
  const auto& cfg = inv.config;
  const auto purchases = ReadPurchases(RequireInput(cfg.inputs.purchases, "purchases"));
  const auto stock = ReadStock(RequireInput(cfg.inputs.stock, "stock"));
  std::vector<LoginEvent> logins;
  if (OptionalInput(cfg.inputs.logins)) logins = ReadLogins(*cfg.inputs.logins);

  const PurchaseLog log(purchases);
  const LoginLog login_log(logins);
  const Day day = cfg.recommend.day.value_or(LastDay(purchases));
  std::vector<UserId> users;
  if (cfg.inputs.logins && cfg.recommend.eligible_only) {
    users = traits::EligibleCohort(log, login_log, day, cfg.design.cohort);
  } else {
    users = log.Users();
  }

  const auto& options = cfg.design.candidates;
  const auto candidates = itempair::GenerateCandidatePairs(log, stock, day, options);
  auto rng = MakeRng(seed, "recommend");
  std::vector<itempair::Recommendation> recs;
  for (const auto& user : users) {
    if (auto rec = itempair::Recommend(candidates, log, user, day, rng, options.months)) {
      recs.push_back(std::move(*rec));
    }
  }
  itempair::WriteRecommendations(inv.out / "recommendations.csv", recs,
                                 cfg.recommend.with_message);
}

void Assign(const Invocation& inv) {
  const auto& cfg = inv.config;
  const bool thompson = cfg.assign.method == "thompson";
  const auto seed = thompson ? RequireSeed(inv, "assign") : inv.seed.value_or(0);
  if (cfg.design.context.size() == 0) throw ConfigError("assign needs design.context traits");

  BehaviorLogs logs;
  const auto purchases = ReadPurchases(RequireInput(cfg.inputs.purchases, "purchases"));
  logs.purchases = PurchaseLog(purchases);
  if (OptionalInput(cfg.inputs.logins)) logs.logins = LoginLog(ReadLogins(*cfg.inputs.logins));
  if (OptionalInput(cfg.inputs.nudges)) logs.nudges = NudgeLog(ReadNudges(*cfg.inputs.nudges));
  traits::UserAttributes attributes;
  if (OptionalInput(cfg.inputs.attributes)) attributes = traits::ReadAttributes(*cfg.inputs.attributes);
  const Day day = cfg.assign.day.value_or(LastDay(purchases) + 1);

  std::vector<UserId> cohort;
  if (OptionalInput(cfg.inputs.groups)) {
    cohort = impact::UsersIn(impact::ReadGroups(*cfg.inputs.groups), {impact::Group::kAdaptive});
  } else if (cfg.inputs.logins) {
    cohort = traits::EligibleCohort(logs.purchases, logs.logins, day, cfg.design.cohort);
  } else {
    cohort = AllUsers(logs.purchases, logs.logins);
  }

  const auto labels = cfg.design.ArmLabels();
  std::optional<bandit::Model> model;
  if (OptionalInput(cfg.inputs.model)) {
    model = bandit::Model::LoadFile(*cfg.inputs.model);
    if (model->n_traits() != static_cast<int>(cfg.design.context.size())) {
      throw ConfigError("model has " + std::to_string(model->n_traits()) +
                        " traits but design.context lists " +
                        std::to_string(cfg.design.context.size()));
    }
  } else {
    std::vector<bandit::Decision> history;
    if (OptionalInput(cfg.inputs.decisions)) {
      history = bandit::ReadDecisions(*cfg.inputs.decisions, labels);
    }
    model = report::ReplayBandit(logs, &attributes, history, labels, cfg.design.context,
                                 cfg.design.prior, cfg.design.intercept, day)
                .model;
  }

  std::vector<bandit::Decision> decisions;
  if (!cohort.empty()) {
    const auto contexts =
        traits::ComputeContexts({logs, &attributes}, cohort, day, cfg.design.context);
    auto rng = MakeRng(seed, "policy", static_cast<std::uint64_t>(day));
    for (const auto& ctx : contexts) {
      decisions.push_back(thompson ? bandit::ThompsonSampleArm(*model, ctx, rng, cfg.design.sampling)
                                   : bandit::UcbSelect(*model, ctx, cfg.assign.ucb_alpha));
    }
  }
  bandit::WriteDecisions(inv.out / "decisions.csv", decisions, model->labels());
  model->SaveFile(inv.out / "model.txt");
}

void Analyze(const Invocation& inv) {
  const auto seed = RequireSeed(inv, "analyze");
  const auto& cfg = inv.config;
  report::AnalysisInputs in;
  in.purchases = ReadPurchases(RequireInput(cfg.inputs.purchases, "purchases"));
  in.groups = impact::ReadGroups(RequireInput(cfg.inputs.groups, "groups"));
  if (OptionalInput(cfg.inputs.logins)) in.logins = ReadLogins(*cfg.inputs.logins);
  if (OptionalInput(cfg.inputs.nudges)) in.nudges = ReadNudges(*cfg.inputs.nudges);
  if (OptionalInput(cfg.inputs.attributes)) in.attributes = traits::ReadAttributes(*cfg.inputs.attributes);
  in.arm_labels = cfg.design.ArmLabels();
  if (OptionalInput(cfg.inputs.decisions)) {
    in.decisions = bandit::ReadDecisions(*cfg.inputs.decisions, in.arm_labels);
  }
  in.decision_days = cfg.analysis.decision_days;

  Day first = std::numeric_limits<Day>::max();
  for (const auto& p : in.purchases) first = std::min(first, p.day);
  if (in.purchases.empty()) first = 0;
  in.start_day = cfg.analysis.start_day.value_or(
      in.decision_days.empty() ? first : *std::min_element(in.decision_days.begin(),
                                                           in.decision_days.end()));
  in.end_day = cfg.analysis.end_day.value_or(LastDay(in.purchases));

  const auto report = report::Analyze(in, OptionsFor(inv, seed));
  report::WriteReport(inv.out, report);
  WriteReportJson(inv.out / "report.json", report);
}

void Report(const Invocation& inv) {
  const auto report = ReadReportJson(RequireInput(inv.config.inputs.report, "report"));
  report::WriteReport(inv.out, report);
}

namespace {

std::string OneLine(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

}  // namespace

int Main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"nudgelab: adaptive nudging experiments, from simulation to impact report"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  double alpha = 0.1;
  auto* config_opt = app.add_option("--config", config_path, "JSON run configuration")
                         ->envname("NUDGELAB_CONFIG");
  auto* out_opt = app.add_option("--out", out_dir, "output directory")->envname("NUDGELAB_OUT");
  auto* seed_opt = app.add_option("--seed", seed, "master seed")->envname("NUDGELAB_SEED");
  auto* alpha_opt =
      app.add_option("--alpha", alpha, "significance level")->envname("NUDGELAB_ALPHA");
  app.fallthrough();

  using Command = void (*)(const Invocation&);
  const std::vector<std::tuple<std::string, std::string, Command>> commands = {
      {"simulate", "synthesize a population, run the experiment and report", &Simulate},
      {"recommend", "item-pair recommendations for eligible users", &Recommend},
      {"assign", "bandit arm assignments for one decision day", &Assign},
      {"analyze", "impact analysis of existing logs", &Analyze},
      {"report", "re-render a saved report.json", &Report},
  };
  for (const auto& [name, help, fn] : commands) app.add_subcommand(name, help);

  std::vector<std::string> reversed(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (config_opt->count() == 0) throw ConfigError("no config given (--config or NUDGELAB_CONFIG)");
    Invocation inv;
    inv.config = LoadConfig(config_path);
    inv.seed = inv.config.seed;
    if (seed_opt->count() > 0) inv.seed = seed;
    inv.alpha = inv.config.alpha;
    if (alpha_opt->count() > 0) {
      if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
      inv.alpha = alpha;
    }
    if (out_opt->count() > 0) {
      inv.out = out_dir;
    } else if (inv.config.out) {
      inv.out = *inv.config.out;
    } else {
      throw ConfigError("no output directory (--out, NUDGELAB_OUT or config out)");
    }
    for (const auto& [name, help, fn] : commands) {
      if (app.got_subcommand(name)) fn(inv);
    }
  } catch (const InfeasibleError& e) {
    err << "nudgelab: infeasible: " << OneLine(e.what()) << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "nudgelab: error: " << OneLine(e.what()) << '\n';
    return 2;
  }
  return 0;
}

int Main(int argc, char** argv) {
  return Main(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace nudgelab::cli
