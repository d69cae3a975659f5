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

#ifndef NUDGELAB_REPORT_H_
#define NUDGELAB_REPORT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nudgelab/bandit.h"
#include "nudgelab/impact.h"
#include "nudgelab/lmm.h"
#include "nudgelab/logs.h"
#include "nudgelab/traits.h"

// End-to-end impact analysis of one experiment's logs and its rendering as
// a markdown summary, CSV series and SVG plots.
namespace nudgelab::report {

struct AnalysisInputs {
  std::vector<PurchaseEvent> purchases;
  std::vector<LoginEvent> logins;
  std::optional<std::vector<NudgeEvent>> nudges;  // absent: no nudge log
  std::optional<std::vector<bandit::Decision>> decisions;
  std::vector<std::string> arm_labels;  // decision-log arm order
  impact::GroupMap groups;
  traits::UserAttributes attributes;
  // When empty, decision days come from the decision log, then the nudge
  // log, then a weekly grid from start_day.
  std::vector<Day> decision_days;
  Day start_day = 0;
  Day end_day = 0;  // inclusive
};

struct AnalysisOptions {
  double alpha = 0.1;
  traits::ContextSpec context;
  std::optional<bandit::Prior> prior;
  bool intercept = true;
  double lambda_factor = 0.2;
  double tau = 1.0;
  int best_arm_draws = 2000;
  int baseline_days = 90;
  lmm::Options lmm;
  std::uint64_t seed = 0;
};

// Bandit rebuilt from the decision log: contexts recomputed on each
// decision day over the users decided that day, updated with the reward of
// every decision whose 7-day window ends by `data_end`.
struct Replay {
  bandit::Model model;
  std::vector<traits::ContextVector> last_contexts;
  std::size_t n_updates = 0;
  double total_reward = 0.0;
};
Replay ReplayBandit(const BehaviorLogs& logs, const traits::UserAttributes* attributes,
                    std::span<const bandit::Decision> decisions,
                    std::span<const std::string> arm_labels, const traits::ContextSpec& context,
                    const std::optional<bandit::Prior>& prior, bool intercept, Day data_end);

struct Comparison {
  std::string name;  // column heading, e.g. "Adaptive intervention"
  impact::Group group = impact::Group::kAdaptive;
  std::size_t n_treated = 0;
  std::size_t n_control = 0;
  std::optional<impact::SeriesReport> series;
  std::vector<impact::StratumReport> strata;
  std::optional<impact::SuccessAnalysis> success;  // messages to this group only
};

struct ImpactReport {
  double alpha = 0.1;
  Day start_day = 0;
  Day end_day = 0;
  std::vector<Day> decision_days;
  std::vector<Comparison> comparisons;
  std::optional<lmm::Fit> lmm_full;
  std::optional<lmm::Fit> lmm_reduced;
  std::optional<impact::AssignmentMetrics> assignment;
  std::optional<bandit::SensitivityReport> sensitivity;
  std::vector<bandit::BestArm> best_arms;
  std::vector<std::string> arm_labels;
  std::optional<impact::SuccessAnalysis> success;
  std::vector<std::string> warnings;  // analyses skipped and why
};

ImpactReport Analyze(const AnalysisInputs& inputs, const AnalysisOptions& options);

inline const std::vector<std::string> kSummaryRows = {
    "T-test: days with significant effect",
    "T-test: largest effect",
    "T-test: largest statistical power",
    "T-test: average effect",
    "T-test: average statistical power",
    "LMM: nudged that week",
    "LMM: baseline expenditure",
    "Bandit: assigned to nudge",
    "Bandit: majority assigned to nudge",
    "Successful recommendations",
};

// Cell values of the summary table, one row per kSummaryRows entry and one
// column per comparison. "-" marks a non-significant or missing result.
std::vector<std::vector<std::string>> SummaryCells(const ImpactReport& report);

std::string RenderMarkdown(const ImpactReport& report);

// Difference in means with its confidence band as a standalone SVG.
std::string RenderSeriesSvg(std::span<const impact::DayTest> tests, const std::string& title);

// summary.md plus CSV exports (t-test series, strata, LMM tables,
// assignment, sensitivity, best arm, success) and SVG plots under `dir`.
void WriteReport(const std::filesystem::path& dir, const ImpactReport& report);

// File-name stem of a comparison, e.g. "adaptive".
std::string Slug(const Comparison& comparison);

}  // namespace nudgelab::report

#endif  // NUDGELAB_REPORT_H_
