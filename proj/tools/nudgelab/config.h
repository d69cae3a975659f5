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

#ifndef NUDGELAB_TOOLS_CONFIG_H_
#define NUDGELAB_TOOLS_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nudgelab/simulator.h"

namespace nudgelab::cli {

// File inputs, resolved against the config file's directory.
struct InputPaths {
  std::optional<std::filesystem::path> purchases;
  std::optional<std::filesystem::path> logins;
  std::optional<std::filesystem::path> nudges;
  std::optional<std::filesystem::path> decisions;
  std::optional<std::filesystem::path> groups;
  std::optional<std::filesystem::path> attributes;
  std::optional<std::filesystem::path> stock;
  std::optional<std::filesystem::path> model;
  std::optional<std::filesystem::path> report;
};

struct AnalysisSection {
  std::optional<Day> start_day;
  std::optional<Day> end_day;
  std::vector<Day> decision_days;
  double lambda_factor = 0.2;
  double tau = 1.0;
  bool reml = false;
  int best_arm_draws = 2000;
  int baseline_days = 90;
};

struct RecommendSection {
  std::optional<Day> day;
  bool eligible_only = true;  // apply the cohort rules when a login log is given
  bool with_message = true;
};

struct AssignSection {
  std::optional<Day> day;
  std::string method = "thompson";  // thompson | ucb
  double ucb_alpha = 1.0;
};

struct RunConfig {
  std::filesystem::path base_dir;
  std::optional<std::uint64_t> seed;
  double alpha = 0.1;
  std::optional<std::filesystem::path> out;
  sim::PopulationSpec population;
  sim::EffectModel effect;
  sim::ExperimentDesign design;
  InputPaths inputs;
  AnalysisSection analysis;
  RecommendSection recommend;
  AssignSection assign;
  nlohmann::json raw;
};

// Strict parse: unknown keys and ill-typed values raise ConfigError.
RunConfig ParseConfig(const nlohmann::json& json, const std::filesystem::path& base_dir);
RunConfig LoadConfig(const std::filesystem::path& path);

nlohmann::json DesignToJson(const sim::ExperimentDesign& design);

}  // namespace nudgelab::cli

#endif  // NUDGELAB_TOOLS_CONFIG_H_
