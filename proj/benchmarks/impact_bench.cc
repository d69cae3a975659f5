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


#include <benchmark/benchmark.h>

#include "nudgelab/impact.h"
#include "nudgelab/simulator.h"

namespace {

// Daily Welch tests over a simulated run with `range(0)` users.
void BM_DailySeriesTests(benchmark::State& state) {
  nudgelab::sim::PopulationSpec spec;
  spec.n_users = static_cast<int>(state.range(0));
  nudgelab::sim::ExperimentDesign design;
  design.weeks = 4;
  design.context = nudgelab::traits::ContextSpec::FromNames({"expenditure_30"}, 70);
  const auto population = nudgelab::sim::Population::Synthesize(spec, 11);
  const auto result = nudgelab::sim::RunExperiment(design, population, {}, 11);
  const nudgelab::PurchaseLog log(result.purchases);
  std::vector<nudgelab::UserId> users;
  for (const auto& [u, p] : result.groups) users.push_back(u);
  const auto panel =
      nudgelab::impact::DailyPanel::FromPurchases(log, users, result.start_day, result.end_day);
  const auto treated = nudgelab::impact::UsersIn(result.groups, {nudgelab::impact::Group::kAdaptive});
  const auto control =
      nudgelab::impact::UsersIn(result.groups, {nudgelab::impact::Group::kPureControl});
  for (auto _ : state) {
    benchmark::DoNotOptimize(nudgelab::impact::DailySeriesTests(panel, treated, control));
  }
}
BENCHMARK(BM_DailySeriesTests)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
