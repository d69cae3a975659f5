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


#ifndef NUDGELAB_TOOLS_REPORT_JSON_H_
#define NUDGELAB_TOOLS_REPORT_JSON_H_

#include <filesystem>

#include "json.hpp"
#include "nudgelab/report.h"

namespace nudgelab::cli {

// Lossless JSON form of an ImpactReport. Non-finite doubles are written as
// the strings "inf", "-inf" and "nan".
nlohmann::json ReportToJson(const report::ImpactReport& report);
report::ImpactReport ReportFromJson(const nlohmann::json& json);

void WriteReportJson(const std::filesystem::path& path, const report::ImpactReport& report);
report::ImpactReport ReadReportJson(const std::filesystem::path& path);

}  // namespace nudgelab::cli

#endif  // NUDGELAB_TOOLS_REPORT_JSON_H_
