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

#ifndef NUDGELAB_COMMON_H_
#define NUDGELAB_COMMON_H_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nudgelab {

// Integer day index (days since an arbitrary epoch). No calendar semantics.
using Day = std::int64_t;
using UserId = std::string;
using ItemId = std::string;

// Periods quoted in months are converted with a fixed 30-day month.
inline constexpr int kDaysPerMonth = 30;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters, unknown names, inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or out-of-contract input data (files or in-memory rows).
class DataError : public Error {
 public:
  using Error::Error;
};

// The requested analysis cannot be carried out on the given data, e.g. a
// degenerate sample or a rank-deficient design matrix.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace nudgelab

#endif  // NUDGELAB_COMMON_H_
