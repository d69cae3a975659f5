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

#ifndef NUDGELAB_RNG_H_
#define NUDGELAB_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace nudgelab {

using Rng = std::mt19937_64;

// Seeds for named, independent sub-streams of one master seed. The same
// (seed, stream, index) triple always yields the same generator.
std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);

inline Rng MakeRng(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0) {
  return Rng(DeriveSeed(seed, stream, index));
}

}  // namespace nudgelab

#endif  // NUDGELAB_RNG_H_
