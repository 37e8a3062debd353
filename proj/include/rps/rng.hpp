// Copyright 2026 The rps Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>

namespace rps {

/// Named random streams. Each consumer of randomness draws from its own
/// stream so that, e.g., the permutations of a state can be redrawn without
/// touching the noise realization.
enum class Stream : std::uint64_t {
  kNoise = 1,
  kInput = 2,
  kPermutation = 3,
  kTieBreak = 4,
  kSign = 5,
  kTrialData = 6,
  kTrialState = 7,
};

using Engine = std::mt19937_64;

namespace detail {
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

/// Key for the (master, stream, index) counter triple. Distinct triples give
/// statistically independent engine seeds.
constexpr std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                                    std::uint64_t index = 0) noexcept {
  std::uint64_t h = detail::splitmix64(master);
  h = detail::splitmix64(h ^ static_cast<std::uint64_t>(stream));
  return detail::splitmix64(h ^ (index * 0xd1342543de82ef95ULL));
}

inline Engine make_engine(std::uint64_t master, Stream stream,
                          std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(derive_seed(master, stream, index)),
                    static_cast<std::uint32_t>(derive_seed(master, stream, index) >> 32)};
  return Engine(seq);
}

}  // namespace rps
