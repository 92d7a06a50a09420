// Copyright 2026 The ipdlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef IPDLAB_RNG_HPP_
#define IPDLAB_RNG_HPP_

#include <cstdint>
#include <random>
#include <span>

namespace ipdlab {

// Named substreams of a game or session seed. Each consumer owns its own
// generator so that, e.g., opponent randomness never shifts the agent's
// draws.
enum class Stream : std::uint64_t {
  kAgent = 1,
  kOpponent = 2,
  kParticipantAction = 3,
  kParticipantFeeling = 4,
  kCondition = 5,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Counter-based split: the seed for item `index` of a batch rooted at
// `master`. Independent of scheduling and of the batch size.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;
std::uint64_t derive_seed(std::uint64_t seed, Stream stream) noexcept;

// mt19937_64 with a portable uniform draw; std::uniform_real_distribution is
// implementation-defined and would break cross-platform replay.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 bits of resolution; exactly one engine step.
  double uniform01() noexcept {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  // One draw; true iff u < p.
  bool bernoulli(double p) noexcept { return uniform01() < p; }
  // One draw; inverse-CDF over `weights` (assumed to sum to 1).
  std::size_t categorical(std::span<const double> weights) noexcept;
  std::uint64_t next_u64() noexcept { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ipdlab

#endif  // IPDLAB_RNG_HPP_
