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

#ifndef IPDLAB_SYNTHETIC_HPP_
#define IPDLAB_SYNTHETIC_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ipdlab/corpus.hpp"
#include "ipdlab/simulation.hpp"

namespace ipdlab {

// How a simulated participant chooses. Outcomes are from the participant's
// side.
struct ParticipantActionModel {
  enum class Kind { MemoryOne, JoyContingent };

  Kind kind = Kind::MemoryOne;
  double p_first = 0.5;
  std::array<double, 4> p_after{0.5, 0.5, 0.5, 0.5};  // by previous CC, CD, DC, DD
  double p_after_joy = 1.0;
  double p_after_other = 0.0;

  // Copies the agent's previous move.
  static ParticipantActionModel tit_for_tat();
  static ParticipantActionModel constant(double p);
  // Cooperates on round n+1 iff joy was reported on round n.
  static ParticipantActionModel cooperate_iff_joy(double p_first = 1.0);
};

// Probabilities over (joy, regret, anger, sadness, neutral).
using FeelingDistribution = std::array<double, 5>;

struct FeelingModel {
  std::array<std::array<FeelingDistribution, 4>, 4> table{};  // [condition][outcome]
  // Added to joy (clamped to [0, 1]) when the agent smiled on the previous
  // round; the other feelings are rescaled to keep the total at 1.
  double joy_lift_after_smile = 0.0;

  static FeelingModel constant(const FeelingDistribution& d);
  // Joy after CC, neutral otherwise.
  static FeelingModel joy_iff_cc();

  void set(std::optional<StrategyKind> strategy, std::optional<ExpressionPattern> expression,
           std::optional<JointOutcome> outcome, const FeelingDistribution& d);
  FeelingDistribution distribution(const Condition& c, JointOutcome outcome,
                                   std::optional<AgentExpression> prev) const;
};

struct SyntheticSpec {
  std::string name = "custom";
  ParticipantActionModel action;
  FeelingModel feeling = FeelingModel::constant({0.2, 0.2, 0.2, 0.2, 0.2});
  // Session i is assigned conditions[i % size].
  std::vector<Condition> conditions = [] {
    const auto all = all_conditions();
    return std::vector<Condition>(all.begin(), all.end());
  }();
  int rounds = 20;
  PayoffMatrix payoff{};

  // Throws kInvalidSpec.
  void validate() const;
};

// Each session plays the condition's preset agent and expression policy.
// Session i draws from substreams of derive_seed(seed, i); the agent uses
// the same stream layout as run_game.
Corpus generate_synthetic(const SyntheticSpec& spec, std::size_t n_sessions,
                          std::uint64_t seed);

// Agent vs scripted opponent, recorded as simulated events with no feelings.
// Game i uses seed derive_seed(seed, i), matching run_batch; the opponent
// occupies the participant seat.
Corpus simulate_corpus(const MemoryOneStrategy& agent, const Condition& condition,
                       const OpponentPolicy& opponent, const GameConfig& config,
                       std::size_t n_games);

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const SyntheticSpec& spec);

// Named fixtures: "null", "joy_iff_cc", "selfless", "contagion",
// "reference" (42% pooled joy). Throws kUnknownPreset.
SyntheticSpec synthetic_preset(std::string_view name);

}  // namespace ipdlab

#endif  // IPDLAB_SYNTHETIC_HPP_
