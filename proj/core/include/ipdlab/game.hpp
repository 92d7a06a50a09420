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

#ifndef IPDLAB_GAME_HPP_
#define IPDLAB_GAME_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "ipdlab/error.hpp"

namespace ipdlab {

// Points are exact integers so that sessions replay bit-exactly.
using Points = std::int64_t;

// Payoff matrix of the symmetric prisoner's dilemma. Construct through
// PayoffMatrix::make, which enforces T > R > P > S.
struct PayoffMatrix {
  Points T = 7;
  Points R = 5;
  Points S = 2;
  Points P = 3;

  static PayoffMatrix make(Points T, Points R, Points S, Points P);
  static PayoffMatrix reference() { return {}; }

  bool valid() const noexcept { return T > R && R > P && P > S; }
  friend bool operator==(const PayoffMatrix&, const PayoffMatrix&) = default;
};

enum class Action : std::uint8_t { C, D };

// "C"/"D".
std::string_view to_string(Action a);
Action parse_action(std::string_view s);
// Investment framing shown to participants: C is "project green", D is
// "project blue".
std::string_view presentation_label(Action a);
Action from_presentation_label(std::string_view label);

// Joint outcome labelled from a declared focal player's perspective; the
// first letter is always the focal player's action. The corpus stores
// participant-perspective labels.
enum class JointOutcome : std::uint8_t { CC = 0, CD = 1, DC = 2, DD = 3 };

inline constexpr std::array<JointOutcome, 4> kAllOutcomes = {
    JointOutcome::CC, JointOutcome::CD, JointOutcome::DC, JointOutcome::DD};

JointOutcome joint_outcome(Action focal, Action partner);
Action focal_action(JointOutcome o);
Action partner_action(JointOutcome o);
// Swaps CD and DC; fixes CC and DD.
JointOutcome flip_perspective(JointOutcome o);
std::string_view to_string(JointOutcome o);
JointOutcome parse_outcome(std::string_view s);
inline constexpr int index_of(JointOutcome o) { return static_cast<int>(o); }

enum class PayoffClass : std::uint8_t { R, S, T, P };

// Class of the payoff received by the focal player of `o`.
PayoffClass payoff_class(JointOutcome o);
std::string_view to_string(PayoffClass c);

struct PointPair {
  Points focal = 0;
  Points partner = 0;
  friend bool operator==(const PointPair&, const PointPair&) = default;
};

PointPair payoffs_for(JointOutcome o, const PayoffMatrix& m);
Points payoff_value(PayoffClass c, const PayoffMatrix& m);

struct GameConfig {
  int rounds = 20;
  PayoffMatrix payoff{};
  std::uint64_t seed = 0;

  void validate() const;
};

enum class RoundPhase : std::uint8_t {
  AwaitingChoice,
  OutcomeRevealed,
  AwaitingFeeling,
  ExpressionShown,
  Completed,
};

std::string_view to_string(RoundPhase p);

enum class RoundEventKind : std::uint8_t {
  ChoicesCommitted,  // both players' choices are in
  OutcomeShown,      // the outcome has been displayed; feeling prompt opens
  FeelingSubmitted,
  ExpressionDone,    // agent expression displayed; next round may open
};

std::string_view to_string(RoundEventKind e);

// Per-game round state machine. One round is
//   AwaitingChoice -> OutcomeRevealed -> AwaitingFeeling -> ExpressionShown
// and ExpressionDone on the last round leads to Completed.
class PhaseMachine {
 public:
  explicit PhaseMachine(int rounds);

  RoundPhase phase() const noexcept { return phase_; }
  // 1-based; equals rounds() once Completed.
  int round() const noexcept { return round_; }
  int rounds() const noexcept { return rounds_; }
  bool completed() const noexcept { return phase_ == RoundPhase::Completed; }

  // Throws Error(kOutOfOrderEvent) or Error(kSessionComplete). A feeling
  // submitted while OutcomeRevealed passes through AwaitingFeeling.
  RoundPhase advance(RoundEventKind event);

 private:
  int rounds_;
  int round_ = 1;
  RoundPhase phase_ = RoundPhase::AwaitingChoice;
};

}  // namespace ipdlab

#endif  // IPDLAB_GAME_HPP_
