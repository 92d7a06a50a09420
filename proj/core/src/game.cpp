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

#include "ipdlab/game.hpp"

#include <string>

namespace ipdlab {

PayoffMatrix PayoffMatrix::make(Points T, Points R, Points S, Points P) {
  PayoffMatrix m{T, R, S, P};
  if (!m.valid()) {
    throw Error(ErrorCode::kInvalidPayoffMatrix,
                "payoff matrix must satisfy T > R > P > S (got T=" +
                    std::to_string(T) + " R=" + std::to_string(R) +
                    " P=" + std::to_string(P) + " S=" + std::to_string(S) +
                    ")");
  }
  return m;
}

std::string_view to_string(Action a) { return a == Action::C ? "C" : "D"; }

Action parse_action(std::string_view s) {
  if (s == "C") return Action::C;
  if (s == "D") return Action::D;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown action '" + std::string(s) + "' (expected C or D)");
}

std::string_view presentation_label(Action a) {
  return a == Action::C ? "project green" : "project blue";
}

Action from_presentation_label(std::string_view label) {
  if (label == "project green") return Action::C;
  if (label == "project blue") return Action::D;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown project '" + std::string(label) + "'");
}

JointOutcome joint_outcome(Action focal, Action partner) {
  const int f = focal == Action::C ? 0 : 1;
  const int p = partner == Action::C ? 0 : 1;
  return static_cast<JointOutcome>(2 * f + p);
}

Action focal_action(JointOutcome o) {
  return index_of(o) < 2 ? Action::C : Action::D;
}

Action partner_action(JointOutcome o) {
  return index_of(o) % 2 == 0 ? Action::C : Action::D;
}

JointOutcome flip_perspective(JointOutcome o) {
  return joint_outcome(partner_action(o), focal_action(o));
}

std::string_view to_string(JointOutcome o) {
  switch (o) {
    case JointOutcome::CC: return "CC";
    case JointOutcome::CD: return "CD";
    case JointOutcome::DC: return "DC";
    case JointOutcome::DD: return "DD";
  }
  return "??";
}

JointOutcome parse_outcome(std::string_view s) {
  for (JointOutcome o : kAllOutcomes) {
    if (to_string(o) == s) return o;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown outcome '" + std::string(s) + "'");
}

PayoffClass payoff_class(JointOutcome o) {
  switch (o) {
    case JointOutcome::CC: return PayoffClass::R;
    case JointOutcome::CD: return PayoffClass::S;
    case JointOutcome::DC: return PayoffClass::T;
    case JointOutcome::DD: return PayoffClass::P;
  }
  return PayoffClass::P;
}

std::string_view to_string(PayoffClass c) {
  switch (c) {
    case PayoffClass::R: return "R";
    case PayoffClass::S: return "S";
    case PayoffClass::T: return "T";
    case PayoffClass::P: return "P";
  }
  return "?";
}

Points payoff_value(PayoffClass c, const PayoffMatrix& m) {
  switch (c) {
    case PayoffClass::R: return m.R;
    case PayoffClass::S: return m.S;
    case PayoffClass::T: return m.T;
    case PayoffClass::P: return m.P;
  }
  return 0;
}

PointPair payoffs_for(JointOutcome o, const PayoffMatrix& m) {
  return {payoff_value(payoff_class(o), m),
          payoff_value(payoff_class(flip_perspective(o)), m)};
}

void GameConfig::validate() const {
  if (rounds < 1) {
    throw Error(ErrorCode::kInvalidArgument, "rounds must be >= 1");
  }
  if (!payoff.valid()) {
    throw Error(ErrorCode::kInvalidPayoffMatrix,
                "payoff matrix must satisfy T > R > P > S");
  }
}

std::string_view to_string(RoundPhase p) {
  switch (p) {
    case RoundPhase::AwaitingChoice: return "AwaitingChoice";
    case RoundPhase::OutcomeRevealed: return "OutcomeRevealed";
    case RoundPhase::AwaitingFeeling: return "AwaitingFeeling";
    case RoundPhase::ExpressionShown: return "ExpressionShown";
    case RoundPhase::Completed: return "Completed";
  }
  return "?";
}

std::string_view to_string(RoundEventKind e) {
  switch (e) {
    case RoundEventKind::ChoicesCommitted: return "ChoicesCommitted";
    case RoundEventKind::OutcomeShown: return "OutcomeShown";
    case RoundEventKind::FeelingSubmitted: return "FeelingSubmitted";
    case RoundEventKind::ExpressionDone: return "ExpressionDone";
  }
  return "?";
}

PhaseMachine::PhaseMachine(int rounds) : rounds_(rounds) {
  if (rounds < 1) {
    throw Error(ErrorCode::kInvalidArgument, "rounds must be >= 1");
  }
}

RoundPhase PhaseMachine::advance(RoundEventKind event) {
  if (phase_ == RoundPhase::Completed) {
    throw Error(ErrorCode::kSessionComplete,
                "all " + std::to_string(rounds_) + " rounds are complete");
  }
  auto reject = [&] {
    return Error(ErrorCode::kOutOfOrderEvent,
                 std::string(to_string(event)) + " is not legal in phase " +
                     std::string(to_string(phase_)) + " of round " +
                     std::to_string(round_));
  };
  switch (event) {
    case RoundEventKind::ChoicesCommitted:
      if (phase_ != RoundPhase::AwaitingChoice) throw reject();
      phase_ = RoundPhase::OutcomeRevealed;
      break;
    case RoundEventKind::OutcomeShown:
      if (phase_ != RoundPhase::OutcomeRevealed) throw reject();
      phase_ = RoundPhase::AwaitingFeeling;
      break;
    case RoundEventKind::FeelingSubmitted:
      if (phase_ != RoundPhase::AwaitingFeeling &&
          phase_ != RoundPhase::OutcomeRevealed) {
        throw reject();
      }
      phase_ = RoundPhase::ExpressionShown;
      break;
    case RoundEventKind::ExpressionDone:
      if (phase_ != RoundPhase::ExpressionShown) throw reject();
      if (round_ == rounds_) {
        phase_ = RoundPhase::Completed;
      } else {
        ++round_;
        phase_ = RoundPhase::AwaitingChoice;
      }
      break;
  }
  return phase_;
}

}  // namespace ipdlab
