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

#ifndef IPDLAB_EXPRESSION_HPP_
#define IPDLAB_EXPRESSION_HPP_

#include <array>
#include <chrono>
#include <cstdint>
#include <string_view>

#include "ipdlab/game.hpp"

namespace ipdlab {

// Agent displays. Sadness exists only in the participant's report
// vocabulary, never as an agent display.
enum class AgentExpression : std::uint8_t { Joy, Regret, Anger, Neutral };

inline constexpr std::array<AgentExpression, 4> kAllAgentExpressions = {
    AgentExpression::Joy, AgentExpression::Regret, AgentExpression::Anger,
    AgentExpression::Neutral};

// Lowercase names: "joy", "regret", "anger", "neutral".
std::string_view to_string(AgentExpression e);
AgentExpression parse_agent_expression(std::string_view s);

inline bool is_smile(AgentExpression e) { return e == AgentExpression::Joy; }

enum class ExpressionPattern : std::uint8_t { Cooperative, Competitive };

std::string_view to_string(ExpressionPattern p);  // "cooperative" | "competitive"
ExpressionPattern parse_expression_pattern(std::string_view s);

// Total map from participant-perspective outcome to the agent's display.
//
//               CC      CD      DC     DD
// cooperative   Joy     Regret  Anger  Neutral
// competitive   Regret  Joy     Anger  Neutral
class ExpressionPolicy {
 public:
  static ExpressionPolicy for_pattern(ExpressionPattern pattern);
  static ExpressionPolicy cooperative() {
    return for_pattern(ExpressionPattern::Cooperative);
  }
  static ExpressionPolicy competitive() {
    return for_pattern(ExpressionPattern::Competitive);
  }

  ExpressionPattern pattern() const noexcept { return pattern_; }
  AgentExpression operator()(JointOutcome participant_view) const noexcept {
    return table_[index_of(participant_view)];
  }

  // Suggested client animation length (neutral -> pose).
  std::chrono::milliseconds display_duration{3000};

 private:
  ExpressionPolicy(ExpressionPattern p, std::array<AgentExpression, 4> t)
      : pattern_(p), table_(t) {}

  ExpressionPattern pattern_;
  std::array<AgentExpression, 4> table_;
};

inline AgentExpression expression_for(const ExpressionPolicy& policy,
                                      JointOutcome participant_view) {
  return policy(participant_view);
}

}  // namespace ipdlab

#endif  // IPDLAB_EXPRESSION_HPP_
