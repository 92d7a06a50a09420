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

#include "ipdlab/expression.hpp"

#include <string>

namespace ipdlab {

std::string_view to_string(AgentExpression e) {
  switch (e) {
    case AgentExpression::Joy: return "joy";
    case AgentExpression::Regret: return "regret";
    case AgentExpression::Anger: return "anger";
    case AgentExpression::Neutral: return "neutral";
  }
  return "?";
}

AgentExpression parse_agent_expression(std::string_view s) {
  for (AgentExpression e : kAllAgentExpressions) {
    if (to_string(e) == s) return e;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown agent expression '" + std::string(s) + "'");
}

std::string_view to_string(ExpressionPattern p) {
  return p == ExpressionPattern::Cooperative ? "cooperative" : "competitive";
}

ExpressionPattern parse_expression_pattern(std::string_view s) {
  if (s == "cooperative") return ExpressionPattern::Cooperative;
  if (s == "competitive") return ExpressionPattern::Competitive;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown expression pattern '" + std::string(s) +
                  "' (expected cooperative or competitive)");
}

ExpressionPolicy ExpressionPolicy::for_pattern(ExpressionPattern pattern) {
  using E = AgentExpression;
  if (pattern == ExpressionPattern::Cooperative) {
    return {pattern, {E::Joy, E::Regret, E::Anger, E::Neutral}};
  }
  return {pattern, {E::Regret, E::Joy, E::Anger, E::Neutral}};
}

}  // namespace ipdlab
