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

#include "ipdlab/error.hpp"

namespace ipdlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidPayoffMatrix: return "InvalidPayoffMatrix";
    case ErrorCode::kOutOfOrderEvent: return "OutOfOrderEvent";
    case ErrorCode::kSessionComplete: return "SessionComplete";
    case ErrorCode::kInfeasibleStrategy: return "InfeasibleStrategy";
    case ErrorCode::kUnknownPreset: return "UnknownPreset";
    case ErrorCode::kReplayTooShort: return "ReplayTooShort";
    case ErrorCode::kUnsupportedOpponent: return "UnsupportedOpponent";
    case ErrorCode::kSchemaViolation: return "SchemaViolation";
    case ErrorCode::kDuplicateRound: return "DuplicateRound";
    case ErrorCode::kConditionMismatch: return "ConditionMismatch";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kUnknownFactor: return "UnknownFactor";
    case ErrorCode::kEmptyTable: return "EmptyTable";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kUnknownSession: return "UnknownSession";
    case ErrorCode::kInvalidFeeling: return "InvalidFeeling";
    case ErrorCode::kSessionIncomplete: return "SessionIncomplete";
    case ErrorCode::kSessionAbandoned: return "SessionAbandoned";
    case ErrorCode::kRationalOverflow: return "RationalOverflow";
  }
  return "Unknown";
}

}  // namespace ipdlab
