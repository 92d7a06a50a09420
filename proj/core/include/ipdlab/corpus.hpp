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

#ifndef IPDLAB_CORPUS_HPP_
#define IPDLAB_CORPUS_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ipdlab/expression.hpp"
#include "ipdlab/game.hpp"

namespace ipdlab {

enum class StrategyKind : std::uint8_t { Extortion, Generosity };

std::string_view to_string(StrategyKind k);  // "extortion" | "generosity"
StrategyKind parse_strategy_kind(std::string_view s);

// One cell of the 2x2 between-participants design.
struct Condition {
  StrategyKind strategy = StrategyKind::Extortion;
  ExpressionPattern expression = ExpressionPattern::Cooperative;

  // 0..3 in the order of all_conditions().
  int index() const noexcept;
  std::string label() const;  // e.g. "extortion/cooperative"
  static Condition from_index(int i);
  static Condition parse(std::string_view label);
  friend bool operator==(const Condition&, const Condition&) = default;
};

inline constexpr int kConditionCount = 4;
std::array<Condition, 4> all_conditions();

// Report vocabulary, in display order.
enum class ParticipantFeeling : std::uint8_t { Joy, Regret, Anger, Sadness, Neutral };

inline constexpr int kFeelingCount = 5;
inline constexpr std::array<ParticipantFeeling, 5> kAllFeelings = {
    ParticipantFeeling::Joy, ParticipantFeeling::Regret, ParticipantFeeling::Anger,
    ParticipantFeeling::Sadness, ParticipantFeeling::Neutral};

std::string_view to_string(ParticipantFeeling f);
// Closed vocabulary; throws kInvalidFeeling.
ParticipantFeeling parse_feeling(std::string_view s);

enum class EventSource : std::uint8_t { Human, Synthetic, Simulated };

std::string_view to_string(EventSource s);
EventSource parse_event_source(std::string_view s);

// One joint outcome in a session. Actions and outcome are from the
// participant's side.
struct RoundEvent {
  std::string session_id;
  EventSource source = EventSource::Synthetic;
  Condition condition;
  int round = 1;
  Action participant_action = Action::C;
  Action agent_action = Action::C;
  JointOutcome outcome = JointOutcome::CC;
  Points participant_points = 0;
  Points agent_points = 0;
  std::optional<ParticipantFeeling> participant_feeling;
  std::optional<AgentExpression> agent_expression;
  std::optional<AgentExpression> prev_agent_expression;
  std::optional<std::uint64_t> seed;

  friend bool operator==(const RoundEvent&, const RoundEvent&) = default;
};

// Fills outcome, points, and (if with_expression) agent_expression from the
// actions and condition.
RoundEvent make_event(std::string session_id, EventSource source, Condition condition,
                      int round, Action participant, Action agent,
                      std::optional<ParticipantFeeling> feeling,
                      std::optional<AgentExpression> prev_expression,
                      std::optional<std::uint64_t> seed, const PayoffMatrix& payoff,
                      bool with_expression = true);

struct CorpusMetadata {
  PayoffMatrix payoff{};
  int rounds = 20;
  std::string provenance;
};

// Ordered event list with per-session bookkeeping. Every append is checked
// against the session's history, so a Corpus is valid by construction
// except for completeness (sessions may still be open).
class Corpus {
 public:
  explicit Corpus(CorpusMetadata metadata = {});

  // Throws kSchemaViolation, kDuplicateRound or kConditionMismatch.
  void append(RoundEvent event);

  const std::vector<RoundEvent>& events() const noexcept { return events_; }
  const CorpusMetadata& metadata() const noexcept { return metadata_; }
  std::size_t size() const noexcept { return events_.size(); }
  bool empty() const noexcept { return events_.empty(); }
  std::size_t session_count() const noexcept { return sessions_.size(); }
  // Session ids in first-appearance order.
  const std::vector<std::string>& session_ids() const noexcept { return order_; }
  // Indices into events() of a session's rounds, in round order.
  const std::vector<std::size_t>& session_events(const std::string& id) const;

  // Throws kSchemaViolation unless every session has rounds 1..M (or a
  // gap-free prefix when allow_partial).
  void validate_complete(bool allow_partial = false) const;

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.events_ == b.events_;
  }

 private:
  struct SessionState {
    Condition condition;
    std::vector<std::size_t> rows;
  };

  CorpusMetadata metadata_;
  std::vector<RoundEvent> events_;
  std::map<std::string, SessionState> sessions_;
  std::vector<std::string> order_;
};

inline Corpus& append_event(Corpus& corpus, RoundEvent event) {
  corpus.append(std::move(event));
  return corpus;
}

// JSONL field order; writers emit keys exactly in this order.
inline constexpr std::array<std::string_view, 14> kEventFields = {
    "session_id", "source", "strategy", "expression", "round",
    "participant_action", "agent_action", "outcome", "participant_points",
    "agent_points", "participant_feeling", "agent_expression",
    "prev_agent_expression", "seed"};

nlohmann::ordered_json to_json(const RoundEvent& e);
// Throws kSchemaViolation on missing, extra, or mistyped fields.
RoundEvent event_from_json(const nlohmann::json& j);
// Canonical single-line form (no trailing newline).
std::string to_jsonl_line(const RoundEvent& e);

void save_corpus(const Corpus& corpus, std::ostream& out);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

struct LoadOptions {
  CorpusMetadata metadata{};
  bool allow_partial = false;
};

// Blank lines are skipped. Throws kParseError (message carries the line
// number) or kSchemaViolation.
Corpus load_corpus(std::istream& in, const LoadOptions& options = {});
Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& options = {});

// Same columns as the JSONL schema; absent values are empty cells.
void export_csv(const Corpus& corpus, std::ostream& out);

// Ingestion adapter for externally collected data: a CSV whose header names
// the schema columns (any order; extra columns are ignored). Empty cells are
// absent values.
Corpus import_csv(std::istream& in, const LoadOptions& options = {});

}  // namespace ipdlab

#endif  // IPDLAB_CORPUS_HPP_
