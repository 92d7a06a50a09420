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

#include "ipdlab/corpus.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace ipdlab {
namespace {

using ojson = nlohmann::ordered_json;

Error schema(const std::string& what) {
  return Error(ErrorCode::kSchemaViolation, what);
}

template <typename T, typename F>
std::optional<T> optional_field(const nlohmann::json& j, const char* key, F parse) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_string()) throw schema(std::string(key) + " must be a string or null");
  return parse(v.get<std::string>());
}

std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string_view to_string(StrategyKind k) {
  return k == StrategyKind::Extortion ? "extortion" : "generosity";
}

StrategyKind parse_strategy_kind(std::string_view s) {
  if (s == "extortion") return StrategyKind::Extortion;
  if (s == "generosity") return StrategyKind::Generosity;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown strategy '" + std::string(s) + "'");
}

int Condition::index() const noexcept {
  return 2 * static_cast<int>(strategy) + static_cast<int>(expression);
}

std::string Condition::label() const {
  return std::string(to_string(strategy)) + "/" + std::string(to_string(expression));
}

Condition Condition::from_index(int i) {
  if (i < 0 || i >= kConditionCount) {
    throw Error(ErrorCode::kInvalidArgument, "condition index out of range");
  }
  return {static_cast<StrategyKind>(i / 2), static_cast<ExpressionPattern>(i % 2)};
}

Condition Condition::parse(std::string_view label) {
  const auto slash = label.find('/');
  if (slash == std::string_view::npos) {
    throw Error(ErrorCode::kInvalidArgument,
                "condition must look like strategy/expression, got '" +
                    std::string(label) + "'");
  }
  return {parse_strategy_kind(label.substr(0, slash)),
          parse_expression_pattern(label.substr(slash + 1))};
}

std::array<Condition, 4> all_conditions() {
  return {Condition::from_index(0), Condition::from_index(1), Condition::from_index(2),
          Condition::from_index(3)};
}

std::string_view to_string(ParticipantFeeling f) {
  switch (f) {
    case ParticipantFeeling::Joy: return "joy";
    case ParticipantFeeling::Regret: return "regret";
    case ParticipantFeeling::Anger: return "anger";
    case ParticipantFeeling::Sadness: return "sadness";
    case ParticipantFeeling::Neutral: return "neutral";
  }
  return "?";
}

ParticipantFeeling parse_feeling(std::string_view s) {
  for (ParticipantFeeling f : kAllFeelings) {
    if (to_string(f) == s) return f;
  }
  throw Error(ErrorCode::kInvalidFeeling,
              "unknown feeling '" + std::string(s) +
                  "' (expected joy, regret, anger, sadness or neutral)");
}

std::string_view to_string(EventSource s) {
  switch (s) {
    case EventSource::Human: return "human";
    case EventSource::Synthetic: return "synthetic";
    case EventSource::Simulated: return "simulated";
  }
  return "?";
}

EventSource parse_event_source(std::string_view s) {
  if (s == "human") return EventSource::Human;
  if (s == "synthetic") return EventSource::Synthetic;
  if (s == "simulated") return EventSource::Simulated;
  throw Error(ErrorCode::kInvalidArgument, "unknown source '" + std::string(s) + "'");
}

RoundEvent make_event(std::string session_id, EventSource source, Condition condition,
                      int round, Action participant, Action agent,
                      std::optional<ParticipantFeeling> feeling,
                      std::optional<AgentExpression> prev_expression,
                      std::optional<std::uint64_t> seed, const PayoffMatrix& payoff,
                      bool with_expression) {
  RoundEvent e;
  e.session_id = std::move(session_id);
  e.source = source;
  e.condition = condition;
  e.round = round;
  e.participant_action = participant;
  e.agent_action = agent;
  e.outcome = joint_outcome(participant, agent);
  const PointPair pts = payoffs_for(e.outcome, payoff);
  e.participant_points = pts.focal;
  e.agent_points = pts.partner;
  e.participant_feeling = feeling;
  if (with_expression) {
    e.agent_expression = ExpressionPolicy::for_pattern(condition.expression)(e.outcome);
  }
  e.prev_agent_expression = prev_expression;
  e.seed = seed;
  return e;
}

Corpus::Corpus(CorpusMetadata metadata) : metadata_(std::move(metadata)) {}

const std::vector<std::size_t>& Corpus::session_events(const std::string& id) const {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) {
    throw Error(ErrorCode::kInvalidArgument, "no session '" + id + "' in corpus");
  }
  return it->second.rows;
}

void Corpus::append(RoundEvent e) {
  const std::string where = "session " + e.session_id + " round " + std::to_string(e.round);
  if (e.session_id.empty()) throw schema("empty session_id");
  if (e.round < 1 || e.round > metadata_.rounds) {
    throw schema(where + ": round outside 1.." + std::to_string(metadata_.rounds));
  }
  if (e.outcome != joint_outcome(e.participant_action, e.agent_action)) {
    throw schema(where + ": outcome " + std::string(to_string(e.outcome)) +
                 " does not match actions");
  }
  const PointPair pts = payoffs_for(e.outcome, metadata_.payoff);
  if (e.participant_points != pts.focal || e.agent_points != pts.partner) {
    throw schema(where + ": points (" + std::to_string(e.participant_points) + "," +
                 std::to_string(e.agent_points) + ") inconsistent with outcome " +
                 std::string(to_string(e.outcome)));
  }
  if (e.agent_expression &&
      *e.agent_expression !=
          ExpressionPolicy::for_pattern(e.condition.expression)(e.outcome)) {
    throw schema(where + ": agent_expression inconsistent with the " +
                 std::string(to_string(e.condition.expression)) + " policy");
  }

  auto it = sessions_.find(e.session_id);
  if (it == sessions_.end()) {
    if (e.round != 1) throw schema(where + ": session must start at round 1");
    if (e.prev_agent_expression) {
      throw schema(where + ": prev_agent_expression must be absent on round 1");
    }
    sessions_.emplace(e.session_id, SessionState{e.condition, {events_.size()}});
    order_.push_back(e.session_id);
    events_.push_back(std::move(e));
    return;
  }

  SessionState& st = it->second;
  if (st.condition != e.condition) {
    throw Error(ErrorCode::kConditionMismatch,
                where + ": condition " + e.condition.label() + " differs from session's " +
                    st.condition.label());
  }
  const RoundEvent& last = events_[st.rows.back()];
  if (e.round <= last.round) {
    throw Error(ErrorCode::kDuplicateRound, where + " already recorded");
  }
  if (e.round != last.round + 1) {
    throw schema(where + ": gap after round " + std::to_string(last.round));
  }
  if (e.prev_agent_expression != last.agent_expression) {
    throw schema(where + ": prev_agent_expression does not match round " +
                 std::to_string(last.round) + "'s agent_expression");
  }
  st.rows.push_back(events_.size());
  events_.push_back(std::move(e));
}

void Corpus::validate_complete(bool allow_partial) const {
  for (const auto& [id, st] : sessions_) {
    const int last = events_[st.rows.back()].round;
    if (!allow_partial && last != metadata_.rounds) {
      throw schema("session " + id + " has " + std::to_string(last) + " of " +
                   std::to_string(metadata_.rounds) + " rounds");
    }
  }
}

ojson to_json(const RoundEvent& e) {
  ojson j;
  j["session_id"] = e.session_id;
  j["source"] = to_string(e.source);
  j["strategy"] = to_string(e.condition.strategy);
  j["expression"] = to_string(e.condition.expression);
  j["round"] = e.round;
  j["participant_action"] = to_string(e.participant_action);
  j["agent_action"] = to_string(e.agent_action);
  j["outcome"] = to_string(e.outcome);
  j["participant_points"] = e.participant_points;
  j["agent_points"] = e.agent_points;
  j["participant_feeling"] =
      e.participant_feeling ? ojson(to_string(*e.participant_feeling)) : ojson(nullptr);
  j["agent_expression"] =
      e.agent_expression ? ojson(to_string(*e.agent_expression)) : ojson(nullptr);
  j["prev_agent_expression"] = e.prev_agent_expression
                                   ? ojson(to_string(*e.prev_agent_expression))
                                   : ojson(nullptr);
  j["seed"] = e.seed ? ojson(*e.seed) : ojson(nullptr);
  return j;
}

RoundEvent event_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw schema("event must be a JSON object");
  for (std::string_view key : kEventFields) {
    if (!j.contains(std::string(key))) {
      throw schema("missing field '" + std::string(key) + "'");
    }
  }
  if (j.size() != kEventFields.size()) {
    for (const auto& [key, _] : j.items()) {
      bool known = false;
      for (std::string_view k : kEventFields) known = known || key == k;
      if (!known) throw schema("unexpected field '" + key + "'");
    }
  }
  try {
    RoundEvent e;
    e.session_id = j.at("session_id").get<std::string>();
    e.source = parse_event_source(j.at("source").get<std::string>());
    e.condition.strategy = parse_strategy_kind(j.at("strategy").get<std::string>());
    e.condition.expression = parse_expression_pattern(j.at("expression").get<std::string>());
    if (!j.at("round").is_number_integer()) throw schema("round must be an integer");
    e.round = j.at("round").get<int>();
    e.participant_action = parse_action(j.at("participant_action").get<std::string>());
    e.agent_action = parse_action(j.at("agent_action").get<std::string>());
    e.outcome = parse_outcome(j.at("outcome").get<std::string>());
    if (!j.at("participant_points").is_number_integer() ||
        !j.at("agent_points").is_number_integer()) {
      throw schema("points must be integers");
    }
    e.participant_points = j.at("participant_points").get<Points>();
    e.agent_points = j.at("agent_points").get<Points>();
    e.participant_feeling =
        optional_field<ParticipantFeeling>(j, "participant_feeling", parse_feeling);
    e.agent_expression =
        optional_field<AgentExpression>(j, "agent_expression", parse_agent_expression);
    e.prev_agent_expression = optional_field<AgentExpression>(
        j, "prev_agent_expression", parse_agent_expression);
    const auto& seed = j.at("seed");
    if (!seed.is_null()) {
      if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
        throw schema("seed must be an unsigned integer or null");
      }
      e.seed = seed.get<std::uint64_t>();
    }
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw schema(std::string("bad field type: ") + ex.what());
  } catch (const Error& ex) {
    if (ex.code() == ErrorCode::kSchemaViolation) throw;
    throw schema(ex.what());
  }
}

std::string to_jsonl_line(const RoundEvent& e) { return to_json(e).dump(); }

void save_corpus(const Corpus& corpus, std::ostream& out) {
  for (const RoundEvent& e : corpus.events()) out << to_jsonl_line(e) << '\n';
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kInvalidArgument, "cannot write " + path.string());
  }
  save_corpus(corpus, out);
}

Corpus load_corpus(std::istream& in, const LoadOptions& options) {
  Corpus corpus(options.metadata);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& ex) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no) + ": " + ex.what());
    }
    try {
      corpus.append(event_from_json(j));
    } catch (const Error& ex) {
      throw Error(ex.code(), "line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  corpus.validate_complete(options.allow_partial);
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kInvalidArgument, "cannot open " + path.string());
  }
  return load_corpus(in, options);
}

void export_csv(const Corpus& corpus, std::ostream& out) {
  for (std::size_t i = 0; i < kEventFields.size(); ++i) {
    out << (i ? "," : "") << kEventFields[i];
  }
  out << '\n';
  for (const RoundEvent& e : corpus.events()) {
    const ojson j = to_json(e);
    bool first = true;
    for (std::string_view key : kEventFields) {
      if (!first) out << ',';
      first = false;
      const auto& v = j.at(std::string(key));
      if (v.is_null()) continue;
      out << csv_escape(v.is_string() ? v.get<std::string>() : v.dump());
    }
    out << '\n';
  }
}

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> cells(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cells.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cells.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.emplace_back();
    } else if (c != '\r') {
      cells.back() += c;
    }
  }
  return cells;
}

bool integer_column(std::string_view key) {
  return key == "round" || key == "participant_points" || key == "agent_points" ||
         key == "seed";
}

}  // namespace

Corpus import_csv(std::istream& in, const LoadOptions& options) {
  Corpus corpus(options.metadata);
  std::string line;
  if (!std::getline(in, line)) return corpus;
  const std::vector<std::string> header = split_csv_row(line);
  std::vector<int> column(kEventFields.size(), -1);
  for (std::size_t f = 0; f < kEventFields.size(); ++f) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == kEventFields[f]) column[f] = static_cast<int>(c);
    }
    if (column[f] < 0) {
      throw schema("CSV header lacks column '" + std::string(kEventFields[f]) + "'");
    }
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> cells = split_csv_row(line);
    nlohmann::json j = nlohmann::json::object();
    try {
      for (std::size_t f = 0; f < kEventFields.size(); ++f) {
        const auto c = static_cast<std::size_t>(column[f]);
        const std::string key(kEventFields[f]);
        const std::string cell = c < cells.size() ? cells[c] : std::string();
        if (cell.empty()) {
          j[key] = nullptr;
        } else if (integer_column(key)) {
          j[key] = key == "seed" ? nlohmann::json(std::stoull(cell))
                                 : nlohmann::json(std::stoll(cell));
        } else {
          j[key] = cell;
        }
      }
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no) + ": non-integer numeric cell");
    }
    try {
      corpus.append(event_from_json(j));
    } catch (const Error& ex) {
      throw Error(ex.code(), "line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  corpus.validate_complete(options.allow_partial);
  return corpus;
}

}  // namespace ipdlab
