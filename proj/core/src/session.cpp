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

#include "ipdlab/session.hpp"

#include <fstream>
#include <random>

#include "ipdlab/expression.hpp"
#include "ipdlab/zd.hpp"

namespace ipdlab {
namespace {

using ojson = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

std::uint64_t entropy64() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

ojson revealed_json(const RoundView::Revealed& r) {
  ojson j;
  j["round"] = r.round;
  j["participant_action"] = to_string(r.participant_action);
  j["agent_action"] = to_string(r.agent_action);
  j["participant_project"] = presentation_label(r.participant_action);
  j["agent_project"] = presentation_label(r.agent_action);
  j["outcome"] = to_string(r.outcome);
  j["participant_points"] = r.participant_points;
  j["agent_points"] = r.agent_points;
  if (r.feeling) j["participant_feeling"] = to_string(*r.feeling);
  if (r.agent_expression) j["agent_expression"] = to_string(*r.agent_expression);
  return j;
}

}  // namespace

struct SessionManager::Session {
  Session(std::string id_, Condition condition_, std::uint64_t seed_, int rounds,
          PayoffMatrix payoff_, MemoryOneStrategy agent_)
      : id(std::move(id_)),
        condition(condition_),
        seed(seed_),
        payoff(payoff_),
        machine(rounds),
        agent(agent_),
        policy(ExpressionPolicy::for_pattern(condition_.expression)),
        agent_rng(derive_seed(seed_, Stream::kAgent)) {}

  std::mutex mu;
  std::string id;
  Condition condition;
  std::uint64_t seed;
  PayoffMatrix payoff;
  PhaseMachine machine;
  MemoryOneStrategy agent;
  ExpressionPolicy policy;
  Rng agent_rng;
  std::optional<JointOutcome> last_agent_view;
  Action sealed = Action::D;
  PointPair ledger;  // (participant, agent)
  std::vector<RoundEvent> history;
  bool abandoned = false;
  Clock::time_point last_activity = Clock::now();
  std::optional<std::filesystem::path> log_path;

  // One agent draw per round, taken when the round opens.
  void open_round() { sealed = next_action(agent, last_agent_view, agent_rng); }
};

ojson to_json(const RoundView& v) {
  ojson j;
  j["session_id"] = v.session_id;
  j["phase"] = to_string(v.phase);
  j["round"] = v.round;
  j["rounds"] = v.rounds;
  j["payoffs"] = to_json(v.payoff);
  if (v.cumulative_points) {
    j["points"] = {{"participant", v.cumulative_points->focal},
                   {"agent", v.cumulative_points->partner}};
  }
  if (v.current) j["current"] = revealed_json(*v.current);
  if (v.previous) {
    j["previous"] = revealed_json(*v.previous);
    j["previous"]["display_ms"] = v.expression_display.count();
  }
  j["abandoned"] = v.abandoned;
  return j;
}

SessionManager::SessionManager(ServiceConfig config)
    : config_(std::move(config)), id_rng_(entropy64()) {
  if (config_.rounds < 1) throw Error(ErrorCode::kInvalidArgument, "rounds must be >= 1");
  if (!config_.payoff.valid()) {
    throw Error(ErrorCode::kInvalidPayoffMatrix, "payoff matrix must satisfy T > R > P > S");
  }
  if (config_.log_dir) std::filesystem::create_directories(*config_.log_dir);
}

SessionManager::~SessionManager() = default;

std::string SessionManager::new_id() {
  std::lock_guard lock(id_mutex_);
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx",
                static_cast<unsigned long long>(id_rng_.next_u64()),
                static_cast<unsigned long long>(id_rng_.next_u64() ^ entropy64()));
  return buf;
}

std::shared_ptr<SessionManager::Session> SessionManager::make_session(
    const std::string& id, Condition condition, std::uint64_t seed, int rounds,
    const PayoffMatrix& payoff) {
  const std::string_view name =
      condition.strategy == StrategyKind::Extortion ? "extortion" : "generosity";
  auto s = std::make_shared<Session>(id, condition, seed, rounds, payoff,
                                     preset(name, payoff).strategy);
  if (config_.log_dir) s->log_path = *config_.log_dir / (id + ".jsonl");
  s->open_round();
  return s;
}

CreatedSession SessionManager::create_session(std::optional<Condition> condition,
                                              std::optional<std::uint64_t> seed) {
  if (!seed) {
    std::lock_guard lock(id_mutex_);
    seed = id_rng_.next_u64();
  }
  if (!condition) {
    Rng pick(derive_seed(*seed, Stream::kCondition));
    condition = Condition::from_index(static_cast<int>(pick.uniform01() * kConditionCount));
  }
  const std::string id = new_id();
  auto s = make_session(id, *condition, *seed, config_.rounds, config_.payoff);
  {
    std::lock_guard lock(s->mu);
    append_log(*s, {{"type", "create"},
                    {"session_id", id},
                    {"strategy", to_string(condition->strategy)},
                    {"expression", to_string(condition->expression)},
                    {"seed", *seed},
                    {"rounds", config_.rounds},
                    {"payoffs", to_json(config_.payoff)}});
  }
  {
    std::unique_lock lock(mutex_);
    sessions_.emplace(id, s);
  }
  std::lock_guard lock(s->mu);
  return {id, *condition, *seed, view_locked(*s)};
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) {
    throw Error(ErrorCode::kUnknownSession, "no session '" + id + "'");
  }
  return it->second;
}

void SessionManager::touch(Session& s) {
  const auto now = Clock::now();
  if (config_.inactivity_timeout && !s.abandoned && !s.machine.completed() &&
      now - s.last_activity > *config_.inactivity_timeout) {
    s.abandoned = true;
    append_log(s, {{"type", "abandoned"}, {"round", s.machine.round()}});
  }
  if (s.abandoned) {
    throw Error(ErrorCode::kSessionAbandoned,
                "session " + s.id + " was abandoned after inactivity");
  }
  s.last_activity = now;
}

RoundView SessionManager::view_locked(Session& s) const {
  RoundView v;
  v.session_id = s.id;
  v.phase = s.machine.phase();
  v.round = s.machine.round();
  v.rounds = s.machine.rounds();
  v.payoff = s.payoff;
  v.expression_display = config_.expression_display;
  v.abandoned = s.abandoned;
  if (config_.show_cumulative_points) v.cumulative_points = s.ledger;

  auto reveal = [](const RoundEvent& e, bool with_expression) {
    RoundView::Revealed r;
    r.round = e.round;
    r.participant_action = e.participant_action;
    r.agent_action = e.agent_action;
    r.outcome = e.outcome;
    r.participant_points = e.participant_points;
    r.agent_points = e.agent_points;
    r.feeling = e.participant_feeling;
    if (with_expression) r.agent_expression = e.agent_expression;
    return r;
  };
  // History holds every round whose choices are in. The last entry is the
  // current round while its feeling is pending.
  const bool pending = v.phase == RoundPhase::OutcomeRevealed ||
                       v.phase == RoundPhase::AwaitingFeeling;
  std::size_t done = s.history.size();
  if (pending && done > 0) {
    v.current = reveal(s.history.back(), false);
    --done;
  }
  if (done > 0) v.previous = reveal(s.history[done - 1], true);
  return v;
}

RoundView SessionManager::view(const std::string& id) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  return view_locked(*s);
}

void SessionManager::apply_choice(Session& s, Action action, bool log) {
  PhaseMachine next = s.machine;
  next.advance(RoundEventKind::ChoicesCommitted);
  next.advance(RoundEventKind::OutcomeShown);
  const int round = s.machine.round();
  if (log) {
    append_log(s, {{"type", "choice"}, {"round", round}, {"action", to_string(action)}});
  }
  std::optional<AgentExpression> prev_expr;
  if (!s.history.empty()) prev_expr = s.history.back().agent_expression;
  RoundEvent e = make_event(s.id, EventSource::Human, s.condition, round, action, s.sealed,
                            std::nullopt, prev_expr, s.seed, s.payoff,
                            /*with_expression=*/false);
  s.ledger.focal += e.participant_points;
  s.ledger.partner += e.agent_points;
  s.history.push_back(std::move(e));
  s.machine = next;
}

void SessionManager::apply_feeling(Session& s, ParticipantFeeling feeling, bool log) {
  PhaseMachine next = s.machine;
  next.advance(RoundEventKind::FeelingSubmitted);
  next.advance(RoundEventKind::ExpressionDone);
  if (log) {
    append_log(s, {{"type", "feeling"},
                   {"round", s.machine.round()},
                   {"feeling", to_string(feeling)}});
  }
  RoundEvent& e = s.history.back();
  e.participant_feeling = feeling;
  e.agent_expression = s.policy(e.outcome);
  s.last_agent_view = flip_perspective(e.outcome);
  s.machine = next;
  if (!s.machine.completed()) s.open_round();
}

RoundView SessionManager::submit_choice(const std::string& id, Action action) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  touch(*s);
  apply_choice(*s, action, true);
  return view_locked(*s);
}

RoundView SessionManager::submit_feeling(const std::string& id, ParticipantFeeling feeling) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  touch(*s);
  apply_feeling(*s, feeling, true);
  return view_locked(*s);
}

std::vector<RoundEvent> SessionManager::export_session(const std::string& id,
                                                       bool allow_partial) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  if (!s->machine.completed() && !allow_partial) {
    throw Error(ErrorCode::kSessionIncomplete,
                "session " + id + " is in round " + std::to_string(s->machine.round()) +
                    " of " + std::to_string(s->machine.rounds()));
  }
  return s->history;
}

Condition SessionManager::condition_of(const std::string& id) {
  return find(id)->condition;
}

RoundPhase SessionManager::phase_of(const std::string& id) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  return s->machine.phase();
}

std::vector<std::string> SessionManager::session_ids() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> ids;
  ids.reserve(sessions_.size());
  for (const auto& [id, _] : sessions_) ids.push_back(id);
  return ids;
}

void SessionManager::append_log(Session& s, const ojson& record) {
  if (!s.log_path) return;
  std::ofstream out(*s.log_path, std::ios::binary | std::ios::app);
  out << record.dump() << '\n';
  out.flush();
  if (!out) {
    throw Error(ErrorCode::kInvalidArgument,
                "failed to append to session log " + s.log_path->string());
  }
}

std::size_t SessionManager::recover() {
  if (!config_.log_dir) return 0;
  std::size_t restored = 0;
  for (const auto& entry : std::filesystem::directory_iterator(*config_.log_dir)) {
    if (entry.path().extension() != ".jsonl") continue;
    std::ifstream in(entry.path());
    std::string line;
    std::shared_ptr<Session> s;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      nlohmann::json rec;
      try {
        rec = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error&) {
        // A torn final write from a crash; everything before it is intact.
        break;
      }
      const std::string type = rec.value("type", "");
      if (type == "create") {
        const Condition cond{parse_strategy_kind(rec.at("strategy").get<std::string>()),
                             parse_expression_pattern(rec.at("expression").get<std::string>())};
        s = make_session(rec.at("session_id").get<std::string>(), cond,
                         rec.at("seed").get<std::uint64_t>(), rec.at("rounds").get<int>(),
                         payoff_from_json(rec.at("payoffs")));
      } else if (!s) {
        throw Error(ErrorCode::kParseError,
                    entry.path().string() + ":" + std::to_string(line_no) +
                        ": record before session creation");
      } else if (type == "choice") {
        apply_choice(*s, parse_action(rec.at("action").get<std::string>()), false);
      } else if (type == "feeling") {
        apply_feeling(*s, parse_feeling(rec.at("feeling").get<std::string>()), false);
      } else if (type == "abandoned") {
        s->abandoned = true;
      }
    }
    if (s) {
      std::unique_lock lock(mutex_);
      sessions_[s->id] = s;
      ++restored;
    }
  }
  return restored;
}

}  // namespace ipdlab
