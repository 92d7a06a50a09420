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

#include <array>
#include <filesystem>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "ipdlab/error.hpp"
#include "ipdlab/session.hpp"
#include "ipdlab/simulation.hpp"

using namespace ipdlab;

namespace {

const Condition kExtCoop{StrategyKind::Extortion, ExpressionPattern::Cooperative};
const Condition kExtComp{StrategyKind::Extortion, ExpressionPattern::Competitive};
const Condition kGenCoop{StrategyKind::Generosity, ExpressionPattern::Cooperative};

ErrorCode error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidArgument;
}

// No expression for the round still awaiting its feeling.
void check_gated(const RoundView& v) {
  const auto j = to_json(v);
  if (j.contains("current")) CHECK_FALSE(j["current"].contains("agent_expression"));
  if (v.phase == RoundPhase::AwaitingChoice) CHECK_FALSE(j.contains("current"));
  if (j.contains("previous")) {
    const int shown = j["previous"]["round"].get<int>();
    if (v.phase == RoundPhase::Completed) {
      CHECK(shown == v.rounds);
    } else {
      CHECK(shown < v.round);
    }
  }
  CHECK(j.dump().find("sealed") == std::string::npos);
}

std::vector<Action> script(std::uint64_t seed, int n) {
  Rng rng(seed);
  std::vector<Action> out;
  for (int i = 0; i < n; ++i) out.push_back(rng.bernoulli(0.6) ? Action::C : Action::D);
  return out;
}

}  // namespace

TEST_CASE("explicit condition") {
  SessionManager m;
  const CreatedSession s = m.create_session(kExtComp);
  CHECK(s.condition == kExtComp);
  CHECK(m.condition_of(s.session_id) == kExtComp);
  CHECK(s.view.phase == RoundPhase::AwaitingChoice);
  CHECK(s.view.round == 1);
  CHECK(s.session_id.size() == 32);
}

TEST_CASE("randomized assignment is balanced") {
  SessionManager m;
  std::array<int, 4> counts{};
  for (std::uint64_t i = 0; i < 4000; ++i) {
    ++counts[static_cast<std::size_t>(m.create_session(std::nullopt).condition.index())];
  }
  for (int c : counts) CHECK(std::fabs(c / 4000.0 - 0.25) <= 0.02);
}

TEST_CASE("first round against each agent") {
  SessionManager m;
  const auto ext = m.create_session(kExtCoop, 1);
  const RoundView a = m.submit_choice(ext.session_id, Action::C);
  REQUIRE(a.current.has_value());
  CHECK(a.current->outcome == JointOutcome::CD);
  CHECK(a.current->participant_points == 2);
  CHECK(a.current->agent_points == 7);
  CHECK(a.phase == RoundPhase::AwaitingFeeling);

  const auto gen = m.create_session(kGenCoop, 1);
  const RoundView b = m.submit_choice(gen.session_id, Action::D);
  CHECK(b.current->outcome == JointOutcome::DC);
  CHECK(b.current->participant_points == 7);
  CHECK(b.current->agent_points == 2);
}

TEST_CASE("out-of-order submissions") {
  SessionManager m;
  const auto s = m.create_session(kExtCoop, 2);
  CHECK(error_of([&] { m.submit_feeling(s.session_id, ParticipantFeeling::Joy); }) ==
        ErrorCode::kOutOfOrderEvent);
  m.submit_choice(s.session_id, Action::C);
  CHECK(error_of([&] { m.submit_choice(s.session_id, Action::C); }) ==
        ErrorCode::kOutOfOrderEvent);
  CHECK(error_of([&] { m.view("nope"); }) == ErrorCode::kUnknownSession);
}

TEST_CASE("expression revealed after the feeling") {
  SessionManager m;
  const auto coop = m.create_session(kGenCoop, 3);
  m.submit_choice(coop.session_id, Action::C);
  const RoundView v = m.submit_feeling(coop.session_id, ParticipantFeeling::Joy);
  REQUIRE(v.previous.has_value());
  CHECK(v.previous->outcome == JointOutcome::CC);
  CHECK(v.previous->agent_expression == AgentExpression::Joy);
  CHECK(v.previous->feeling == ParticipantFeeling::Joy);
  CHECK(v.round == 2);

  const auto comp = m.create_session(kExtComp, 3);
  m.submit_choice(comp.session_id, Action::C);
  const RoundView w = m.submit_feeling(comp.session_id, ParticipantFeeling::Anger);
  CHECK(w.previous->outcome == JointOutcome::CD);
  CHECK(w.previous->agent_expression == AgentExpression::Joy);
}

TEST_CASE("no phase leaks the pending expression") {
  for (int cond = 0; cond < 4; ++cond) {
    SessionManager m;
    const auto s = m.create_session(Condition::from_index(cond), 40 + cond);
    check_gated(s.view);
    const auto actions = script(cond, 20);
    for (int r = 0; r < 20; ++r) {
      check_gated(m.view(s.session_id));
      check_gated(m.submit_choice(s.session_id, actions[static_cast<std::size_t>(r)]));
      check_gated(m.view(s.session_id));
      check_gated(m.submit_feeling(s.session_id, kAllFeelings[static_cast<std::size_t>(r % 5)]));
    }
    const RoundView done = m.view(s.session_id);
    CHECK(done.phase == RoundPhase::Completed);
    check_gated(done);
    CHECK(error_of([&] { m.submit_choice(s.session_id, Action::C); }) ==
          ErrorCode::kSessionComplete);
  }
}

TEST_CASE("ledger tracks per-round payoffs") {
  SessionManager m;
  const auto s = m.create_session(kExtCoop, 5);
  PointPair sum;
  for (Action a : script(5, 20)) {
    const RoundView v = m.submit_choice(s.session_id, a);
    sum.focal += v.current->participant_points;
    sum.partner += v.current->agent_points;
    CHECK(*v.cumulative_points == sum);
    m.submit_feeling(s.session_id, ParticipantFeeling::Neutral);
  }
}

TEST_CASE("points can be hidden") {
  ServiceConfig cfg;
  cfg.show_cumulative_points = false;
  SessionManager m(cfg);
  const auto s = m.create_session(kExtCoop, 5);
  CHECK_FALSE(s.view.cumulative_points.has_value());
  CHECK_FALSE(to_json(s.view).contains("points"));
}

TEST_CASE("agent stream equals run_game with a replay opponent") {
  for (std::uint64_t seed : {0ULL, 7ULL, 123456789ULL}) {
    for (int cond = 0; cond < 4; ++cond) {
      SessionManager m;
      const Condition c = Condition::from_index(cond);
      const auto s = m.create_session(c, seed);
      const auto actions = script(seed + 1000, 20);
      for (Action a : actions) {
        m.submit_choice(s.session_id, a);
        m.submit_feeling(s.session_id, ParticipantFeeling::Neutral);
      }
      const auto events = m.export_session(s.session_id);
      const char* name = c.strategy == StrategyKind::Extortion ? "extortion" : "generosity";
      const GameRecord g = run_game(preset(name).strategy, OpponentPolicy::replay(actions),
                                    GameConfig{20, {}, seed});
      REQUIRE(events.size() == 20);
      for (std::size_t r = 0; r < 20; ++r) CHECK(events[r].agent_action == g.rounds[r].agent);
    }
  }
}

TEST_CASE("same seed, same agent") {
  SessionManager m;
  const auto a = m.create_session(kExtCoop, 99);
  const auto b = m.create_session(kExtCoop, 99);
  for (Action act : script(3, 20)) {
    const RoundView va = m.submit_choice(a.session_id, act);
    const RoundView vb = m.submit_choice(b.session_id, act);
    CHECK(va.current->agent_action == vb.current->agent_action);
    m.submit_feeling(a.session_id, ParticipantFeeling::Joy);
    m.submit_feeling(b.session_id, ParticipantFeeling::Joy);
  }
}

TEST_CASE("export") {
  SessionManager m;
  const auto s = m.create_session(kGenCoop, 8);
  for (int r = 0; r < 7; ++r) {
    m.submit_choice(s.session_id, Action::C);
    m.submit_feeling(s.session_id, ParticipantFeeling::Joy);
  }
  CHECK(error_of([&] { m.export_session(s.session_id); }) == ErrorCode::kSessionIncomplete);
  const auto partial = m.export_session(s.session_id, true);
  CHECK(partial.size() == 7);
  for (const auto& e : partial) CHECK(e.source == EventSource::Human);

  for (int r = 7; r < 20; ++r) {
    m.submit_choice(s.session_id, r % 2 ? Action::C : Action::D);
    m.submit_feeling(s.session_id, ParticipantFeeling::Sadness);
  }
  const auto events = m.export_session(s.session_id);
  REQUIRE(events.size() == 20);
  CHECK_FALSE(events[0].prev_agent_expression.has_value());
  for (std::size_t r = 1; r < 20; ++r) {
    CHECK(events[r].prev_agent_expression == events[r - 1].agent_expression);
  }
  std::stringstream text;
  for (const auto& e : events) text << to_jsonl_line(e) << '\n';
  const Corpus loaded = load_corpus(text);
  CHECK(loaded.size() == 20);
  CHECK(loaded.events() == events);
}

TEST_CASE("a pending feeling is required before the next choice") {
  SessionManager m;
  const auto s = m.create_session(kExtCoop, 1);
  m.submit_choice(s.session_id, Action::D);
  CHECK(m.phase_of(s.session_id) == RoundPhase::AwaitingFeeling);
  CHECK(error_of([&] { m.submit_choice(s.session_id, Action::D); }) ==
        ErrorCode::kOutOfOrderEvent);
  CHECK(error_of([&] { m.export_session(s.session_id); }) == ErrorCode::kSessionIncomplete);
}

TEST_CASE("inactive sessions are abandoned") {
  ServiceConfig cfg;
  cfg.inactivity_timeout = std::chrono::milliseconds(20);
  SessionManager m(cfg);
  const auto s = m.create_session(kExtCoop, 1);
  m.submit_choice(s.session_id, Action::C);
  std::this_thread::sleep_for(std::chrono::milliseconds(60));
  CHECK(error_of([&] { m.submit_feeling(s.session_id, ParticipantFeeling::Joy); }) ==
        ErrorCode::kSessionAbandoned);
  CHECK(m.view(s.session_id).abandoned);
  CHECK(m.export_session(s.session_id, true).size() == 1);
}

TEST_CASE("recovery from the session log") {
  const auto dir = std::filesystem::temp_directory_path() / "ipdlab_session_log_test";
  std::filesystem::remove_all(dir);
  ServiceConfig cfg;
  cfg.log_dir = dir;
  std::string id;
  RoundView before;
  const auto actions = script(17, 20);
  {
    SessionManager m(cfg);
    id = m.create_session(kExtComp, 4242).session_id;
    for (int r = 0; r < 9; ++r) {
      m.submit_choice(id, actions[static_cast<std::size_t>(r)]);
      m.submit_feeling(id, ParticipantFeeling::Regret);
    }
    m.submit_choice(id, actions[9]);
    before = m.view(id);
  }
  SessionManager restored(cfg);
  CHECK(restored.recover() == 1);
  CHECK(to_json(restored.view(id)).dump() == to_json(before).dump());
  restored.submit_feeling(id, ParticipantFeeling::Joy);
  for (int r = 10; r < 20; ++r) {
    restored.submit_choice(id, actions[static_cast<std::size_t>(r)]);
    restored.submit_feeling(id, ParticipantFeeling::Joy);
  }
  const auto events = restored.export_session(id);
  const GameRecord g = run_game(preset("extortion").strategy, OpponentPolicy::replay(actions),
                                GameConfig{20, {}, 4242});
  for (std::size_t r = 0; r < 20; ++r) CHECK(events[r].agent_action == g.rounds[r].agent);
  std::filesystem::remove_all(dir);
}
