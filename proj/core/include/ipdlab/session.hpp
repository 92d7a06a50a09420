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

#ifndef IPDLAB_SESSION_HPP_
#define IPDLAB_SESSION_HPP_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "ipdlab/corpus.hpp"
#include "ipdlab/game.hpp"
#include "ipdlab/rng.hpp"

namespace ipdlab {

struct ServiceConfig {
  int rounds = 20;
  PayoffMatrix payoff{};
  bool show_cumulative_points = true;
  // Inactivity longer than this marks a session abandoned; never auto-answers.
  std::optional<std::chrono::milliseconds> inactivity_timeout;
  std::chrono::milliseconds expression_display{3000};
  // Append-only session logs; sessions are recovered from here on restart.
  std::optional<std::filesystem::path> log_dir;
};

// What the participant may see right now. The agent's sealed choice is never
// part of a view; the current round's outcome appears only once choices are
// in, and its agent expression only after the feeling report is accepted
// (that is, in `previous` once the next round has opened).
struct RoundView {
  struct Revealed {
    int round = 0;
    Action participant_action = Action::C;
    Action agent_action = Action::C;
    JointOutcome outcome = JointOutcome::CC;
    Points participant_points = 0;
    Points agent_points = 0;
    std::optional<ParticipantFeeling> feeling;
    std::optional<AgentExpression> agent_expression;
  };

  std::string session_id;
  RoundPhase phase = RoundPhase::AwaitingChoice;
  int round = 1;
  int rounds = 20;
  PayoffMatrix payoff{};
  std::optional<PointPair> cumulative_points;  // (participant, agent)
  std::optional<Revealed> current;
  std::optional<Revealed> previous;
  std::chrono::milliseconds expression_display{3000};
  bool abandoned = false;
};

nlohmann::ordered_json to_json(const RoundView& view);

struct CreatedSession {
  std::string session_id;
  Condition condition;
  std::uint64_t seed = 0;
  RoundView view;
};

// Live sessions. Each session's mutations are serialized by its own mutex;
// different sessions proceed concurrently.
class SessionManager {
 public:
  explicit SessionManager(ServiceConfig config = {});
  ~SessionManager();
  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  // nullopt condition = uniform over the four cells. Without a seed one is
  // drawn and recorded so the session can be replayed.
  CreatedSession create_session(std::optional<Condition> condition,
                                std::optional<std::uint64_t> seed = std::nullopt);

  // All throw kUnknownSession for ids that do not exist.
  RoundView view(const std::string& id);
  // Throws kOutOfOrderEvent, kSessionComplete, kSessionAbandoned.
  RoundView submit_choice(const std::string& id, Action action);
  RoundView submit_feeling(const std::string& id, ParticipantFeeling feeling);
  // Throws kSessionIncomplete unless complete or allow_partial.
  std::vector<RoundEvent> export_session(const std::string& id, bool allow_partial = false);

  Condition condition_of(const std::string& id);
  RoundPhase phase_of(const std::string& id);
  std::vector<std::string> session_ids() const;

  // Replays every log in config.log_dir; returns the number restored.
  std::size_t recover();

  const ServiceConfig& config() const noexcept { return config_; }

 private:
  struct Session;

  std::shared_ptr<Session> find(const std::string& id) const;
  std::shared_ptr<Session> make_session(const std::string& id, Condition condition,
                                        std::uint64_t seed, int rounds,
                                        const PayoffMatrix& payoff);
  RoundView view_locked(Session& s) const;
  void touch(Session& s);
  void apply_choice(Session& s, Action action, bool log);
  void apply_feeling(Session& s, ParticipantFeeling feeling, bool log);
  void append_log(Session& s, const nlohmann::ordered_json& record);
  std::string new_id();

  ServiceConfig config_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
  std::mutex id_mutex_;
  Rng id_rng_;
};

}  // namespace ipdlab

#endif  // IPDLAB_SESSION_HPP_
