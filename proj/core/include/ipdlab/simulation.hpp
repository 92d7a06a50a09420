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

#ifndef IPDLAB_SIMULATION_HPP_
#define IPDLAB_SIMULATION_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ipdlab/game.hpp"
#include "ipdlab/zd.hpp"

namespace ipdlab {

class OpponentPolicy {
 public:
  enum class Kind { AlwaysC, AlwaysD, TitForTat, Grim, Random, MemoryOne, Replay };

  static OpponentPolicy always_c();
  static OpponentPolicy always_d();
  static OpponentPolicy tit_for_tat();
  static OpponentPolicy grim();
  static OpponentPolicy random(double q);
  static OpponentPolicy memory_one(MemoryOneStrategy s, std::string label = "memory_one");
  static OpponentPolicy replay(std::vector<Action> actions);

  // always_c | always_d | tit_for_tat | grim | random:<q> | extortion |
  // generosity | file:<spec.json> | replay:<C/D string>
  static OpponentPolicy parse(std::string_view name, const PayoffMatrix& payoff = {});

  Kind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  double q() const noexcept { return q_; }
  const MemoryOneStrategy& strategy() const noexcept { return strategy_; }
  const std::vector<Action>& actions() const noexcept { return replay_; }

  // The equivalent memory-one tuple from the opponent's own perspective, when
  // one exists. grim is (1, 1, 0, 0, 0): once it defects it can never again
  // observe mutual cooperation.
  std::optional<MemoryOneStrategy> as_memory_one() const;

 private:
  OpponentPolicy(Kind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

  Kind kind_;
  std::string name_;
  double q_ = 0.0;
  MemoryOneStrategy strategy_{};
  std::vector<Action> replay_;
};

struct RoundRecord {
  Action agent = Action::C;
  Action opponent = Action::C;
  JointOutcome outcome = JointOutcome::CC;  // agent perspective
  PointPair points;                         // (agent, opponent)
};

struct GameRecord {
  std::uint64_t seed = 0;
  std::vector<RoundRecord> rounds;
  Points agent_total = 0;
  Points opponent_total = 0;

  double mean_agent() const noexcept;
  double mean_opponent() const noexcept;
};

// Plays config.rounds simultaneous rounds. The agent draws exactly one
// uniform per round from Rng(derive_seed(seed, Stream::kAgent)); stochastic
// opponents draw from their own stream. Throws kReplayTooShort.
GameRecord run_game(const MemoryOneStrategy& agent, const OpponentPolicy& opponent,
                    const GameConfig& config);

struct BatchStats {
  std::int64_t n_games = 0;
  int rounds = 0;
  double mean_pi = 0.0;        // agent points per round
  double mean_pi_tilde = 0.0;  // opponent points per round
  double se_pi = 0.0;
  double se_pi_tilde = 0.0;
  double cov_pi_pi_tilde = 0.0;  // sample covariance of per-game means
  double cooperation_rate_agent = 0.0;
  double cooperation_rate_opponent = 0.0;
  std::array<std::int64_t, 4> outcome_counts{};  // agent perspective, CC..DD

  // Standard error of (a*pi + b*pi_tilde) across games.
  double se_linear(double a, double b) const noexcept;
};

// Game i uses seed derive_seed(config.seed, i), so the first k games are the
// same whatever n_games is. `threads` <= 0 picks hardware concurrency; the
// result does not depend on the worker count.
BatchStats run_batch(const MemoryOneStrategy& agent, const OpponentPolicy& opponent,
                     const GameConfig& config, std::int64_t n_games, int threads = 0);

// 4x4 row-stochastic transition matrix over agent-perspective outcomes
// CC, CD, DC, DD for two memory-one players.
using TransitionMatrix = std::array<std::array<double, 4>, 4>;
TransitionMatrix joint_transition_matrix(const MemoryOneStrategy& agent,
                                         const MemoryOneStrategy& opponent);

struct ExactPayoffs {
  double pi = 0.0;
  double pi_tilde = 0.0;
  double cooperation_rate_agent = 0.0;
  double cooperation_rate_opponent = 0.0;
  // Agent's cooperation probability for a hypothetical round M+1.
  double next_cooperation_agent = 0.0;
  std::array<double, 4> mean_outcome_distribution{};
};

// Forward recursion over the 4-state outcome distribution for exactly M
// rounds. Throws kUnsupportedOpponent for opponents with no memory-one form.
ExactPayoffs exact_expected_payoffs(const MemoryOneStrategy& agent,
                                    const OpponentPolicy& opponent, int rounds,
                                    const PayoffMatrix& payoff = {});

struct BoundReport {
  std::string opponent;
  std::string method;  // "exact" or "monte_carlo"
  double statistic = 0.0;
  double se = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  PayoffBound bound;
  double pi = 0.0;
  double pi_tilde = 0.0;
  double se_pi = 0.0;
  double se_pi_tilde = 0.0;
  // Distance to the nearer bound (negative when outside), in SE units; raw
  // units when se == 0.
  double margin = 0.0;
  bool pass = false;
};

struct VerifyOptions {
  int rounds = 20;
  std::uint64_t seed = 0;
  std::int64_t n_games = 100'000;
  double k_se = 3.0;
  // Tolerance for the exact route, which has no sampling error.
  double exact_tolerance = 1e-12;
  bool force_monte_carlo = false;
  int threads = 0;
};

std::vector<OpponentPolicy> default_opponent_suite(std::string_view agent_preset,
                                                   const PayoffMatrix& payoff = {});

// One report per opponent. Uses the exact recursion when the opponent has a
// memory-one form (unless force_monte_carlo), Monte Carlo otherwise.
std::vector<BoundReport> verify_zd_bounds(const ZDParams& params,
                                          const MemoryOneStrategy& agent,
                                          const std::vector<OpponentPolicy>& opponents,
                                          const VerifyOptions& options);
std::vector<BoundReport> verify_zd_bounds(const ZDParams& params,
                                          const std::vector<OpponentPolicy>& opponents,
                                          const VerifyOptions& options);

nlohmann::ordered_json to_json(const BatchStats& stats);
nlohmann::ordered_json to_json(const BoundReport& report);

}  // namespace ipdlab

#endif  // IPDLAB_SIMULATION_HPP_
