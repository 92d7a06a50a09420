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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "ipdlab/error.hpp"
#include "ipdlab/simulation.hpp"
#include "ipdlab/synthetic.hpp"

using namespace ipdlab;

namespace {

struct Expected {
  double pi = 0.0;
  double pi_tilde = 0.0;
  double next_coop = 0.0;
};

// Sums over every joint path of a short game.
Expected enumerate_paths(const MemoryOneStrategy& a, const MemoryOneStrategy& b, int rounds,
                         const PayoffMatrix& m) {
  Expected out;
  std::vector<int> path(static_cast<std::size_t>(rounds), 0);
  const long total = 1L << (2 * rounds);
  for (long code = 0; code < total; ++code) {
    double prob = 1.0;
    double mine = 0.0, theirs = 0.0;
    std::optional<JointOutcome> prev;
    for (int r = 0; r < rounds; ++r) {
      const auto o = static_cast<JointOutcome>((code >> (2 * r)) & 3);
      const double pa = a.cooperation_probability(prev);
      const double pb =
          b.cooperation_probability(prev ? std::optional(flip_perspective(*prev)) : std::nullopt);
      prob *= (focal_action(o) == Action::C ? pa : 1 - pa) *
              (partner_action(o) == Action::C ? pb : 1 - pb);
      if (prob == 0.0) break;
      const PointPair pts = payoffs_for(o, m);
      mine += static_cast<double>(pts.focal);
      theirs += static_cast<double>(pts.partner);
      prev = o;
    }
    if (prob == 0.0) continue;
    out.pi += prob * mine / rounds;
    out.pi_tilde += prob * theirs / rounds;
    out.next_coop += prob * a.cooperation_probability(prev);
  }
  return out;
}

MemoryOneStrategy corrupted_extortion() {
  MemoryOneStrategy s = preset("extortion").strategy;
  s.pR -= 0.2;
  return s;
}

}  // namespace

TEST_CASE("opponent parsing") {
  CHECK(OpponentPolicy::parse("always_c").kind() == OpponentPolicy::Kind::AlwaysC);
  CHECK(OpponentPolicy::parse("tit_for_tat").kind() == OpponentPolicy::Kind::TitForTat);
  CHECK(OpponentPolicy::parse("grim").kind() == OpponentPolicy::Kind::Grim);
  CHECK(OpponentPolicy::parse("random:0.25").q() == 0.25);
  CHECK(OpponentPolicy::parse("random(0.5)").q() == 0.5);
  CHECK(OpponentPolicy::parse("generosity").kind() == OpponentPolicy::Kind::MemoryOne);
  CHECK(OpponentPolicy::parse("replay:CCD").actions().size() == 3);
  CHECK_THROWS_AS(OpponentPolicy::parse("random:1.5"), Error);
  CHECK_THROWS_AS(OpponentPolicy::parse("pavlov"), Error);
  CHECK_FALSE(OpponentPolicy::replay({Action::C}).as_memory_one().has_value());
  CHECK(OpponentPolicy::tit_for_tat().as_memory_one() ==
        MemoryOneStrategy::make(1, 1, 0, 1, 0));
}

TEST_CASE("lock-ins") {
  const GameConfig cfg{20, {}, 5};
  const GameRecord ed = run_game(preset("extortion").strategy, OpponentPolicy::always_d(), cfg);
  for (const auto& r : ed.rounds) CHECK(r.outcome == JointOutcome::DD);
  CHECK(ed.mean_agent() == 3.0);
  CHECK(ed.mean_opponent() == 3.0);
  const GameRecord gc = run_game(preset("generosity").strategy, OpponentPolicy::always_c(), cfg);
  for (const auto& r : gc.rounds) CHECK(r.outcome == JointOutcome::CC);
  CHECK(gc.mean_agent() == 5.0);

  const BatchStats b1 =
      run_batch(preset("extortion").strategy, OpponentPolicy::always_d(), cfg, 1000);
  CHECK(b1.mean_pi == 3.0);
  CHECK(b1.mean_pi_tilde == 3.0);
  CHECK(b1.se_pi == 0.0);
  CHECK(b1.se_pi_tilde == 0.0);
  const BatchStats b2 =
      run_batch(preset("generosity").strategy, OpponentPolicy::always_c(), cfg, 1000);
  CHECK(b2.mean_pi == 5.0);
  CHECK(b2.mean_pi_tilde == 5.0);
  CHECK(b2.se_pi == 0.0);
}

TEST_CASE("run_game is deterministic and conserves the ledger") {
  const GameConfig cfg{20, {}, 42};
  const auto a = run_game(preset("extortion").strategy, OpponentPolicy::tit_for_tat(), cfg);
  const auto b = run_game(preset("extortion").strategy, OpponentPolicy::tit_for_tat(), cfg);
  REQUIRE(a.rounds.size() == 20);
  Points mine = 0, theirs = 0;
  for (std::size_t i = 0; i < a.rounds.size(); ++i) {
    CHECK(a.rounds[i].agent == b.rounds[i].agent);
    CHECK(a.rounds[i].opponent == b.rounds[i].opponent);
    CHECK(a.rounds[i].outcome == joint_outcome(a.rounds[i].agent, a.rounds[i].opponent));
    CHECK(a.rounds[i].points == payoffs_for(a.rounds[i].outcome, cfg.payoff));
    mine += a.rounds[i].points.focal;
    theirs += a.rounds[i].points.partner;
  }
  CHECK(mine == a.agent_total);
  CHECK(theirs == a.opponent_total);
}

TEST_CASE("tit for tat echoes the agent") {
  const GameConfig cfg{20, {}, 9};
  const auto g = run_game(preset("extortion").strategy, OpponentPolicy::tit_for_tat(), cfg);
  CHECK(g.rounds[0].opponent == Action::C);
  for (std::size_t i = 1; i < g.rounds.size(); ++i) {
    CHECK(g.rounds[i].opponent == g.rounds[i - 1].agent);
  }
}

TEST_CASE("replay shorter than the game") {
  const GameConfig cfg{20, {}, 1};
  try {
    run_game(preset("extortion").strategy, OpponentPolicy::replay({Action::C, Action::D}), cfg);
    FAIL("expected ReplayTooShort");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kReplayTooShort);
  }
}

TEST_CASE("worker count does not change batch results") {
  const GameConfig cfg{20, {}, 77};
  const auto agent = preset("generosity").strategy;
  const auto opp = OpponentPolicy::random(0.5);
  const BatchStats one = run_batch(agent, opp, cfg, 3001, 1);
  for (int threads : {2, 3, 8}) {
    const BatchStats many = run_batch(agent, opp, cfg, 3001, threads);
    CHECK(many.mean_pi == one.mean_pi);
    CHECK(many.mean_pi_tilde == one.mean_pi_tilde);
    CHECK(many.se_pi == one.se_pi);
    CHECK(many.outcome_counts == one.outcome_counts);
  }
}

TEST_CASE("adding a game leaves earlier games unchanged") {
  const GameConfig cfg{20, {}, 1234};
  const Condition cond{StrategyKind::Extortion, ExpressionPattern::Cooperative};
  const auto agent = preset("extortion").strategy;
  for (std::size_t k : {1u, 5u, 17u}) {
    const Corpus small = simulate_corpus(agent, cond, OpponentPolicy::random(0.5), cfg, k);
    const Corpus large = simulate_corpus(agent, cond, OpponentPolicy::random(0.5), cfg, k + 1);
    REQUIRE(large.size() == small.size() + 20);
    for (std::size_t i = 0; i < small.size(); ++i) CHECK(small.events()[i] == large.events()[i]);
  }
}

TEST_CASE("transition rows are distributions") {
  const auto e = preset("extortion").strategy;
  const auto g = preset("generosity").strategy;
  for (const auto& opp : {MemoryOneStrategy::make(1, 1, 0, 1, 0), g, e,
                          MemoryOneStrategy::make(0.5, 0.3, 0.9, 0.1, 0.7)}) {
    const TransitionMatrix t = joint_transition_matrix(e, opp);
    for (const auto& row : t) {
      double sum = 0;
      for (double p : row) {
        CHECK(p >= 0.0);
        sum += p;
      }
      CHECK(std::fabs(sum - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("exact oracle matches path enumeration") {
  const PayoffMatrix m;
  const auto agents = {preset("extortion").strategy, preset("generosity").strategy,
                       MemoryOneStrategy::make(0.3, 0.8, 0.1, 0.6, 0.2)};
  const std::vector<OpponentPolicy> opponents = {
      OpponentPolicy::always_c(), OpponentPolicy::always_d(), OpponentPolicy::tit_for_tat(),
      OpponentPolicy::grim(), OpponentPolicy::random(0.3),
      OpponentPolicy::memory_one(preset("generosity").strategy, "generosity")};
  for (const auto& agent : agents) {
    for (const auto& opp : opponents) {
      for (int rounds : {1, 2, 5}) {
        const Expected want = enumerate_paths(agent, *opp.as_memory_one(), rounds, m);
        const ExactPayoffs got = exact_expected_payoffs(agent, opp, rounds, m);
        CHECK(got.pi == doctest::Approx(want.pi).epsilon(1e-12));
        CHECK(got.pi_tilde == doctest::Approx(want.pi_tilde).epsilon(1e-12));
        CHECK(got.next_cooperation_agent == doctest::Approx(want.next_coop).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("grim never forgives") {
  const GameConfig cfg{20, {}, 3};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    GameConfig c = cfg;
    c.seed = seed;
    const auto g = run_game(preset("extortion").strategy, OpponentPolicy::grim(), c);
    bool triggered = false;
    for (const auto& r : g.rounds) {
      if (triggered) CHECK(r.opponent == Action::D);
      if (r.agent == Action::D) triggered = true;
    }
  }
}

TEST_CASE("exact oracle rejects non-memory-one opponents") {
  try {
    exact_expected_payoffs(preset("extortion").strategy,
                           OpponentPolicy::replay(std::vector<Action>(20, Action::C)), 20);
    FAIL("expected UnsupportedOpponent");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnsupportedOpponent);
  }
}

TEST_CASE("bound statistic telescopes to the round after the horizon") {
  for (const char* name : {"extortion", "generosity"}) {
    const Preset p = preset(name);
    const PayoffBound bound = payoff_bounds(p.params, 20);
    for (const auto& opp : default_opponent_suite(name)) {
      const ExactPayoffs x = exact_expected_payoffs(p.strategy, opp, 20);
      const double stat = bound.statistic(x.pi, x.pi_tilde);
      const double telescoped = (x.next_cooperation_agent - p.params.p0.to_double()) /
                                (p.params.phi.to_double() * 20);
      CHECK(stat == doctest::Approx(telescoped).epsilon(1e-12));
    }
  }
}

TEST_CASE("extortion against unconditional cooperation stays inside the band") {
  const Preset p = preset("extortion");
  const ExactPayoffs x = exact_expected_payoffs(p.strategy, OpponentPolicy::always_c(), 20);
  const double stat = 2.0 + x.pi / 3.0 - x.pi_tilde;
  CHECK(stat >= 0.0);
  CHECK(stat <= 13.0 / 60.0);
}

TEST_CASE("bound verification over the suites") {
  VerifyOptions opts;
  opts.n_games = 20000;
  opts.seed = 11;
  for (const char* name : {"extortion", "generosity"}) {
    const auto suite = default_opponent_suite(name);
    CHECK(suite.size() == 6);
    for (const auto& r : verify_zd_bounds(preset(name).params, suite, opts)) {
      CHECK_MESSAGE(r.pass, name, " vs ", r.opponent);
      CHECK(r.method == "exact");
    }
    opts.force_monte_carlo = true;
    for (const auto& r : verify_zd_bounds(preset(name).params, suite, opts)) {
      CHECK_MESSAGE(r.pass, name, " vs ", r.opponent);
      CHECK(r.method == "monte_carlo");
    }
    opts.force_monte_carlo = false;
  }
}

TEST_CASE("corrupted strategy fails verification") {
  VerifyOptions opts;
  const auto reports = verify_zd_bounds(preset("extortion").params, corrupted_extortion(),
                                        {OpponentPolicy::always_c()}, opts);
  REQUIRE(reports.size() == 1);
  CHECK_FALSE(reports[0].pass);
  opts.force_monte_carlo = true;
  opts.n_games = 100000;
  CHECK_FALSE(verify_zd_bounds(preset("extortion").params, corrupted_extortion(),
                               {OpponentPolicy::always_c()}, opts)[0]
                  .pass);
}

TEST_CASE("replay opponents are verified by sampling") {
  VerifyOptions opts;
  opts.n_games = 2000;
  std::vector<Action> script;
  for (int i = 0; i < 20; ++i) script.push_back(i % 3 == 0 ? Action::D : Action::C);
  const auto r = verify_zd_bounds(preset("extortion").params,
                                  {OpponentPolicy::replay(script)}, opts);
  CHECK(r[0].method == "monte_carlo");
  CHECK(r[0].pass);
}

TEST_CASE("sampled means agree with the oracle") {
  const GameConfig cfg{20, {}, 99};
  const auto agent = preset("extortion").strategy;
  const auto opp = OpponentPolicy::always_c();
  const BatchStats b = run_batch(agent, opp, cfg, 100000);
  const ExactPayoffs x = exact_expected_payoffs(agent, opp, 20);
  CHECK(std::fabs(b.mean_pi - x.pi) <= 3 * b.se_pi);
  CHECK(std::fabs(b.mean_pi_tilde - x.pi_tilde) <= 3 * b.se_pi_tilde);
  CHECK(b.outcome_counts[0] + b.outcome_counts[1] + b.outcome_counts[2] +
            b.outcome_counts[3] ==
        100000 * 20);
}
