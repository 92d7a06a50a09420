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
#include <cstdio>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "ipdlab/error.hpp"
#include "ipdlab/zd.hpp"

using namespace ipdlab;

namespace {

std::string three_decimals(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

// Closed forms evaluated directly in doubles.
std::array<double, 4> closed_form(double l, double s, double phi, const PayoffMatrix& m) {
  const double R = m.R, S = m.S, T = m.T, P = m.P;
  return {1 - phi * (1 - s) * (R - l), 1 - phi * ((1 - s) * (S - l) + T - S),
          phi * ((1 - s) * (l - T) + T - S), phi * (1 - s) * (l - P)};
}

}  // namespace

TEST_CASE("extortion preset") {
  const Preset p = preset("extortion");
  CHECK(p.params.l == Rational(3));
  CHECK(p.params.s == Rational(1, 3));
  CHECK(p.params.phi == Rational(3, 13));
  CHECK(p.exact.p0 == Rational(0));
  CHECK(p.exact.pR == Rational(9, 13));
  CHECK(p.exact.pS == Rational(0));
  CHECK(p.exact.pT == Rational(7, 13));
  CHECK(p.exact.pP == Rational(0));
  CHECK(std::fabs(p.strategy.pR - 9.0 / 13) <= 1e-12);
  CHECK(std::fabs(p.strategy.pT - 7.0 / 13) <= 1e-12);
  CHECK(p.strategy.p0 == 0.0);
  CHECK(p.strategy.pS == 0.0);
  CHECK(p.strategy.pP == 0.0);
  CHECK(three_decimals(p.strategy.pR) == "0.692");
  CHECK(three_decimals(p.strategy.pT) == "0.538");
}

TEST_CASE("generosity preset") {
  const Preset p = preset("generosity");
  CHECK(p.exact.p0 == Rational(1));
  CHECK(p.exact.pR == Rational(1));
  CHECK(p.exact.pS == Rational(2, 11));
  CHECK(p.exact.pT == Rational(1));
  CHECK(p.exact.pP == Rational(4, 11));
  CHECK(std::fabs(p.strategy.pS - 2.0 / 11) <= 1e-12);
  CHECK(std::fabs(p.strategy.pP - 4.0 / 11) <= 1e-12);
  CHECK(three_decimals(p.strategy.pS) == "0.182");
  CHECK(three_decimals(p.strategy.pP) == "0.364");
}

TEST_CASE("participant-view policy table for extortion") {
  // Keyed by the participant's outcome: after the participant's CD the agent
  // holds T.
  const MemoryOneStrategy& e = preset("extortion").strategy;
  auto view = [&](JointOutcome participant) {
    return e.cooperation_probability(flip_perspective(participant));
  };
  CHECK(three_decimals(view(JointOutcome::CC)) == "0.692");
  CHECK(three_decimals(view(JointOutcome::CD)) == "0.538");
  CHECK(view(JointOutcome::DC) == 0.0);
  CHECK(view(JointOutcome::DD) == 0.0);
}

TEST_CASE("unknown preset") {
  CHECK_THROWS_AS(preset("tit_for_tat"), Error);
  try {
    preset("nope");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnknownPreset);
  }
}

TEST_CASE("phi must be positive") {
  ZDParams p = preset("extortion").params;
  p.phi = Rational(0);
  CHECK_THROWS_AS(derive_probabilities(p), Error);
}

TEST_CASE("vanishing phi repeats own move") {
  ZDParams p = preset("extortion").params;
  p.phi = Rational(1, 1'000'000'000);
  const MemoryOneStrategy s = derive_probabilities(p);
  CHECK(s.pR == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(s.pS == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(s.pT == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(s.pP == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("feasibility sweep agrees with closed forms") {
  const PayoffMatrix m;
  int feasible = 0, infeasible = 0;
  for (int li = 0; li <= 32; li += 3) {
    for (int si = -4; si <= 8; si += 2) {
      for (int fi = 1; fi <= 40; fi += 3) {
        ZDParams p;
        p.l = Rational(li, 4);
        p.s = Rational(si, 8);
        p.phi = Rational(fi, 50);
        p.p0 = Rational(1, 2);
        const auto cf = closed_form(p.l.to_double(), p.s.to_double(), p.phi.to_double(), m);
        bool expect_ok = true;
        for (double v : cf) expect_ok = expect_ok && v >= -1e-12 && v <= 1 + 1e-12;
        bool ok = true;
        try {
          const MemoryOneStrategy s = derive_probabilities(p);
          CHECK(s.pR == doctest::Approx(cf[0]));
          CHECK(s.pS == doctest::Approx(cf[1]));
          CHECK(s.pT == doctest::Approx(cf[2]));
          CHECK(s.pP == doctest::Approx(cf[3]));
        } catch (const Error& e) {
          CHECK(e.code() == ErrorCode::kInfeasibleStrategy);
          ok = false;
        }
        CHECK(ok == expect_ok);
        (ok ? feasible : infeasible)++;
      }
    }
  }
  CHECK(feasible > 0);
  CHECK(infeasible > 0);
}

TEST_CASE("increasing phi lowers pR, pS and raises pT, pP") {
  for (const char* name : {"extortion", "generosity"}) {
    ZDParams p = preset(name).params;
    const Rational top = p.phi;
    MemoryOneStrategy prev = derive_probabilities([&] {
      ZDParams q = p;
      q.phi = top / Rational(20);
      return q;
    }());
    for (int k = 2; k <= 20; ++k) {
      p.phi = top * Rational(k, 20);
      const MemoryOneStrategy cur = derive_probabilities(p);
      CHECK(cur.pR <= prev.pR + 1e-15);
      CHECK(cur.pS <= prev.pS + 1e-15);
      CHECK(cur.pT >= prev.pT - 1e-15);
      CHECK(cur.pP >= prev.pP - 1e-15);
      prev = cur;
    }
  }
}

TEST_CASE("first and absorbing moves") {
  const MemoryOneStrategy e = preset("extortion").strategy;
  const MemoryOneStrategy g = preset("generosity").strategy;
  Rng rng(2024);
  for (int i = 0; i < 500; ++i) {
    CHECK(next_action(e, std::nullopt, rng) == Action::D);
    CHECK(next_action(g, std::nullopt, rng) == Action::C);
    CHECK(next_action(e, JointOutcome::DD, rng) == Action::D);
    CHECK(next_action(g, JointOutcome::CC, rng) == Action::C);
  }
}

TEST_CASE("next_action is reproducible") {
  const MemoryOneStrategy e = preset("extortion").strategy;
  const std::vector<Action> opp = {Action::C, Action::C, Action::D, Action::C, Action::D,
                                   Action::C, Action::C, Action::C, Action::D, Action::C};
  auto play = [&](std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Action> out;
    std::optional<JointOutcome> prev;
    for (Action o : opp) {
      const Action a = next_action(e, prev, rng);
      out.push_back(a);
      prev = joint_outcome(a, o);
    }
    return out;
  };
  CHECK(play(42) == play(42));
  // One draw per call, so the sequence follows the raw stream.
  Rng raw(42);
  std::optional<JointOutcome> prev;
  for (std::size_t i = 0; i < opp.size(); ++i) {
    const double u = raw.uniform01();
    const Action expect = u < e.cooperation_probability(prev) ? Action::C : Action::D;
    CHECK(play(42)[i] == expect);
    prev = joint_outcome(expect, opp[i]);
  }
}

TEST_CASE("finite-horizon slack terms") {
  const PayoffBound ext = payoff_bounds(preset("extortion").params, 20);
  CHECK(ext.lower_slack == Rational(0));
  CHECK(ext.upper_slack == Rational(13, 60));
  CHECK(ext.intercept == Rational(2));
  CHECK(ext.slope == Rational(1, 3));
  const PayoffBound gen = payoff_bounds(preset("generosity").params, 20);
  CHECK(gen.lower_slack == Rational(-11, 60));
  CHECK(gen.upper_slack == Rational(0));
  CHECK(gen.intercept == Rational(10, 3));

  ZDParams p = preset("generosity").params;
  p.p0 = Rational(0);
  p.s = Rational(1, 2);
  p.phi = Rational(1, 10);
  CHECK(payoff_bounds(p, 7).lower_slack == Rational(0));

  // statistic = intercept + slope * pi - pi_tilde
  CHECK(ext.statistic(3.0, 3.0) == doctest::Approx(0.0));
  CHECK(ext.contains(0.1, 0.0));
  CHECK_FALSE(ext.contains(0.3, 0.0));
  CHECK_FALSE(ext.contains(-1e-6, 0.0));
}

TEST_CASE("strategy spec JSON") {
  const StrategySpec ext = resolve_strategy("extortion");
  const auto j = to_json(ext);
  CHECK(j["l"] == "3");
  CHECK(j["phi"] == "3/13");
  const StrategySpec back = strategy_spec_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.params == ext.params);
  CHECK(back.strategy == ext.strategy);

  nlohmann::json bad = nlohmann::json::parse(j.dump());
  bad["probabilities"]["pR"] = 0.5;
  CHECK_THROWS_AS(strategy_spec_from_json(bad), Error);

  nlohmann::json numeric = {{"name", "custom"}, {"l", 3}, {"s", 0.5}, {"phi", 0.1}, {"p0", 0}};
  const StrategySpec c = strategy_spec_from_json(numeric);
  CHECK(c.params.s == Rational(1, 2));
  CHECK(c.params.phi == Rational(1, 10));

  CHECK_THROWS_AS(resolve_strategy("file:/nonexistent/spec.json"), Error);
  CHECK_THROWS_AS(resolve_strategy("zd"), Error);
}

TEST_CASE("memory-one validation") {
  CHECK_THROWS_AS(MemoryOneStrategy::make(0, 1.5, 0, 0, 0), Error);
  CHECK_NOTHROW(MemoryOneStrategy::make(1, 1, 0, 1, 0));
  const MemoryOneStrategy s = MemoryOneStrategy::make(0.1, 0.2, 0.3, 0.4, 0.5);
  CHECK(s.cooperation_probability(std::nullopt) == 0.1);
  CHECK(s.cooperation_probability(JointOutcome::CC) == 0.2);
  CHECK(s.cooperation_probability(JointOutcome::CD) == 0.3);
  CHECK(s.cooperation_probability(JointOutcome::DC) == 0.4);
  CHECK(s.cooperation_probability(JointOutcome::DD) == 0.5);
}
