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

#include "ipdlab/zd.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace ipdlab {
namespace {

Rational rational_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) {
    throw Error(ErrorCode::kInvalidSpec,
                std::string("strategy spec lacks field '") + key + "'");
  }
  const auto& v = j.at(key);
  try {
    if (v.is_string()) return Rational::parse(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
    if (v.is_number()) return Rational::from_double(v.get<double>());
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidSpec,
                std::string("field '") + key + "': " + e.what());
  }
  throw Error(ErrorCode::kInvalidSpec,
              std::string("field '") + key + "' must be a number or \"a/b\"");
}

void check_feasible(const char* name, const Rational& p) {
  const double v = p.to_double();
  if (v < -kFeasibilityTolerance || v > 1.0 + kFeasibilityTolerance) {
    throw Error(ErrorCode::kInfeasibleStrategy,
                std::string(name) + " = " + p.to_string() +
                    " lies outside [0, 1]");
  }
}

}  // namespace

void ZDParams::validate() const {
  if (!(phi > Rational(0))) {
    throw Error(ErrorCode::kInvalidArgument, "phi must be > 0");
  }
  if (p0 < Rational(0) || p0 > Rational(1)) {
    throw Error(ErrorCode::kInvalidArgument, "p0 must lie in [0, 1]");
  }
  if (!payoff.valid()) {
    throw Error(ErrorCode::kInvalidPayoffMatrix,
                "payoff matrix must satisfy T > R > P > S");
  }
}

MemoryOneStrategy MemoryOneStrategy::make(double p0, double pR, double pS,
                                          double pT, double pP) {
  MemoryOneStrategy s{p0, pR, pS, pT, pP};
  if (!s.valid()) {
    throw Error(ErrorCode::kInvalidArgument,
                "memory-one probabilities must lie in [0, 1]");
  }
  return s;
}

bool MemoryOneStrategy::valid() const noexcept {
  for (double p : {p0, pR, pS, pT, pP}) {
    if (!(p >= 0.0 && p <= 1.0)) return false;
  }
  return true;
}

double MemoryOneStrategy::cooperation_after(PayoffClass c) const noexcept {
  switch (c) {
    case PayoffClass::R: return pR;
    case PayoffClass::S: return pS;
    case PayoffClass::T: return pT;
    case PayoffClass::P: return pP;
  }
  return 0.0;
}

double MemoryOneStrategy::cooperation_probability(
    std::optional<JointOutcome> prev) const noexcept {
  return prev ? cooperation_after(payoff_class(*prev)) : p0;
}

MemoryOneStrategy ExactStrategy::to_double() const {
  return {p0.to_double(), pR.to_double(), pS.to_double(), pT.to_double(),
          pP.to_double()};
}

ExactStrategy derive_exact(const ZDParams& params) {
  params.validate();
  const Rational one(1);
  const Rational R(params.payoff.R), S(params.payoff.S), T(params.payoff.T),
      P(params.payoff.P);
  const Rational& l = params.l;
  const Rational& phi = params.phi;
  const Rational slack = one - params.s;

  ExactStrategy out;
  out.p0 = params.p0;
  out.pR = one - phi * slack * (R - l);
  out.pS = one - phi * (slack * (S - l) + T - S);
  out.pT = phi * (slack * (l - T) + T - S);
  out.pP = phi * slack * (l - P);

  check_feasible("pR", out.pR);
  check_feasible("pS", out.pS);
  check_feasible("pT", out.pT);
  check_feasible("pP", out.pP);
  return out;
}

MemoryOneStrategy derive_probabilities(const ZDParams& params) {
  return derive_exact(params).to_double();
}

Preset preset(std::string_view name, const PayoffMatrix& payoff) {
  Preset p;
  p.name = std::string(name);
  p.params.payoff = payoff;
  p.params.s = Rational(1, 3);
  if (name == "extortion") {
    p.params.l = Rational(payoff.P);
    p.params.phi = Rational(3, 13);
    p.params.p0 = Rational(0);
  } else if (name == "generosity") {
    p.params.l = Rational(payoff.R);
    p.params.phi = Rational(3, 11);
    p.params.p0 = Rational(1);
  } else {
    throw Error(ErrorCode::kUnknownPreset,
                "unknown preset '" + std::string(name) +
                    "' (expected extortion or generosity)");
  }
  p.exact = derive_exact(p.params);
  p.strategy = p.exact.to_double();
  return p;
}

Action next_action(const MemoryOneStrategy& strategy,
                   std::optional<JointOutcome> prev_agent_view, Rng& rng) {
  return rng.bernoulli(strategy.cooperation_probability(prev_agent_view))
             ? Action::C
             : Action::D;
}

double PayoffBound::statistic(double pi, double pi_tilde) const noexcept {
  return intercept.to_double() + slope.to_double() * pi - pi_tilde;
}

bool PayoffBound::contains(double stat, double tolerance) const noexcept {
  return stat >= lower_slack.to_double() - tolerance &&
         stat <= upper_slack.to_double() + tolerance;
}

PayoffBound payoff_bounds(const ZDParams& params, int rounds) {
  params.validate();
  if (rounds < 1) {
    throw Error(ErrorCode::kInvalidArgument, "rounds must be >= 1");
  }
  const Rational scale = params.phi * Rational(rounds);
  PayoffBound b;
  b.slope = params.s;
  b.intercept = (Rational(1) - params.s) * params.l;
  b.lower_slack = -params.p0 / scale;
  b.upper_slack = (Rational(1) - params.p0) / scale;
  b.horizon = rounds;
  return b;
}

nlohmann::ordered_json to_json(const PayoffMatrix& m) {
  return {{"T", m.T}, {"R", m.R}, {"S", m.S}, {"P", m.P}};
}

nlohmann::ordered_json to_json(const MemoryOneStrategy& s) {
  return {{"p0", s.p0}, {"pR", s.pR}, {"pS", s.pS}, {"pT", s.pT}, {"pP", s.pP}};
}

nlohmann::ordered_json to_json(const StrategySpec& spec) {
  nlohmann::ordered_json j;
  j["name"] = spec.name;
  j["l"] = spec.params.l.to_string();
  j["s"] = spec.params.s.to_string();
  j["phi"] = spec.params.phi.to_string();
  j["p0"] = spec.params.p0.to_string();
  j["payoffs"] = to_json(spec.params.payoff);
  j["probabilities"] = to_json(spec.strategy);
  return j;
}

PayoffMatrix payoff_from_json(const nlohmann::json& j) {
  try {
    return PayoffMatrix::make(j.at("T").get<Points>(), j.at("R").get<Points>(),
                              j.at("S").get<Points>(), j.at("P").get<Points>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidSpec,
                std::string("payoffs must be an object with integer T, R, S, P: ") +
                    e.what());
  }
}

StrategySpec strategy_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kInvalidSpec, "strategy spec must be a JSON object");
  }
  StrategySpec spec;
  spec.name = j.value("name", std::string("custom"));
  spec.params.l = rational_field(j, "l");
  spec.params.s = rational_field(j, "s");
  spec.params.phi = rational_field(j, "phi");
  spec.params.p0 = rational_field(j, "p0");
  if (j.contains("payoffs")) spec.params.payoff = payoff_from_json(j.at("payoffs"));
  spec.strategy = derive_probabilities(spec.params);

  if (j.contains("probabilities")) {
    const auto& probs = j.at("probabilities");
    const MemoryOneStrategy& d = spec.strategy;
    const std::pair<const char*, double> expected[] = {
        {"p0", d.p0}, {"pR", d.pR}, {"pS", d.pS}, {"pT", d.pT}, {"pP", d.pP}};
    for (const auto& [key, value] : expected) {
      if (!probs.contains(key)) continue;
      const double stated = probs.at(key).get<double>();
      if (std::fabs(stated - value) > 1e-9) {
        std::ostringstream msg;
        msg << "stated " << key << " = " << stated
            << " disagrees with derived value " << value;
        throw Error(ErrorCode::kInvalidSpec, msg.str());
      }
    }
  }
  return spec;
}

StrategySpec load_strategy_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kInvalidArgument, "cannot open " + path);
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParseError, path + ": " + e.what());
  }
  return strategy_spec_from_json(j);
}

StrategySpec resolve_strategy(std::string_view ref, const PayoffMatrix& payoff) {
  if (ref.starts_with("file:")) {
    return load_strategy_spec(std::string(ref.substr(5)));
  }
  Preset p = preset(ref, payoff);
  return {p.name, p.params, p.strategy};
}

}  // namespace ipdlab
