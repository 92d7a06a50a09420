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

#ifndef IPDLAB_ZD_HPP_
#define IPDLAB_ZD_HPP_

#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "ipdlab/game.hpp"
#include "ipdlab/rational.hpp"
#include "ipdlab/rng.hpp"

namespace ipdlab {

// Constants of a zero-determinant strategy: baseline payoff l, slope s,
// scale phi (> 0), and first-round cooperation probability p0.
struct ZDParams {
  Rational l;
  Rational s;
  Rational phi;
  Rational p0;
  PayoffMatrix payoff{};

  void validate() const;
  friend bool operator==(const ZDParams&, const ZDParams&) = default;
};

// Memory-one policy (p0, pR, pS, pT, pP): p0 on round 1, otherwise the
// cooperation probability given the payoff class this player received in
// the previous round.
struct MemoryOneStrategy {
  double p0 = 0.0;
  double pR = 0.0;
  double pS = 0.0;
  double pT = 0.0;
  double pP = 0.0;

  // Throws kInvalidArgument unless every component lies in [0, 1].
  static MemoryOneStrategy make(double p0, double pR, double pS, double pT,
                                double pP);
  double cooperation_after(PayoffClass c) const noexcept;
  // Probability of cooperating given the previous outcome from this
  // player's perspective, or p0 when there is none.
  double cooperation_probability(std::optional<JointOutcome> prev) const noexcept;
  bool valid() const noexcept;

  friend bool operator==(const MemoryOneStrategy&,
                         const MemoryOneStrategy&) = default;
};

struct ExactStrategy {
  Rational p0, pR, pS, pT, pP;
  MemoryOneStrategy to_double() const;
  friend bool operator==(const ExactStrategy&, const ExactStrategy&) = default;
};

inline constexpr double kFeasibilityTolerance = 1e-12;

// Closed-form cooperation probabilities:
//   pR = 1 - phi(1-s)(R-l)
//   pS = 1 - phi[(1-s)(S-l) + T - S]
//   pT = phi[(1-s)(l-T) + T - S]
//   pP = phi(1-s)(l-P)
// Throws kInfeasibleStrategy if any lies outside [0, 1] (no clamping).
ExactStrategy derive_exact(const ZDParams& params);
MemoryOneStrategy derive_probabilities(const ZDParams& params);

struct Preset {
  std::string name;
  ZDParams params;
  ExactStrategy exact;
  MemoryOneStrategy strategy;
};

// "extortion": l = P, s = 1/3, phi = 3/13, p0 = 0.
// "generosity": l = R, s = 1/3, phi = 3/11, p0 = 1.
// Throws kUnknownPreset.
Preset preset(std::string_view name, const PayoffMatrix& payoff = {});

// Draws exactly one uniform u from `rng` and cooperates iff u < p, where p
// is chosen from the previous outcome seen from the agent's side.
Action next_action(const MemoryOneStrategy& strategy,
                   std::optional<JointOutcome> prev_agent_view, Rng& rng);

// Finite-horizon payoff relation enforced by a ZD strategy over M rounds:
//   lower_slack <= (1-s) l + s*pi - pi_tilde <= upper_slack
// with lower_slack = -p0/(phi M) and upper_slack = (1-p0)/(phi M).
struct PayoffBound {
  Rational slope;
  Rational intercept;  // (1-s) l
  Rational lower_slack;
  Rational upper_slack;
  int horizon = 0;

  double statistic(double pi, double pi_tilde) const noexcept;
  bool contains(double stat, double tolerance) const noexcept;
};

PayoffBound payoff_bounds(const ZDParams& params, int rounds);

// Strategy spec as read and written by the CLI and the session service.
struct StrategySpec {
  std::string name;
  ZDParams params;
  MemoryOneStrategy strategy;
};

nlohmann::ordered_json to_json(const StrategySpec& spec);
nlohmann::ordered_json to_json(const MemoryOneStrategy& s);
nlohmann::ordered_json to_json(const PayoffMatrix& m);
PayoffMatrix payoff_from_json(const nlohmann::json& j);
// Recomputes the derived probabilities; if the document carries them they
// must agree to 1e-9. Throws kInvalidSpec / kInfeasibleStrategy.
StrategySpec strategy_spec_from_json(const nlohmann::json& j);
StrategySpec load_strategy_spec(const std::string& path);
// "extortion", "generosity" or "file:<path>".
StrategySpec resolve_strategy(std::string_view ref,
                              const PayoffMatrix& payoff = {});

}  // namespace ipdlab

#endif  // IPDLAB_ZD_HPP_
