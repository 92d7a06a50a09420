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

#include "ipdlab/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "ipdlab/rng.hpp"
#include "ipdlab/zd.hpp"

namespace ipdlab {
namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

void check_distribution(const FeelingDistribution& d, const std::string& where) {
  double total = 0.0;
  for (double p : d) {
    if (!(p >= 0.0)) {
      throw Error(ErrorCode::kInvalidSpec, where + ": negative probability");
    }
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidSpec,
                where + ": distribution sums to " + std::to_string(total));
  }
}

FeelingDistribution distribution_from_json(const nlohmann::json& j) {
  FeelingDistribution d{};
  if (j.is_array()) {
    if (j.size() != 5) {
      throw Error(ErrorCode::kInvalidSpec, "feeling distribution needs 5 entries");
    }
    for (std::size_t i = 0; i < 5; ++i) d[i] = j[i].get<double>();
    return d;
  }
  for (const auto& [key, value] : j.items()) {
    try {
      d[static_cast<std::size_t>(parse_feeling(key))] = value.get<double>();
    } catch (const Error&) {
      throw Error(ErrorCode::kInvalidSpec, "unknown feeling '" + key + "'");
    }
  }
  return d;
}

nlohmann::ordered_json distribution_to_json(const FeelingDistribution& d) {
  nlohmann::ordered_json j;
  for (ParticipantFeeling f : kAllFeelings) {
    j[std::string(to_string(f))] = d[static_cast<std::size_t>(f)];
  }
  return j;
}

}  // namespace

ParticipantActionModel ParticipantActionModel::tit_for_tat() {
  ParticipantActionModel m;
  m.p_first = 1.0;
  m.p_after = {1.0, 0.0, 1.0, 0.0};
  return m;
}

ParticipantActionModel ParticipantActionModel::constant(double p) {
  ParticipantActionModel m;
  m.p_first = p;
  m.p_after = {p, p, p, p};
  return m;
}

ParticipantActionModel ParticipantActionModel::cooperate_iff_joy(double p_first) {
  ParticipantActionModel m;
  m.kind = Kind::JoyContingent;
  m.p_first = p_first;
  m.p_after_joy = 1.0;
  m.p_after_other = 0.0;
  return m;
}

FeelingModel FeelingModel::constant(const FeelingDistribution& d) {
  FeelingModel m;
  for (auto& row : m.table) row.fill(d);
  return m;
}

FeelingModel FeelingModel::joy_iff_cc() {
  FeelingModel m = constant({0, 0, 0, 0, 1});
  m.set(std::nullopt, std::nullopt, JointOutcome::CC, {1, 0, 0, 0, 0});
  return m;
}

void FeelingModel::set(std::optional<StrategyKind> strategy,
                       std::optional<ExpressionPattern> expression,
                       std::optional<JointOutcome> outcome, const FeelingDistribution& d) {
  for (Condition c : all_conditions()) {
    if (strategy && c.strategy != *strategy) continue;
    if (expression && c.expression != *expression) continue;
    for (JointOutcome o : kAllOutcomes) {
      if (outcome && o != *outcome) continue;
      table[static_cast<std::size_t>(c.index())][static_cast<std::size_t>(index_of(o))] = d;
    }
  }
}

FeelingDistribution FeelingModel::distribution(const Condition& c, JointOutcome outcome,
                                               std::optional<AgentExpression> prev) const {
  FeelingDistribution d =
      table[static_cast<std::size_t>(c.index())][static_cast<std::size_t>(index_of(outcome))];
  if (joy_lift_after_smile == 0.0 || !prev || !is_smile(*prev)) return d;

  const double joy = d[0];
  const double lifted = std::clamp(joy + joy_lift_after_smile, 0.0, 1.0);
  if (joy < 1.0) {
    const double scale = (1.0 - lifted) / (1.0 - joy);
    for (std::size_t i = 1; i < d.size(); ++i) d[i] *= scale;
  } else {
    d[static_cast<std::size_t>(ParticipantFeeling::Neutral)] = 1.0 - lifted;
  }
  d[0] = lifted;
  return d;
}

void SyntheticSpec::validate() const {
  if (rounds < 1) throw Error(ErrorCode::kInvalidSpec, "rounds must be >= 1");
  if (!payoff.valid()) {
    throw Error(ErrorCode::kInvalidSpec, "payoff matrix must satisfy T > R > P > S");
  }
  if (conditions.empty()) throw Error(ErrorCode::kInvalidSpec, "no conditions");
  bool ok = is_probability(action.p_first) && is_probability(action.p_after_joy) &&
            is_probability(action.p_after_other);
  for (double p : action.p_after) ok = ok && is_probability(p);
  if (!ok) {
    throw Error(ErrorCode::kInvalidSpec, "action model probabilities must lie in [0, 1]");
  }
  if (!(feeling.joy_lift_after_smile >= -1.0 && feeling.joy_lift_after_smile <= 1.0)) {
    throw Error(ErrorCode::kInvalidSpec, "joy_lift_after_smile must lie in [-1, 1]");
  }
  for (Condition c : all_conditions()) {
    for (JointOutcome o : kAllOutcomes) {
      check_distribution(
          feeling.table[static_cast<std::size_t>(c.index())][static_cast<std::size_t>(index_of(o))],
          "feeling model " + c.label() + " " + std::string(to_string(o)));
    }
  }
}

namespace {

std::string padded_id(const char* prefix, std::size_t i, int width) {
  std::string digits = std::to_string(i);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

}  // namespace

Corpus generate_synthetic(const SyntheticSpec& spec, std::size_t n_sessions,
                          std::uint64_t seed) {
  spec.validate();
  CorpusMetadata meta;
  meta.payoff = spec.payoff;
  meta.rounds = spec.rounds;
  meta.provenance = "synthetic:" + spec.name + " seed=" + std::to_string(seed);
  Corpus corpus(meta);

  const MemoryOneStrategy agents[2] = {preset("extortion", spec.payoff).strategy,
                                       preset("generosity", spec.payoff).strategy};
  const int width = std::max<int>(4, static_cast<int>(std::to_string(n_sessions).size()));

  for (std::size_t i = 0; i < n_sessions; ++i) {
    const Condition cond = spec.conditions[i % spec.conditions.size()];
    const std::uint64_t session_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    Rng agent_rng(derive_seed(session_seed, Stream::kAgent));
    Rng action_rng(derive_seed(session_seed, Stream::kParticipantAction));
    Rng feeling_rng(derive_seed(session_seed, Stream::kParticipantFeeling));
    const MemoryOneStrategy& agent = agents[static_cast<int>(cond.strategy)];

    const std::string id = padded_id("syn-", i, width);

    std::optional<JointOutcome> prev;
    std::optional<ParticipantFeeling> prev_feeling;
    std::optional<AgentExpression> prev_expr;
    for (int r = 1; r <= spec.rounds; ++r) {
      double p_coop = spec.action.p_first;
      if (prev) {
        if (spec.action.kind == ParticipantActionModel::Kind::MemoryOne) {
          p_coop = spec.action.p_after[static_cast<std::size_t>(index_of(*prev))];
        } else {
          p_coop = prev_feeling == ParticipantFeeling::Joy ? spec.action.p_after_joy
                                                           : spec.action.p_after_other;
        }
      }
      const Action mine = action_rng.bernoulli(p_coop) ? Action::C : Action::D;
      std::optional<JointOutcome> agent_view;
      if (prev) agent_view = flip_perspective(*prev);
      const Action theirs = next_action(agent, agent_view, agent_rng);

      const JointOutcome outcome = joint_outcome(mine, theirs);
      const FeelingDistribution dist = spec.feeling.distribution(cond, outcome, prev_expr);
      const auto feeling = static_cast<ParticipantFeeling>(feeling_rng.categorical(dist));

      RoundEvent e = make_event(id, EventSource::Synthetic, cond, r, mine, theirs, feeling,
                                prev_expr, session_seed, spec.payoff);
      prev = outcome;
      prev_feeling = feeling;
      prev_expr = e.agent_expression;
      corpus.append(std::move(e));
    }
  }
  return corpus;
}

Corpus simulate_corpus(const MemoryOneStrategy& agent, const Condition& condition,
                       const OpponentPolicy& opponent, const GameConfig& config,
                       std::size_t n_games) {
  config.validate();
  CorpusMetadata meta;
  meta.payoff = config.payoff;
  meta.rounds = config.rounds;
  meta.provenance = "simulated:" + opponent.name() + " seed=" + std::to_string(config.seed);
  Corpus corpus(meta);
  const int width = std::max<int>(4, static_cast<int>(std::to_string(n_games).size()));
  for (std::size_t i = 0; i < n_games; ++i) {
    GameConfig cfg = config;
    cfg.seed = derive_seed(config.seed, static_cast<std::uint64_t>(i));
    const GameRecord game = run_game(agent, opponent, cfg);
    const std::string id = padded_id("sim-", i, width);
    std::optional<AgentExpression> prev_expr;
    for (std::size_t r = 0; r < game.rounds.size(); ++r) {
      const RoundRecord& rec = game.rounds[r];
      RoundEvent e = make_event(id, EventSource::Simulated, condition, static_cast<int>(r + 1),
                                rec.opponent, rec.agent, std::nullopt, prev_expr, cfg.seed,
                                config.payoff);
      prev_expr = e.agent_expression;
      corpus.append(std::move(e));
    }
  }
  return corpus;
}

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
  SyntheticSpec spec;
  if (!j.is_object()) throw Error(ErrorCode::kInvalidSpec, "synthetic spec must be an object");
  static const std::array<std::string_view, 6> kKeys = {
      "name", "rounds", "payoffs", "conditions", "action_model", "feeling_model"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      throw Error(ErrorCode::kInvalidSpec, "unknown synthetic spec key '" + key + "'");
    }
  }
  try {
    spec.name = j.value("name", std::string("custom"));
    spec.rounds = j.value("rounds", 20);
    if (j.contains("payoffs")) spec.payoff = payoff_from_json(j.at("payoffs"));
    if (j.contains("conditions")) {
      spec.conditions.clear();
      for (const auto& c : j.at("conditions")) {
        spec.conditions.push_back(Condition::parse(c.get<std::string>()));
      }
    }
    if (j.contains("action_model")) {
      const auto& a = j.at("action_model");
      const std::string kind = a.value("kind", std::string("memory_one"));
      if (kind == "tit_for_tat") {
        spec.action = ParticipantActionModel::tit_for_tat();
      } else if (kind == "memory_one") {
        spec.action.p_first = a.value("p_first", 0.5);
        if (a.contains("p_after")) {
          for (JointOutcome o : kAllOutcomes) {
            spec.action.p_after[static_cast<std::size_t>(index_of(o))] =
                a.at("p_after").at(std::string(to_string(o))).get<double>();
          }
        }
      } else if (kind == "joy_contingent") {
        spec.action.kind = ParticipantActionModel::Kind::JoyContingent;
        spec.action.p_first = a.value("p_first", 1.0);
        spec.action.p_after_joy = a.value("p_after_joy", 1.0);
        spec.action.p_after_other = a.value("p_after_other", 0.0);
      } else {
        throw Error(ErrorCode::kInvalidSpec, "unknown action model '" + kind + "'");
      }
    }
    if (j.contains("feeling_model")) {
      const auto& f = j.at("feeling_model");
      if (f.contains("default")) {
        spec.feeling = FeelingModel::constant(distribution_from_json(f.at("default")));
      }
      spec.feeling.joy_lift_after_smile = f.value("joy_lift_after_smile", 0.0);
      if (f.contains("cells")) {
        for (const auto& cell : f.at("cells")) {
          std::optional<StrategyKind> strategy;
          std::optional<ExpressionPattern> expression;
          std::optional<JointOutcome> outcome;
          if (cell.contains("strategy")) {
            strategy = parse_strategy_kind(cell.at("strategy").get<std::string>());
          }
          if (cell.contains("expression")) {
            expression = parse_expression_pattern(cell.at("expression").get<std::string>());
          }
          if (cell.contains("outcome")) {
            outcome = parse_outcome(cell.at("outcome").get<std::string>());
          }
          spec.feeling.set(strategy, expression, outcome,
                           distribution_from_json(cell.at("distribution")));
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidSpec, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidSpec) throw;
    throw Error(ErrorCode::kInvalidSpec, e.what());
  }
  spec.validate();
  return spec;
}

nlohmann::ordered_json to_json(const SyntheticSpec& spec) {
  nlohmann::ordered_json j;
  j["name"] = spec.name;
  j["rounds"] = spec.rounds;
  j["payoffs"] = to_json(spec.payoff);
  j["conditions"] = nlohmann::ordered_json::array();
  for (const Condition& c : spec.conditions) j["conditions"].push_back(c.label());
  nlohmann::ordered_json a;
  if (spec.action.kind == ParticipantActionModel::Kind::MemoryOne) {
    a["kind"] = "memory_one";
    a["p_first"] = spec.action.p_first;
    for (JointOutcome o : kAllOutcomes) {
      a["p_after"][std::string(to_string(o))] =
          spec.action.p_after[static_cast<std::size_t>(index_of(o))];
    }
  } else {
    a["kind"] = "joy_contingent";
    a["p_first"] = spec.action.p_first;
    a["p_after_joy"] = spec.action.p_after_joy;
    a["p_after_other"] = spec.action.p_after_other;
  }
  j["action_model"] = a;
  nlohmann::ordered_json f;
  f["joy_lift_after_smile"] = spec.feeling.joy_lift_after_smile;
  f["cells"] = nlohmann::ordered_json::array();
  for (Condition c : all_conditions()) {
    for (JointOutcome o : kAllOutcomes) {
      f["cells"].push_back(
          {{"strategy", to_string(c.strategy)},
           {"expression", to_string(c.expression)},
           {"outcome", to_string(o)},
           {"distribution",
            distribution_to_json(spec.feeling.table[static_cast<std::size_t>(c.index())]
                                                   [static_cast<std::size_t>(index_of(o))])}});
    }
  }
  j["feeling_model"] = f;
  return j;
}

SyntheticSpec synthetic_preset(std::string_view name) {
  SyntheticSpec spec;
  spec.name = std::string(name);
  if (name == "null") {
    spec.action = ParticipantActionModel::constant(0.5);
    spec.feeling = FeelingModel::constant({0.4, 0.15, 0.15, 0.1, 0.2});
  } else if (name == "joy_iff_cc") {
    spec.action = ParticipantActionModel::constant(0.6);
    spec.feeling = FeelingModel::joy_iff_cc();
  } else if (name == "selfless") {
    // Joy-at-cooperation under cooperative displays, joy-at-exploitation
    // under competitive ones.
    spec.action = ParticipantActionModel::constant(0.5);
    spec.feeling = FeelingModel::constant({0.3, 0.0, 0.0, 0.0, 0.7});
    spec.feeling.set(std::nullopt, ExpressionPattern::Cooperative, JointOutcome::CC,
                     {0.8, 0, 0, 0, 0.2});
    spec.feeling.set(std::nullopt, ExpressionPattern::Cooperative, JointOutcome::DC,
                     {0.3, 0, 0, 0, 0.7});
    spec.feeling.set(std::nullopt, ExpressionPattern::Competitive, JointOutcome::CC,
                     {0.3, 0, 0, 0, 0.7});
    spec.feeling.set(std::nullopt, ExpressionPattern::Competitive, JointOutcome::DC,
                     {0.8, 0, 0, 0, 0.2});
  } else if (name == "contagion") {
    spec.action = ParticipantActionModel::constant(0.5);
    spec.feeling = FeelingModel::constant({0.3, 0.2, 0.2, 0.1, 0.2});
    spec.feeling.joy_lift_after_smile = 0.4;
  } else if (name == "reference") {
    // Outcome-dependent feelings with a pooled joy share near 42%.
    spec.action = ParticipantActionModel::tit_for_tat();
    spec.action.p_first = 0.7;
    spec.action.p_after = {0.9, 0.3, 0.6, 0.3};
    spec.feeling = FeelingModel::constant({0.42, 0.14, 0.14, 0.1, 0.2});
  } else {
    throw Error(ErrorCode::kUnknownPreset,
                "unknown synthetic preset '" + std::string(name) + "'");
  }
  return spec;
}

}  // namespace ipdlab
