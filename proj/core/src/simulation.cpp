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

#include "ipdlab/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

namespace ipdlab {
namespace {

// Stateful per-game opponent; owns its randomness.
class OpponentPlayer {
 public:
  OpponentPlayer(const OpponentPolicy& policy, std::uint64_t game_seed)
      : policy_(policy), rng_(derive_seed(game_seed, Stream::kOpponent)) {}

  Action act(int round_index, std::optional<JointOutcome> prev_own_view) {
    using Kind = OpponentPolicy::Kind;
    switch (policy_.kind()) {
      case Kind::AlwaysC:
        return Action::C;
      case Kind::AlwaysD:
        return Action::D;
      case Kind::TitForTat:
        return prev_own_view ? partner_action(*prev_own_view) : Action::C;
      case Kind::Grim:
        if (prev_own_view && partner_action(*prev_own_view) == Action::D) {
          triggered_ = true;
        }
        return triggered_ ? Action::D : Action::C;
      case Kind::Random:
        return rng_.bernoulli(policy_.q()) ? Action::C : Action::D;
      case Kind::MemoryOne:
        return next_action(policy_.strategy(), prev_own_view, rng_);
      case Kind::Replay:
        return policy_.actions()[static_cast<std::size_t>(round_index)];
    }
    return Action::D;
  }

 private:
  const OpponentPolicy& policy_;
  Rng rng_;
  bool triggered_ = false;
};

std::vector<Action> parse_action_string(std::string_view s) {
  std::vector<Action> out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == ',' || c == ' ') continue;
    out.push_back(parse_action(std::string_view(&c, 1)));
  }
  return out;
}

}  // namespace

OpponentPolicy OpponentPolicy::always_c() { return {Kind::AlwaysC, "always_c"}; }
OpponentPolicy OpponentPolicy::always_d() { return {Kind::AlwaysD, "always_d"}; }
OpponentPolicy OpponentPolicy::tit_for_tat() { return {Kind::TitForTat, "tit_for_tat"}; }
OpponentPolicy OpponentPolicy::grim() { return {Kind::Grim, "grim"}; }

OpponentPolicy OpponentPolicy::random(double q) {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "random opponent needs q in [0, 1]");
  }
  std::string label = std::to_string(q);
  label.erase(label.find_last_not_of('0') + 1);
  if (label.back() == '.') label.push_back('0');
  OpponentPolicy p(Kind::Random, "random(" + label + ")");
  p.q_ = q;
  return p;
}

OpponentPolicy OpponentPolicy::memory_one(MemoryOneStrategy s, std::string label) {
  if (!s.valid()) {
    throw Error(ErrorCode::kInvalidArgument,
                "memory-one probabilities must lie in [0, 1]");
  }
  OpponentPolicy p(Kind::MemoryOne, std::move(label));
  p.strategy_ = s;
  return p;
}

OpponentPolicy OpponentPolicy::replay(std::vector<Action> actions) {
  OpponentPolicy p(Kind::Replay, "replay");
  p.replay_ = std::move(actions);
  return p;
}

OpponentPolicy OpponentPolicy::parse(std::string_view name, const PayoffMatrix& payoff) {
  if (name == "always_c") return always_c();
  if (name == "always_d") return always_d();
  if (name == "tit_for_tat") return tit_for_tat();
  if (name == "grim") return grim();
  if (name == "extortion" || name == "generosity") {
    Preset p = preset(name, payoff);
    return memory_one(p.strategy, p.name);
  }
  if (name.starts_with("file:")) {
    StrategySpec spec = load_strategy_spec(std::string(name.substr(5)));
    return memory_one(spec.strategy, spec.name);
  }
  if (name.starts_with("replay:")) {
    return replay(parse_action_string(name.substr(7)));
  }
  if (name.starts_with("random")) {
    std::string_view arg = name.substr(6);
    if (arg.starts_with(":")) {
      arg.remove_prefix(1);
    } else if (arg.starts_with("(") && arg.ends_with(")")) {
      arg = arg.substr(1, arg.size() - 2);
    } else if (!arg.empty()) {
      arg = {};
    }
    if (arg.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "random opponent needs a probability, e.g. random:0.5");
    }
    try {
      return random(std::stod(std::string(arg)));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kInvalidArgument,
                  "bad probability in '" + std::string(name) + "'");
    }
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown opponent '" + std::string(name) + "'");
}

std::optional<MemoryOneStrategy> OpponentPolicy::as_memory_one() const {
  switch (kind_) {
    case Kind::AlwaysC: return MemoryOneStrategy{1, 1, 1, 1, 1};
    case Kind::AlwaysD: return MemoryOneStrategy{0, 0, 0, 0, 0};
    case Kind::TitForTat: return MemoryOneStrategy{1, 1, 0, 1, 0};
    case Kind::Grim: return MemoryOneStrategy{1, 1, 0, 0, 0};
    case Kind::Random: return MemoryOneStrategy{q_, q_, q_, q_, q_};
    case Kind::MemoryOne: return strategy_;
    case Kind::Replay: return std::nullopt;
  }
  return std::nullopt;
}

double GameRecord::mean_agent() const noexcept {
  return rounds.empty() ? 0.0
                        : static_cast<double>(agent_total) /
                              static_cast<double>(rounds.size());
}

double GameRecord::mean_opponent() const noexcept {
  return rounds.empty() ? 0.0
                        : static_cast<double>(opponent_total) /
                              static_cast<double>(rounds.size());
}

GameRecord run_game(const MemoryOneStrategy& agent, const OpponentPolicy& opponent,
                    const GameConfig& config) {
  config.validate();
  if (opponent.kind() == OpponentPolicy::Kind::Replay &&
      opponent.actions().size() < static_cast<std::size_t>(config.rounds)) {
    throw Error(ErrorCode::kReplayTooShort,
                "replay has " + std::to_string(opponent.actions().size()) +
                    " actions but the game has " + std::to_string(config.rounds) +
                    " rounds");
  }
  GameRecord record;
  record.seed = config.seed;
  record.rounds.reserve(static_cast<std::size_t>(config.rounds));

  Rng agent_rng(derive_seed(config.seed, Stream::kAgent));
  OpponentPlayer opp(opponent, config.seed);
  std::optional<JointOutcome> prev;

  for (int r = 0; r < config.rounds; ++r) {
    RoundRecord rr;
    rr.agent = next_action(agent, prev, agent_rng);
    std::optional<JointOutcome> prev_opp_view;
    if (prev) prev_opp_view = flip_perspective(*prev);
    rr.opponent = opp.act(r, prev_opp_view);
    rr.outcome = joint_outcome(rr.agent, rr.opponent);
    rr.points = payoffs_for(rr.outcome, config.payoff);
    record.agent_total += rr.points.focal;
    record.opponent_total += rr.points.partner;
    record.rounds.push_back(rr);
    prev = rr.outcome;
  }
  return record;
}

double BatchStats::se_linear(double a, double b) const noexcept {
  if (n_games < 2) return 0.0;
  const double n = static_cast<double>(n_games);
  // se_pi^2 * n is the sample variance of per-game means.
  const double var = a * a * se_pi * se_pi * n + b * b * se_pi_tilde * se_pi_tilde * n +
                     2.0 * a * b * cov_pi_pi_tilde;
  return std::sqrt(std::max(0.0, var) / n);
}

BatchStats run_batch(const MemoryOneStrategy& agent, const OpponentPolicy& opponent,
                     const GameConfig& config, std::int64_t n_games, int threads) {
  config.validate();
  if (n_games < 1) {
    throw Error(ErrorCode::kInvalidArgument, "n_games must be >= 1");
  }
  const auto n = static_cast<std::size_t>(n_games);

  struct PerGame {
    Points agent_points = 0;
    Points opponent_points = 0;
    int agent_coops = 0;
    int opponent_coops = 0;
    std::array<int, 4> outcomes{};
  };
  std::vector<PerGame> games(n);

  auto work = [&](std::size_t begin, std::size_t end) {
    GameConfig cfg = config;
    for (std::size_t i = begin; i < end; ++i) {
      cfg.seed = derive_seed(config.seed, static_cast<std::uint64_t>(i));
      GameRecord rec = run_game(agent, opponent, cfg);
      PerGame& g = games[i];
      g.agent_points = rec.agent_total;
      g.opponent_points = rec.opponent_total;
      for (const RoundRecord& rr : rec.rounds) {
        g.agent_coops += rr.agent == Action::C;
        g.opponent_coops += rr.opponent == Action::C;
        ++g.outcomes[static_cast<std::size_t>(index_of(rr.outcome))];
      }
    }
  };

  unsigned workers = threads > 0 ? static_cast<unsigned>(threads)
                                 : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(n, w * chunk);
      const std::size_t end = std::min(n, begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        try {
          work(begin, end);
        } catch (...) {
          failures[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }
  }

  // Sequential reduction in game order keeps results independent of the
  // worker count.
  const double m = static_cast<double>(config.rounds);
  BatchStats s;
  s.n_games = n_games;
  s.rounds = config.rounds;
  double sum_a = 0, sum_b = 0, coop_a = 0, coop_b = 0;
  for (const PerGame& g : games) {
    sum_a += static_cast<double>(g.agent_points) / m;
    sum_b += static_cast<double>(g.opponent_points) / m;
    coop_a += g.agent_coops;
    coop_b += g.opponent_coops;
    for (std::size_t k = 0; k < 4; ++k) s.outcome_counts[k] += g.outcomes[k];
  }
  const double nn = static_cast<double>(n);
  s.mean_pi = sum_a / nn;
  s.mean_pi_tilde = sum_b / nn;
  s.cooperation_rate_agent = coop_a / (nn * m);
  s.cooperation_rate_opponent = coop_b / (nn * m);
  if (n > 1) {
    double ss_a = 0, ss_b = 0, ss_ab = 0;
    for (const PerGame& g : games) {
      const double da = static_cast<double>(g.agent_points) / m - s.mean_pi;
      const double db = static_cast<double>(g.opponent_points) / m - s.mean_pi_tilde;
      ss_a += da * da;
      ss_b += db * db;
      ss_ab += da * db;
    }
    s.se_pi = std::sqrt(ss_a / (nn - 1) / nn);
    s.se_pi_tilde = std::sqrt(ss_b / (nn - 1) / nn);
    s.cov_pi_pi_tilde = ss_ab / (nn - 1);
  }
  return s;
}

TransitionMatrix joint_transition_matrix(const MemoryOneStrategy& agent,
                                         const MemoryOneStrategy& opponent) {
  TransitionMatrix t{};
  for (JointOutcome from : kAllOutcomes) {
    const double pa = agent.cooperation_after(payoff_class(from));
    const double po = opponent.cooperation_after(payoff_class(flip_perspective(from)));
    auto& row = t[static_cast<std::size_t>(index_of(from))];
    row[0] = pa * po;
    row[1] = pa * (1.0 - po);
    row[2] = (1.0 - pa) * po;
    row[3] = (1.0 - pa) * (1.0 - po);
  }
  return t;
}

ExactPayoffs exact_expected_payoffs(const MemoryOneStrategy& agent,
                                    const OpponentPolicy& opponent, int rounds,
                                    const PayoffMatrix& payoff) {
  if (rounds < 1) {
    throw Error(ErrorCode::kInvalidArgument, "rounds must be >= 1");
  }
  const auto opp = opponent.as_memory_one();
  if (!opp) {
    throw Error(ErrorCode::kUnsupportedOpponent,
                "opponent '" + opponent.name() + "' has no memory-one form");
  }
  const TransitionMatrix t = joint_transition_matrix(agent, *opp);

  std::array<double, 4> v = {agent.p0 * opp->p0, agent.p0 * (1.0 - opp->p0),
                             (1.0 - agent.p0) * opp->p0,
                             (1.0 - agent.p0) * (1.0 - opp->p0)};
  ExactPayoffs out;
  for (int r = 0; r < rounds; ++r) {
    for (JointOutcome o : kAllOutcomes) {
      const auto k = static_cast<std::size_t>(index_of(o));
      const PointPair pts = payoffs_for(o, payoff);
      out.pi += v[k] * static_cast<double>(pts.focal);
      out.pi_tilde += v[k] * static_cast<double>(pts.partner);
      out.mean_outcome_distribution[k] += v[k];
    }
    out.cooperation_rate_agent += v[0] + v[1];
    out.cooperation_rate_opponent += v[0] + v[2];
    if (r + 1 == rounds) {
      for (JointOutcome o : kAllOutcomes) {
        out.next_cooperation_agent += v[static_cast<std::size_t>(index_of(o))] *
                                      agent.cooperation_after(payoff_class(o));
      }
      break;
    }
    std::array<double, 4> next{};
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) next[j] += v[i] * t[i][j];
    }
    v = next;
  }
  const double m = static_cast<double>(rounds);
  out.pi /= m;
  out.pi_tilde /= m;
  out.cooperation_rate_agent /= m;
  out.cooperation_rate_opponent /= m;
  for (double& x : out.mean_outcome_distribution) x /= m;
  return out;
}

std::vector<OpponentPolicy> default_opponent_suite(std::string_view agent_preset,
                                                   const PayoffMatrix& payoff) {
  std::vector<OpponentPolicy> suite = {
      OpponentPolicy::always_c(), OpponentPolicy::always_d(),
      OpponentPolicy::tit_for_tat(), OpponentPolicy::grim(),
      OpponentPolicy::random(0.5)};
  const std::string_view other =
      agent_preset == "extortion" ? "generosity" : "extortion";
  Preset p = preset(other, payoff);
  suite.push_back(OpponentPolicy::memory_one(p.strategy, p.name));
  return suite;
}

namespace {

void finish_report(BoundReport& r, double tolerance) {
  r.lower = r.bound.lower_slack.to_double();
  r.upper = r.bound.upper_slack.to_double();
  const double dist = std::min(r.statistic - r.lower, r.upper - r.statistic);
  r.margin = r.se > 0.0 ? dist / r.se : dist;
  r.pass = r.bound.contains(r.statistic, tolerance);
}

}  // namespace

std::vector<BoundReport> verify_zd_bounds(const ZDParams& params,
                                          const MemoryOneStrategy& agent,
                                          const std::vector<OpponentPolicy>& opponents,
                                          const VerifyOptions& options) {
  const PayoffBound bound = payoff_bounds(params, options.rounds);
  const double s = bound.slope.to_double();
  std::vector<BoundReport> reports;
  reports.reserve(opponents.size());

  for (const OpponentPolicy& opp : opponents) {
    BoundReport r;
    r.opponent = opp.name();
    r.bound = bound;
    if (!options.force_monte_carlo && opp.as_memory_one()) {
      const ExactPayoffs e =
          exact_expected_payoffs(agent, opp, options.rounds, params.payoff);
      r.method = "exact";
      r.pi = e.pi;
      r.pi_tilde = e.pi_tilde;
      r.statistic = bound.statistic(e.pi, e.pi_tilde);
      finish_report(r, options.exact_tolerance);
    } else {
      GameConfig cfg{options.rounds, params.payoff, options.seed};
      const BatchStats b = run_batch(agent, opp, cfg, options.n_games, options.threads);
      r.method = "monte_carlo";
      r.pi = b.mean_pi;
      r.pi_tilde = b.mean_pi_tilde;
      r.se_pi = b.se_pi;
      r.se_pi_tilde = b.se_pi_tilde;
      r.se = b.se_linear(s, -1.0);
      r.statistic = bound.statistic(b.mean_pi, b.mean_pi_tilde);
      finish_report(r, options.k_se * r.se + options.exact_tolerance);
    }
    reports.push_back(std::move(r));
  }
  return reports;
}

std::vector<BoundReport> verify_zd_bounds(const ZDParams& params,
                                          const std::vector<OpponentPolicy>& opponents,
                                          const VerifyOptions& options) {
  return verify_zd_bounds(params, derive_probabilities(params), opponents, options);
}

nlohmann::ordered_json to_json(const BatchStats& s) {
  nlohmann::ordered_json j;
  j["n_games"] = s.n_games;
  j["rounds"] = s.rounds;
  j["mean_pi"] = s.mean_pi;
  j["mean_pi_tilde"] = s.mean_pi_tilde;
  j["se_pi"] = s.se_pi;
  j["se_pi_tilde"] = s.se_pi_tilde;
  j["cooperation_rate_agent"] = s.cooperation_rate_agent;
  j["cooperation_rate_opponent"] = s.cooperation_rate_opponent;
  nlohmann::ordered_json counts;
  for (JointOutcome o : kAllOutcomes) {
    counts[std::string(to_string(o))] = s.outcome_counts[static_cast<std::size_t>(index_of(o))];
  }
  j["outcome_counts"] = counts;
  return j;
}

nlohmann::ordered_json to_json(const BoundReport& r) {
  nlohmann::ordered_json j;
  j["opponent"] = r.opponent;
  j["method"] = r.method;
  j["statistic"] = r.statistic;
  j["lower"] = r.lower;
  j["upper"] = r.upper;
  j["bound"] = {{"slope", r.bound.slope.to_string()},
                {"intercept", r.bound.intercept.to_string()},
                {"lower_slack", r.bound.lower_slack.to_string()},
                {"upper_slack", r.bound.upper_slack.to_string()},
                {"horizon", r.bound.horizon}};
  j["pi"] = r.pi;
  j["pi_tilde"] = r.pi_tilde;
  j["se_pi"] = r.se_pi;
  j["se_pi_tilde"] = r.se_pi_tilde;
  j["se_statistic"] = r.se;
  j["margin"] = r.margin;
  j["verdict"] = r.pass ? "pass" : "fail";
  return j;
}

}  // namespace ipdlab
