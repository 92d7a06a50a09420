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

// ipdlab: simulate, verify-bounds, synthesize, analyze, serve.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ipdlab/analysis.hpp"
#include "ipdlab/corpus.hpp"
#include "ipdlab/error.hpp"
#include "ipdlab/server.hpp"
#include "ipdlab/session.hpp"
#include "ipdlab/simulation.hpp"
#include "ipdlab/synthetic.hpp"
#include "ipdlab/zd.hpp"

namespace {

using namespace ipdlab;
using ojson = nlohmann::ordered_json;

// "default" | "T=7,R=5,S=2,P=3" | path to a JSON object {T,R,S,P}
PayoffMatrix parse_payoffs(const std::string& text) {
  if (text.empty() || text == "default") return PayoffMatrix::reference();
  if (text.find('=') != std::string::npos) {
    PayoffMatrix m;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "bad payoff item: " + item);
      const std::string key = item.substr(0, eq);
      const Points v = std::stoll(item.substr(eq + 1));
      if (key == "T") m.T = v;
      else if (key == "R") m.R = v;
      else if (key == "S") m.S = v;
      else if (key == "P") m.P = v;
      else throw Error(ErrorCode::kInvalidArgument, "unknown payoff key: " + key);
    }
    return PayoffMatrix::make(m.T, m.R, m.S, m.P);
  }
  std::ifstream in(text);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot open payoff file: " + text);
  return payoff_from_json(nlohmann::json::parse(in));
}

StrategyKind condition_strategy(const StrategySpec& spec) {
  try {
    return parse_strategy_kind(spec.name);
  } catch (const Error&) {
  }
  // Baseline nearer the punishment payoff reads as extortionate.
  const double l = spec.params.l.to_double();
  const double mid = 0.5 * static_cast<double>(spec.params.payoff.R + spec.params.payoff.P);
  return l <= mid ? StrategyKind::Extortion : StrategyKind::Generosity;
}

void write_json(const ojson& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path);
  out << j.dump(2) << '\n';
}

ipdlab::SessionServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterated prisoner's dilemma laboratory"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Play a strategy against a scripted opponent");
  std::string strategy = "extortion", expressions = "cooperative", opponent = "tit_for_tat";
  std::string out_path, payoffs = "default";
  int rounds = 20;
  std::int64_t games = 1;
  std::uint64_t seed = 0;
  sim->add_option("--strategy", strategy, "extortion | generosity | file:<spec.json>")
      ->capture_default_str();
  sim->add_option("--expressions", expressions, "cooperative | competitive")
      ->capture_default_str();
  sim->add_option("--opponent", opponent,
                  "always_c | always_d | tit_for_tat | grim | random:<q> | extortion | "
                  "generosity | file:<spec.json> | replay:<CD...>")
      ->capture_default_str();
  sim->add_option("--rounds", rounds)->capture_default_str()->check(CLI::PositiveNumber);
  sim->add_option("--games", games)->capture_default_str()->check(CLI::PositiveNumber);
  sim->add_option("--seed", seed)->capture_default_str();
  sim->add_option("--payoffs", payoffs)->capture_default_str();
  sim->add_option("--out", out_path, "events JSONL; stdout if omitted");

  // verify-bounds
  auto* vb = app.add_subcommand("verify-bounds", "Check the finite-horizon payoff relation");
  std::vector<std::string> opponents;
  std::string report_path;
  double k_se = 3.0;
  bool force_mc = false;
  int threads = 0;
  std::int64_t vb_games = 100000;
  vb->add_option("--strategy", strategy)->capture_default_str();
  vb->add_option("--opponents", opponents, "default: the preset's six-opponent suite");
  vb->add_option("--rounds", rounds)->capture_default_str()->check(CLI::PositiveNumber);
  vb->add_option("--games", vb_games)->capture_default_str()->check(CLI::PositiveNumber);
  vb->add_option("--seed", seed)->capture_default_str();
  vb->add_option("--k-se", k_se)->capture_default_str();
  vb->add_flag("--monte-carlo", force_mc, "sample every opponent instead of solving exactly");
  vb->add_option("--threads", threads, "0 = hardware concurrency")->capture_default_str();
  vb->add_option("--payoffs", payoffs)->capture_default_str();
  vb->add_option("--report", report_path, "report JSON; stdout if omitted");

  // synthesize
  auto* syn = app.add_subcommand("synthesize", "Generate a synthetic participant corpus");
  std::string syn_preset = "reference", syn_spec;
  std::size_t sessions = 319;
  syn->add_option("--preset", syn_preset, "null | joy_iff_cc | selfless | contagion | reference")
      ->capture_default_str();
  syn->add_option("--spec", syn_spec, "JSON spec file; overrides --preset");
  syn->add_option("--sessions", sessions)->capture_default_str()->check(CLI::PositiveNumber);
  syn->add_option("--seed", seed)->capture_default_str();
  syn->add_option("--out", out_path, "events JSONL; stdout if omitted");

  // analyze
  auto* an = app.add_subcommand("analyze", "Compute figure tables and G-tests over a corpus");
  std::string corpus_path, csv_dir;
  std::vector<std::string> models;
  std::int64_t min_count = 10;
  bool allow_partial = false;
  an->add_option("--corpus", corpus_path, "events .jsonl or .csv")->required();
  an->add_option("--report", report_path, "report JSON; stdout if omitted");
  an->add_option("--csv", csv_dir, "write per-figure CSV tables here");
  an->add_option("--model", models, "extra G-test: [name=]margin,margin (factors joined by *)");
  an->add_option("--min-count", min_count)->capture_default_str();
  an->add_option("--rounds", rounds)->capture_default_str();
  an->add_option("--payoffs", payoffs)->capture_default_str();
  an->add_flag("--allow-partial", allow_partial, "accept sessions with fewer rounds");

  // serve
  auto* sv = app.add_subcommand("serve", "Run the session service");
  std::string host = "0.0.0.0", log_dir, static_dir;
  int port = 8080;
  bool hide_points = false;
  double timeout_s = 0.0;
  sv->add_option("--port", port)->capture_default_str();
  sv->add_option("--host", host)->capture_default_str();
  sv->add_option("--log", log_dir, "append-only session logs; replayed at startup");
  sv->add_option("--payoffs", payoffs)->capture_default_str();
  sv->add_option("--rounds", rounds)->capture_default_str()->check(CLI::PositiveNumber);
  sv->add_option("--static", static_dir, "serve client assets from this directory");
  sv->add_flag("--hide-points", hide_points, "omit cumulative points from views");
  sv->add_option("--timeout", timeout_s, "inactivity timeout in seconds; 0 disables");

  CLI11_PARSE(app, argc, argv);

  try {
    const PayoffMatrix payoff = parse_payoffs(payoffs);

    if (*sim) {
      const StrategySpec spec = resolve_strategy(strategy, payoff);
      const Condition cond{condition_strategy(spec), parse_expression_pattern(expressions)};
      const OpponentPolicy opp = OpponentPolicy::parse(opponent, payoff);
      const GameConfig config{rounds, payoff, seed};
      const Corpus corpus =
          simulate_corpus(spec.strategy, cond, opp, config, static_cast<std::size_t>(games));
      if (out_path.empty() || out_path == "-") {
        save_corpus(corpus, std::cout);
      } else {
        save_corpus(corpus, std::filesystem::path(out_path));
        const BatchStats stats = run_batch(spec.strategy, opp, config, games);
        ojson summary = to_json(stats);
        summary["events"] = corpus.size();
        std::cerr << summary.dump(2) << '\n';
      }
      return 0;
    }

    if (*vb) {
      const StrategySpec spec = resolve_strategy(strategy, payoff);
      std::vector<OpponentPolicy> suite;
      if (opponents.empty()) {
        const std::string base = condition_strategy(spec) == StrategyKind::Extortion
                                     ? "extortion"
                                     : "generosity";
        suite = default_opponent_suite(base, payoff);
      } else {
        for (const auto& o : opponents) suite.push_back(OpponentPolicy::parse(o, payoff));
      }
      VerifyOptions opts;
      opts.rounds = rounds;
      opts.seed = seed;
      opts.n_games = vb_games;
      opts.k_se = k_se;
      opts.force_monte_carlo = force_mc;
      opts.threads = threads;
      const auto reports = verify_zd_bounds(spec.params, spec.strategy, suite, opts);
      ojson j;
      j["strategy"] = to_json(spec);
      j["rounds"] = rounds;
      j["n_games"] = vb_games;
      j["seed"] = seed;
      j["k_se"] = k_se;
      bool all = true;
      ojson arr = ojson::array();
      for (const auto& r : reports) {
        arr.push_back(to_json(r));
        all = all && r.pass;
        std::fprintf(stderr, "%-14s %-11s stat=%+.6f bounds=[%+.6f, %+.6f] %s\n",
                     r.opponent.c_str(), r.method.c_str(), r.statistic, r.lower, r.upper,
                     r.pass ? "pass" : "FAIL");
      }
      j["reports"] = std::move(arr);
      j["all_pass"] = all;
      write_json(j, report_path);
      return all ? 0 : 1;
    }

    if (*syn) {
      SyntheticSpec spec;
      if (!syn_spec.empty()) {
        std::ifstream in(syn_spec);
        if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot open " + syn_spec);
        spec = synthetic_spec_from_json(nlohmann::json::parse(in));
      } else {
        spec = synthetic_preset(syn_preset);
      }
      const Corpus corpus = generate_synthetic(spec, sessions, seed);
      if (out_path.empty() || out_path == "-") {
        save_corpus(corpus, std::cout);
      } else {
        save_corpus(corpus, std::filesystem::path(out_path));
      }
      return 0;
    }

    if (*an) {
      LoadOptions lo;
      lo.metadata.payoff = payoff;
      lo.metadata.rounds = rounds;
      lo.allow_partial = allow_partial;
      Corpus corpus;
      const std::filesystem::path path(corpus_path);
      if (path.extension() == ".csv") {
        std::ifstream in(path);
        if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot open " + corpus_path);
        corpus = import_csv(in, lo);
      } else {
        corpus = load_corpus(path, lo);
      }
      AnalysisOptions opts;
      opts.min_count = min_count;
      int n = 0;
      for (const auto& m : models) {
        const auto eq = m.find('=');
        if (eq != std::string::npos) {
          opts.g_tests.push_back(custom_g_test(m.substr(0, eq), m.substr(eq + 1)));
        } else {
          opts.g_tests.push_back(custom_g_test("custom_" + std::to_string(++n), m));
        }
      }
      write_json(analyze(corpus, opts), report_path);
      if (!csv_dir.empty()) write_figure_csvs(corpus, opts, csv_dir);
      return 0;
    }

    if (*sv) {
      ServiceConfig cfg;
      cfg.rounds = rounds;
      cfg.payoff = payoff;
      cfg.show_cumulative_points = !hide_points;
      if (timeout_s > 0) {
        cfg.inactivity_timeout =
            std::chrono::milliseconds(static_cast<std::int64_t>(timeout_s * 1000));
      }
      if (!log_dir.empty()) cfg.log_dir = log_dir;
      SessionManager manager(cfg);
      const std::size_t recovered = manager.recover();
      std::optional<std::string> mount;
      if (!static_dir.empty()) mount = static_dir;
      SessionServer server(manager, mount);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::fprintf(stderr, "listening on %s:%d (%zu sessions recovered)\n", host.c_str(), port,
                   recovered);
      if (!server.listen(host, port)) {
        std::fprintf(stderr, "cannot listen on %s:%d\n", host.c_str(), port);
        return 1;
      }
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", std::string(to_string(e.code())).c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
