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

#include <benchmark/benchmark.h>

#include "ipdlab/analysis.hpp"
#include "ipdlab/contingency.hpp"
#include "ipdlab/simulation.hpp"
#include "ipdlab/synthetic.hpp"

namespace {

using namespace ipdlab;

void BM_RunGame(benchmark::State& state) {
  const auto agent = preset("extortion").strategy;
  const auto opp = OpponentPolicy::random(0.5);
  GameConfig cfg;
  for (auto _ : state) {
    ++cfg.seed;
    benchmark::DoNotOptimize(run_game(agent, opp, cfg));
  }
}
BENCHMARK(BM_RunGame);

void BM_RunBatch(benchmark::State& state) {
  const auto agent = preset("generosity").strategy;
  const auto opp = OpponentPolicy::tit_for_tat();
  const GameConfig cfg{20, {}, 1};
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_batch(agent, opp, cfg, state.range(0), 1));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunBatch)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_ExactOracle(benchmark::State& state) {
  const auto agent = preset("extortion").strategy;
  const auto opp = OpponentPolicy::random(0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_expected_payoffs(agent, opp, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_ExactOracle)->Arg(20)->Arg(1000);

void BM_IpfFit(benchmark::State& state) {
  const Corpus corpus = generate_synthetic(synthetic_preset("reference"), 319, 1);
  const TableBuild built =
      build_table(corpus, {"strategy", "expression", "outcome", "joy", "next_action"});
  const LogLinearModel model = parse_model(
      "strategy*expression*outcome*joy,strategy*expression*outcome*next_action", built.table);
  for (auto _ : state) benchmark::DoNotOptimize(ipf_fit(built.table, model));
}
BENCHMARK(BM_IpfFit);

void BM_Analyze(benchmark::State& state) {
  const Corpus corpus = generate_synthetic(synthetic_preset("reference"), 319, 2);
  for (auto _ : state) benchmark::DoNotOptimize(analyze(corpus));
}
BENCHMARK(BM_Analyze)->Unit(benchmark::kMillisecond);

void BM_GenerateSynthetic(benchmark::State& state) {
  const SyntheticSpec spec = synthetic_preset("contagion");
  for (auto _ : state) benchmark::DoNotOptimize(generate_synthetic(spec, 319, 3));
}
BENCHMARK(BM_GenerateSynthetic)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
