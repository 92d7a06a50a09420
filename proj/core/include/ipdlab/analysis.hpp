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

#ifndef IPDLAB_ANALYSIS_HPP_
#define IPDLAB_ANALYSIS_HPP_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ipdlab/contingency.hpp"
#include "ipdlab/corpus.hpp"

namespace ipdlab {

// Known factor names for build_table:
//   strategy, expression, condition, outcome, participant_action,
//   agent_action, feeling, joy, agent_expression, prev_agent_expression,
//   prev_smile, next_action
// Events whose value for any requested factor is absent (null feeling, no
// previous expression, last round for next_action) are excluded and counted.
const std::vector<std::string>& known_factors();

struct TableBuild {
  ContingencyTable table;
  std::int64_t excluded = 0;
};

// Throws kUnknownFactor, or kEmptyTable when no event survives.
TableBuild build_table(const Corpus& corpus, const std::vector<std::string>& factors);
TableBuild build_table(const Corpus& corpus, const std::vector<std::string>& row_factors,
                       const std::string& col_factor);

// Binomial proportion with its support.
struct Rate {
  std::int64_t n = 0;
  std::int64_t hits = 0;

  std::optional<double> value() const;
  double se() const;  // sqrt(p(1-p)/n); 0 when unsupported
  void add(bool hit) {
    ++n;
    hits += hit;
  }
};

struct SelflessFeelings {
  Condition condition;
  Rate joy_after_cc;
  Rate joy_after_dc;
  std::optional<double> pct_joy_cc;
  std::optional<double> pct_joy_dc;
  // %joy after CC minus %joy after DC; undefined without CC or DC support.
  std::optional<double> value;
};

std::array<SelflessFeelings, 4> selfless_feelings(const Corpus& corpus);

// Joy at round n split by whether the agent smiled at round n-1. Only rounds
// >= 2 with a reported feeling and a known previous expression count.
struct ContagionResult {
  std::optional<Condition> condition;  // nullopt = pooled
  Rate after_smile;
  Rate after_no_smile;
  Rate marginal;
  std::optional<double> conditional() const { return after_smile.value(); }
  // P(joy | smile) - P(joy | no smile).
  std::optional<double> gap() const;
};

// Four conditions, then pooled.
std::vector<ContagionResult> contagion_rate(const Corpus& corpus);

struct NextCooperationCell {
  std::optional<Condition> condition;  // nullopt = pooled
  JointOutcome outcome = JointOutcome::CC;
  bool joy = false;
  Rate cooperation;
  bool low_support = false;
};

// Cooperation on round n+1 by (condition, outcome at n, joy at n), rounds
// 1..M-1 as antecedents. Cells below min_count are flagged.
std::vector<NextCooperationCell> next_round_cooperation(const Corpus& corpus,
                                                         std::int64_t min_count = 10);

struct TransitionTable {
  std::optional<Condition> condition;  // nullopt = pooled
  std::array<std::array<std::int64_t, 4>, 4> counts{};
  std::array<std::int64_t, 4> support{};
  // Row-normalized; nullopt for rows without support.
  std::array<std::optional<std::array<double, 4>>, 4> rows{};
};

std::vector<TransitionTable> transition_matrix(const Corpus& corpus);

struct FeelingDistributionCell {
  std::optional<Condition> condition;  // nullopt = pooled
  JointOutcome outcome = JointOutcome::CC;
  std::array<std::int64_t, 5> counts{};
  std::int64_t n = 0;
  // (joy, regret, anger, sadness, neutral); nullopt when unsupported.
  std::optional<std::array<double, 5>> distribution;
};

std::vector<FeelingDistributionCell> feeling_distribution(const Corpus& corpus);
Rate pooled_joy_share(const Corpus& corpus);

struct NamedGTest {
  std::string name;
  std::vector<std::string> factors;
  std::string model;  // parse_model syntax
};

// Default log-linear tests, one per reported figure.
std::vector<NamedGTest> default_g_tests();
// Factors are those named in the model, in order of first appearance.
NamedGTest custom_g_test(const std::string& name, const std::string& model);

struct AnalysisOptions {
  std::int64_t min_count = 10;
  std::vector<NamedGTest> g_tests = default_g_tests();
};

// Report with blocks fig3_transitions, fig4_distributions, fig5_selfless,
// fig6_contagion, fig7_next_cooperation and g_tests.
nlohmann::ordered_json analyze(const Corpus& corpus, const AnalysisOptions& options = {});

// CSV views of the report blocks, one file per figure.
void write_figure_csvs(const Corpus& corpus, const AnalysisOptions& options,
                       const std::string& directory);

}  // namespace ipdlab

#endif  // IPDLAB_ANALYSIS_HPP_
