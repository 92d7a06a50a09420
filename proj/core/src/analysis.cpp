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

#include "ipdlab/analysis.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

namespace ipdlab {
namespace {

using ojson = nlohmann::ordered_json;
constexpr std::size_t kNone = static_cast<std::size_t>(-1);

// Index of the next round's event within the same session, or kNone.
std::vector<std::size_t> successors(const Corpus& corpus) {
  std::vector<std::size_t> next(corpus.size(), kNone);
  for (const std::string& id : corpus.session_ids()) {
    const auto& rows = corpus.session_events(id);
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) next[rows[k]] = rows[k + 1];
  }
  return next;
}

struct FactorDef {
  std::vector<std::string> levels;
  std::function<std::optional<std::size_t>(const Corpus&, std::size_t,
                                           const std::vector<std::size_t>&)>
      level;
};

std::vector<std::string> outcome_levels() { return {"CC", "CD", "DC", "DD"}; }

const std::vector<std::pair<std::string, FactorDef>>& factor_registry() {
  using Opt = std::optional<std::size_t>;
  static const std::vector<std::pair<std::string, FactorDef>> registry = [] {
    std::vector<std::pair<std::string, FactorDef>> r;
    auto ev = [](const Corpus& c, std::size_t i) -> const RoundEvent& { return c.events()[i]; };
    r.push_back({"strategy", {{"extortion", "generosity"}, [ev](auto& c, auto i, auto&) -> Opt {
                                return static_cast<std::size_t>(ev(c, i).condition.strategy);
                              }}});
    r.push_back({"expression", {{"cooperative", "competitive"}, [ev](auto& c, auto i, auto&) -> Opt {
                                  return static_cast<std::size_t>(ev(c, i).condition.expression);
                                }}});
    std::vector<std::string> cond_levels;
    for (Condition cd : all_conditions()) cond_levels.push_back(cd.label());
    r.push_back({"condition", {cond_levels, [ev](auto& c, auto i, auto&) -> Opt {
                                 return static_cast<std::size_t>(ev(c, i).condition.index());
                               }}});
    r.push_back({"outcome", {outcome_levels(), [ev](auto& c, auto i, auto&) -> Opt {
                               return static_cast<std::size_t>(index_of(ev(c, i).outcome));
                             }}});
    r.push_back({"participant_action", {{"C", "D"}, [ev](auto& c, auto i, auto&) -> Opt {
                                          return static_cast<std::size_t>(ev(c, i).participant_action);
                                        }}});
    r.push_back({"agent_action", {{"C", "D"}, [ev](auto& c, auto i, auto&) -> Opt {
                                    return static_cast<std::size_t>(ev(c, i).agent_action);
                                  }}});
    r.push_back({"feeling", {{"joy", "regret", "anger", "sadness", "neutral"},
                             [ev](auto& c, auto i, auto&) -> Opt {
                               const auto& f = ev(c, i).participant_feeling;
                               if (!f) return std::nullopt;
                               return static_cast<std::size_t>(*f);
                             }}});
    r.push_back({"joy", {{"joy", "not_joy"}, [ev](auto& c, auto i, auto&) -> Opt {
                           const auto& f = ev(c, i).participant_feeling;
                           if (!f) return std::nullopt;
                           return *f == ParticipantFeeling::Joy ? 0 : 1;
                         }}});
    r.push_back({"agent_expression", {{"joy", "regret", "anger", "neutral"},
                                      [ev](auto& c, auto i, auto&) -> Opt {
                                        const auto& x = ev(c, i).agent_expression;
                                        if (!x) return std::nullopt;
                                        return static_cast<std::size_t>(*x);
                                      }}});
    r.push_back({"prev_agent_expression", {{"joy", "regret", "anger", "neutral"},
                                           [ev](auto& c, auto i, auto&) -> Opt {
                                             const auto& x = ev(c, i).prev_agent_expression;
                                             if (!x) return std::nullopt;
                                             return static_cast<std::size_t>(*x);
                                           }}});
    r.push_back({"prev_smile", {{"smile", "no_smile"}, [ev](auto& c, auto i, auto&) -> Opt {
                                  const auto& x = ev(c, i).prev_agent_expression;
                                  if (!x) return std::nullopt;
                                  return is_smile(*x) ? 0 : 1;
                                }}});
    r.push_back({"next_action", {{"C", "D"}, [ev](auto& c, auto i, auto& next) -> Opt {
                                   if (next[i] == kNone) return std::nullopt;
                                   return static_cast<std::size_t>(ev(c, next[i]).participant_action);
                                 }}});
    return r;
  }();
  return registry;
}

const FactorDef& lookup_factor(const std::string& name) {
  for (const auto& [n, def] : factor_registry()) {
    if (n == name) return def;
  }
  throw Error(ErrorCode::kUnknownFactor, "unknown factor '" + name + "'");
}

ojson rate_json(const Rate& r) {
  ojson j;
  j["n"] = r.n;
  j["hits"] = r.hits;
  const auto v = r.value();
  j["proportion"] = v ? ojson(*v) : ojson(nullptr);
  j["percent"] = v ? ojson(100.0 * *v) : ojson(nullptr);
  j["se"] = r.se();
  return j;
}

ojson optional_json(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

std::string condition_label(const std::optional<Condition>& c) {
  return c ? c->label() : std::string("pooled");
}

std::string csv_number(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream s;
  s.precision(17);
  s << *v;
  return s.str();
}

}  // namespace

const std::vector<std::string>& known_factors() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, _] : factor_registry()) n.push_back(name);
    return n;
  }();
  return names;
}

TableBuild build_table(const Corpus& corpus, const std::vector<std::string>& factors) {
  if (factors.empty()) throw Error(ErrorCode::kInvalidArgument, "no factors given");
  std::vector<const FactorDef*> defs;
  std::vector<Factor> axes;
  for (const std::string& name : factors) {
    defs.push_back(&lookup_factor(name));
    axes.push_back({name, defs.back()->levels});
  }
  TableBuild out{ContingencyTable(axes), 0};
  const std::vector<std::size_t> next = successors(corpus);
  std::vector<std::size_t> levels(defs.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    bool keep = true;
    for (std::size_t f = 0; f < defs.size() && keep; ++f) {
      const auto lv = defs[f]->level(corpus, i, next);
      if (lv) {
        levels[f] = *lv;
      } else {
        keep = false;
      }
    }
    if (keep) {
      out.table.add(levels);
    } else {
      ++out.excluded;
    }
  }
  if (out.table.total() == 0) {
    throw Error(ErrorCode::kEmptyTable, "no events left after exclusions");
  }
  return out;
}

TableBuild build_table(const Corpus& corpus, const std::vector<std::string>& row_factors,
                       const std::string& col_factor) {
  std::vector<std::string> all = row_factors;
  all.push_back(col_factor);
  return build_table(corpus, all);
}

std::optional<double> Rate::value() const {
  if (n == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(n);
}

double Rate::se() const {
  if (n == 0) return 0.0;
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

std::array<SelflessFeelings, 4> selfless_feelings(const Corpus& corpus) {
  std::array<SelflessFeelings, 4> out;
  for (Condition c : all_conditions()) out[static_cast<std::size_t>(c.index())].condition = c;
  for (const RoundEvent& e : corpus.events()) {
    if (!e.participant_feeling) continue;
    SelflessFeelings& s = out[static_cast<std::size_t>(e.condition.index())];
    const bool joy = *e.participant_feeling == ParticipantFeeling::Joy;
    if (e.outcome == JointOutcome::CC) s.joy_after_cc.add(joy);
    if (e.outcome == JointOutcome::DC) s.joy_after_dc.add(joy);
  }
  for (SelflessFeelings& s : out) {
    if (auto v = s.joy_after_cc.value()) s.pct_joy_cc = 100.0 * *v;
    if (auto v = s.joy_after_dc.value()) s.pct_joy_dc = 100.0 * *v;
    if (s.pct_joy_cc && s.pct_joy_dc) s.value = *s.pct_joy_cc - *s.pct_joy_dc;
  }
  return out;
}

std::optional<double> ContagionResult::gap() const {
  const auto a = after_smile.value();
  const auto b = after_no_smile.value();
  if (!a || !b) return std::nullopt;
  return *a - *b;
}

std::vector<ContagionResult> contagion_rate(const Corpus& corpus) {
  std::vector<ContagionResult> out(5);
  for (Condition c : all_conditions()) out[static_cast<std::size_t>(c.index())].condition = c;
  for (const RoundEvent& e : corpus.events()) {
    if (e.round < 2 || !e.participant_feeling || !e.prev_agent_expression) continue;
    const bool joy = *e.participant_feeling == ParticipantFeeling::Joy;
    const bool smile = is_smile(*e.prev_agent_expression);
    for (ContagionResult* r : {&out[static_cast<std::size_t>(e.condition.index())], &out[4]}) {
      r->marginal.add(joy);
      (smile ? r->after_smile : r->after_no_smile).add(joy);
    }
  }
  return out;
}

std::vector<NextCooperationCell> next_round_cooperation(const Corpus& corpus,
                                                         std::int64_t min_count) {
  // [condition 0..3, pooled 4][outcome][joy, not joy]
  std::array<std::array<std::array<Rate, 2>, 4>, 5> rates{};
  const std::vector<std::size_t> next = successors(corpus);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const RoundEvent& e = corpus.events()[i];
    if (next[i] == kNone || !e.participant_feeling) continue;
    const bool coop = corpus.events()[next[i]].participant_action == Action::C;
    const std::size_t joy = *e.participant_feeling == ParticipantFeeling::Joy ? 0 : 1;
    const auto o = static_cast<std::size_t>(index_of(e.outcome));
    rates[static_cast<std::size_t>(e.condition.index())][o][joy].add(coop);
    rates[4][o][joy].add(coop);
  }
  std::vector<NextCooperationCell> out;
  for (std::size_t c = 0; c < 5; ++c) {
    for (JointOutcome o : kAllOutcomes) {
      for (std::size_t j = 0; j < 2; ++j) {
        NextCooperationCell cell;
        if (c < 4) cell.condition = Condition::from_index(static_cast<int>(c));
        cell.outcome = o;
        cell.joy = j == 0;
        cell.cooperation = rates[c][static_cast<std::size_t>(index_of(o))][j];
        cell.low_support = cell.cooperation.n < min_count;
        out.push_back(cell);
      }
    }
  }
  return out;
}

std::vector<TransitionTable> transition_matrix(const Corpus& corpus) {
  std::vector<TransitionTable> out(5);
  for (Condition c : all_conditions()) out[static_cast<std::size_t>(c.index())].condition = c;
  const std::vector<std::size_t> next = successors(corpus);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (next[i] == kNone) continue;
    const RoundEvent& e = corpus.events()[i];
    const auto from = static_cast<std::size_t>(index_of(e.outcome));
    const auto to = static_cast<std::size_t>(index_of(corpus.events()[next[i]].outcome));
    for (TransitionTable* t : {&out[static_cast<std::size_t>(e.condition.index())], &out[4]}) {
      ++t->counts[from][to];
      ++t->support[from];
    }
  }
  for (TransitionTable& t : out) {
    for (std::size_t r = 0; r < 4; ++r) {
      if (t.support[r] == 0) continue;
      std::array<double, 4> row{};
      for (std::size_t k = 0; k < 4; ++k) {
        row[k] = static_cast<double>(t.counts[r][k]) / static_cast<double>(t.support[r]);
      }
      t.rows[r] = row;
    }
  }
  return out;
}

std::vector<FeelingDistributionCell> feeling_distribution(const Corpus& corpus) {
  std::vector<FeelingDistributionCell> out(20);
  for (std::size_t c = 0; c < 5; ++c) {
    for (JointOutcome o : kAllOutcomes) {
      auto& cell = out[c * 4 + static_cast<std::size_t>(index_of(o))];
      if (c < 4) cell.condition = Condition::from_index(static_cast<int>(c));
      cell.outcome = o;
    }
  }
  for (const RoundEvent& e : corpus.events()) {
    if (!e.participant_feeling) continue;
    const auto o = static_cast<std::size_t>(index_of(e.outcome));
    const auto f = static_cast<std::size_t>(*e.participant_feeling);
    for (std::size_t c : {static_cast<std::size_t>(e.condition.index()), std::size_t{4}}) {
      auto& cell = out[c * 4 + o];
      ++cell.counts[f];
      ++cell.n;
    }
  }
  for (auto& cell : out) {
    if (cell.n == 0) continue;
    std::array<double, 5> d{};
    for (std::size_t f = 0; f < 5; ++f) {
      d[f] = static_cast<double>(cell.counts[f]) / static_cast<double>(cell.n);
    }
    cell.distribution = d;
  }
  return out;
}

Rate pooled_joy_share(const Corpus& corpus) {
  Rate r;
  for (const RoundEvent& e : corpus.events()) {
    if (e.participant_feeling) r.add(*e.participant_feeling == ParticipantFeeling::Joy);
  }
  return r;
}

std::vector<NamedGTest> default_g_tests() {
  const std::vector<std::string> cond_outcome_feeling = {"strategy", "expression", "outcome",
                                                          "feeling"};
  return {
      {"fig4_feeling_association", cond_outcome_feeling,
       "strategy*expression*outcome,feeling"},
      {"fig4_expression_effect", cond_outcome_feeling,
       "strategy*expression*outcome,strategy*outcome*feeling"},
      {"fig4_strategy_effect", cond_outcome_feeling,
       "strategy*expression*outcome,expression*outcome*feeling"},
      {"fig5_selfless", {"expression", "outcome", "joy"}, "expression*outcome,outcome*joy"},
      {"fig6_contagion", {"prev_smile", "joy"}, "prev_smile,joy"},
      {"fig7_next_cooperation",
       {"strategy", "expression", "outcome", "joy", "next_action"},
       "strategy*expression*outcome*joy,strategy*expression*outcome*next_action"},
  };
}

NamedGTest custom_g_test(const std::string& name, const std::string& model) {
  NamedGTest t{name, {}, model};
  std::string token;
  auto flush = [&] {
    const auto first = token.find_first_not_of(" []");
    const auto last = token.find_last_not_of(" []");
    if (first != std::string::npos) {
      const std::string f = token.substr(first, last - first + 1);
      if (std::find(t.factors.begin(), t.factors.end(), f) == t.factors.end()) {
        lookup_factor(f);
        t.factors.push_back(f);
      }
    }
    token.clear();
  };
  for (char c : model) {
    if (c == '*' || c == ',' || c == ';' || c == ']') {
      flush();
    } else {
      token += c;
    }
  }
  flush();
  if (t.factors.empty()) throw Error(ErrorCode::kInvalidArgument, "empty model specification");
  return t;
}

ojson analyze(const Corpus& corpus, const AnalysisOptions& options) {
  ojson report;
  std::int64_t null_feelings = 0;
  for (const RoundEvent& e : corpus.events()) null_feelings += !e.participant_feeling;
  report["corpus"] = {{"events", corpus.size()},
                      {"sessions", corpus.session_count()},
                      {"rounds", corpus.metadata().rounds},
                      {"excluded_null_feeling", null_feelings}};

  ojson fig3 = ojson::array();
  for (const TransitionTable& t : transition_matrix(corpus)) {
    ojson j;
    j["condition"] = condition_label(t.condition);
    for (JointOutcome o : kAllOutcomes) {
      const auto r = static_cast<std::size_t>(index_of(o));
      ojson row;
      row["support"] = t.support[r];
      row["counts"] = t.counts[r];
      row["probabilities"] = t.rows[r] ? ojson(*t.rows[r]) : ojson(nullptr);
      j["rows"][std::string(to_string(o))] = row;
    }
    fig3.push_back(j);
  }
  report["fig3_transitions"] = fig3;

  ojson fig4 = ojson::array();
  for (const auto& cell : feeling_distribution(corpus)) {
    ojson j;
    j["condition"] = condition_label(cell.condition);
    j["outcome"] = to_string(cell.outcome);
    j["n"] = cell.n;
    j["counts"] = cell.counts;
    j["supported"] = cell.distribution.has_value();
    j["distribution"] = cell.distribution ? ojson(*cell.distribution) : ojson(nullptr);
    fig4.push_back(j);
  }
  const Rate joy = pooled_joy_share(corpus);
  report["fig4_distributions"] = {{"feelings", {"joy", "regret", "anger", "sadness", "neutral"}},
                                  {"cells", fig4},
                                  {"pooled_joy", rate_json(joy)}};

  ojson fig5 = ojson::array();
  for (const SelflessFeelings& s : selfless_feelings(corpus)) {
    fig5.push_back({{"condition", s.condition.label()},
                    {"joy_after_cc", rate_json(s.joy_after_cc)},
                    {"joy_after_dc", rate_json(s.joy_after_dc)},
                    {"pct_joy_cc", optional_json(s.pct_joy_cc)},
                    {"pct_joy_dc", optional_json(s.pct_joy_dc)},
                    {"value", optional_json(s.value)}});
  }
  report["fig5_selfless"] = fig5;

  ojson fig6 = ojson::array();
  for (const ContagionResult& c : contagion_rate(corpus)) {
    const auto gap = c.gap();
    fig6.push_back({{"condition", condition_label(c.condition)},
                    {"joy_after_smile", rate_json(c.after_smile)},
                    {"joy_after_no_smile", rate_json(c.after_no_smile)},
                    {"marginal_joy", rate_json(c.marginal)},
                    {"gap", optional_json(gap)},
                    {"gap_percent", gap ? ojson(100.0 * *gap) : ojson(nullptr)}});
  }
  report["fig6_contagion"] = fig6;

  ojson fig7 = ojson::array();
  for (const NextCooperationCell& c : next_round_cooperation(corpus, options.min_count)) {
    fig7.push_back({{"condition", condition_label(c.condition)},
                    {"outcome", to_string(c.outcome)},
                    {"feeling", c.joy ? "joy" : "not_joy"},
                    {"next_cooperation", rate_json(c.cooperation)},
                    {"low_support", c.low_support}});
  }
  report["fig7_next_cooperation"] = {{"min_count", options.min_count}, {"cells", fig7}};

  ojson tests = ojson::array();
  for (const NamedGTest& t : options.g_tests) {
    ojson j;
    j["name"] = t.name;
    try {
      const TableBuild built = build_table(corpus, t.factors);
      const LogLinearModel model = parse_model(t.model, built.table);
      const GTestResult r = g_test(built.table, model);
      j.update(to_json(r, built.table));
      j["excluded"] = built.excluded;
    } catch (const Error& e) {
      j["error"] = to_string(e.code());
      j["message"] = e.what();
    }
    tests.push_back(j);
  }
  report["g_tests"] = tests;
  return report;
}

void write_figure_csvs(const Corpus& corpus, const AnalysisOptions& options,
                       const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  auto open = [&](const char* name) {
    std::ofstream out(fs::path(directory) / name);
    if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + directory + "/" + name);
    return out;
  };
  {
    auto out = open("events.csv");
    export_csv(corpus, out);
  }
  {
    auto out = open("fig3_transitions.csv");
    out << "condition,from,to,count,probability\n";
    for (const TransitionTable& t : transition_matrix(corpus)) {
      for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t k = 0; k < 4; ++k) {
          out << condition_label(t.condition) << ',' << to_string(kAllOutcomes[r]) << ','
              << to_string(kAllOutcomes[k]) << ',' << t.counts[r][k] << ','
              << csv_number(t.rows[r] ? std::optional<double>((*t.rows[r])[k]) : std::nullopt)
              << '\n';
        }
      }
    }
  }
  {
    auto out = open("fig4_distributions.csv");
    out << "condition,outcome,feeling,count,proportion\n";
    for (const auto& cell : feeling_distribution(corpus)) {
      for (ParticipantFeeling f : kAllFeelings) {
        const auto k = static_cast<std::size_t>(f);
        out << condition_label(cell.condition) << ',' << to_string(cell.outcome) << ','
            << to_string(f) << ',' << cell.counts[k] << ','
            << csv_number(cell.distribution ? std::optional<double>((*cell.distribution)[k])
                                            : std::nullopt)
            << '\n';
      }
    }
  }
  {
    auto out = open("fig5_selfless.csv");
    out << "condition,n_cc,pct_joy_cc,n_dc,pct_joy_dc,value\n";
    for (const SelflessFeelings& s : selfless_feelings(corpus)) {
      out << s.condition.label() << ',' << s.joy_after_cc.n << ',' << csv_number(s.pct_joy_cc)
          << ',' << s.joy_after_dc.n << ',' << csv_number(s.pct_joy_dc) << ','
          << csv_number(s.value) << '\n';
    }
  }
  {
    auto out = open("fig6_contagion.csv");
    out << "condition,n_after_smile,joy_after_smile,n_after_no_smile,joy_after_no_smile,"
           "n,marginal_joy,gap\n";
    for (const ContagionResult& c : contagion_rate(corpus)) {
      out << condition_label(c.condition) << ',' << c.after_smile.n << ','
          << csv_number(c.after_smile.value()) << ',' << c.after_no_smile.n << ','
          << csv_number(c.after_no_smile.value()) << ',' << c.marginal.n << ','
          << csv_number(c.marginal.value()) << ',' << csv_number(c.gap()) << '\n';
    }
  }
  {
    auto out = open("fig7_next_cooperation.csv");
    out << "condition,outcome,feeling,n,next_cooperation,low_support\n";
    for (const NextCooperationCell& c : next_round_cooperation(corpus, options.min_count)) {
      out << condition_label(c.condition) << ',' << to_string(c.outcome) << ','
          << (c.joy ? "joy" : "not_joy") << ',' << c.cooperation.n << ','
          << csv_number(c.cooperation.value()) << ',' << (c.low_support ? 1 : 0) << '\n';
    }
  }
}

}  // namespace ipdlab
