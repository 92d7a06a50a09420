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

#include "ipdlab/contingency.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <set>

#include "ipdlab/error.hpp"
#include "ipdlab/rng.hpp"
#include "ipdlab/stats.hpp"

namespace ipdlab {
namespace {

// For every cell, the flat index of its margin cell.
std::vector<std::size_t> margin_map(const ContingencyTable& table, const Margin& margin) {
  std::vector<std::size_t> map(table.cell_count());
  for (std::size_t cell = 0; cell < table.cell_count(); ++cell) {
    const std::vector<std::size_t> lv = table.unravel(cell);
    std::size_t idx = 0;
    for (std::size_t axis : margin) {
      idx = idx * table.factors()[axis].levels.size() + lv[axis];
    }
    map[cell] = idx;
  }
  return map;
}

std::size_t margin_size(const ContingencyTable& table, const Margin& margin) {
  std::size_t n = 1;
  for (std::size_t axis : margin) n *= table.factors()[axis].levels.size();
  return n;
}

Margin normalized(Margin m, std::size_t rank) {
  std::sort(m.begin(), m.end());
  m.erase(std::unique(m.begin(), m.end()), m.end());
  for (std::size_t axis : m) {
    if (axis >= rank) throw Error(ErrorCode::kUnknownFactor, "margin axis out of range");
  }
  return m;
}

}  // namespace

ContingencyTable::ContingencyTable(std::vector<Factor> factors)
    : factors_(std::move(factors)) {
  std::size_t n = 1;
  strides_.assign(factors_.size(), 1);
  for (std::size_t i = factors_.size(); i-- > 0;) {
    if (factors_[i].levels.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "factor '" + factors_[i].name + "' has no levels");
    }
    strides_[i] = n;
    n *= factors_[i].levels.size();
  }
  counts_.assign(n, 0);
}

ContingencyTable::ContingencyTable(std::vector<Factor> factors, std::vector<std::int64_t> counts)
    : ContingencyTable(std::move(factors)) {
  if (counts.size() != counts_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "count vector does not match factor levels");
  }
  for (std::int64_t c : counts) {
    if (c < 0) throw Error(ErrorCode::kInvalidArgument, "negative count");
  }
  counts_ = std::move(counts);
}

std::int64_t ContingencyTable::total() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

std::size_t ContingencyTable::flat_index(std::span<const std::size_t> levels) const {
  if (levels.size() != factors_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "wrong number of factor levels");
  }
  std::size_t idx = 0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] >= factors_[i].levels.size()) {
      throw Error(ErrorCode::kInvalidArgument, "level out of range for '" + factors_[i].name + "'");
    }
    idx += levels[i] * strides_[i];
  }
  return idx;
}

std::vector<std::size_t> ContingencyTable::unravel(std::size_t flat) const {
  std::vector<std::size_t> lv(factors_.size());
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    lv[i] = flat / strides_[i];
    flat %= strides_[i];
  }
  return lv;
}

void ContingencyTable::add(std::span<const std::size_t> levels, std::int64_t n) {
  counts_[flat_index(levels)] += n;
}

std::optional<std::size_t> ContingencyTable::factor_index(std::string_view name) const {
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].name == name) return i;
  }
  return std::nullopt;
}

std::string LogLinearModel::describe(const ContingencyTable& table) const {
  std::string out;
  for (const Margin& m : margins) {
    out += '[';
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (i) out += '*';
      out += table.factors()[m[i]].name;
    }
    out += ']';
  }
  return out;
}

LogLinearModel parse_model(std::string_view spec, const ContingencyTable& table) {
  LogLinearModel model;
  Margin current;
  std::string name;
  auto flush_name = [&] {
    const auto first = name.find_first_not_of(" []");
    const auto last = name.find_last_not_of(" []");
    const std::string trimmed =
        first == std::string::npos ? std::string() : name.substr(first, last - first + 1);
    name.clear();
    if (trimmed.empty()) return;
    auto idx = table.factor_index(trimmed);
    if (!idx) {
      throw Error(ErrorCode::kUnknownFactor, "model names unknown factor '" + trimmed + "'");
    }
    current.push_back(*idx);
  };
  auto flush_margin = [&] {
    flush_name();
    if (!current.empty()) model.margins.push_back(normalized(current, table.rank()));
    current.clear();
  };
  for (char c : spec) {
    if (c == '*') {
      flush_name();
    } else if (c == ',' || c == ';' || c == ']') {
      flush_margin();
    } else {
      name += c;
    }
  }
  flush_margin();
  if (model.margins.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty model specification");
  }
  return model;
}

LogLinearModel independence_model(const ContingencyTable& table) {
  LogLinearModel m;
  for (std::size_t i = 0; i < table.rank(); ++i) m.margins.push_back({i});
  return m;
}

LogLinearModel saturated_model(const ContingencyTable& table) {
  Margin all(table.rank());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return {{all}};
}

int degrees_of_freedom(const ContingencyTable& table, const LogLinearModel& model) {
  std::set<std::uint64_t> terms;
  for (const Margin& m : model.margins) {
    std::uint64_t mask = 0;
    for (std::size_t axis : m) mask |= std::uint64_t{1} << axis;
    // Every sub-term of a generator (including the empty mean term).
    for (std::uint64_t sub = mask;; sub = (sub - 1) & mask) {
      terms.insert(sub);
      if (sub == 0) break;
    }
  }
  if (terms.empty()) terms.insert(0);
  long long params = 0;
  for (std::uint64_t t : terms) {
    long long k = 1;
    for (std::size_t axis = 0; axis < table.rank(); ++axis) {
      if (t & (std::uint64_t{1} << axis)) {
        k *= static_cast<long long>(table.factors()[axis].levels.size()) - 1;
      }
    }
    params += k;
  }
  return static_cast<int>(static_cast<long long>(table.cell_count()) - params);
}

std::vector<double> margin_sums(const ContingencyTable& table, const Margin& margin,
                                std::span<const double> cells) {
  const std::vector<std::size_t> map = margin_map(table, margin);
  std::vector<double> sums(margin_size(table, margin), 0.0);
  for (std::size_t cell = 0; cell < cells.size(); ++cell) sums[map[cell]] += cells[cell];
  return sums;
}

IpfResult ipf_fit(const ContingencyTable& table, const LogLinearModel& model,
                  const IpfOptions& options) {
  if (table.total() <= 0) {
    throw Error(ErrorCode::kEmptyTable, "cannot fit a table with no observations");
  }
  const std::size_t n = table.cell_count();
  std::vector<double> observed(table.counts().begin(), table.counts().end());

  struct Target {
    std::vector<std::size_t> map;
    std::vector<double> observed;
  };
  std::vector<Target> targets;
  for (const Margin& raw : model.margins) {
    Margin m = normalized(raw, table.rank());
    Target t;
    t.map = margin_map(table, m);
    t.observed.assign(margin_size(table, m), 0.0);
    for (std::size_t cell = 0; cell < n; ++cell) t.observed[t.map[cell]] += observed[cell];
    targets.push_back(std::move(t));
  }

  IpfResult result;
  result.expected.assign(n, 1.0);
  std::vector<double> fitted;
  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    for (const Target& t : targets) {
      fitted.assign(t.observed.size(), 0.0);
      for (std::size_t cell = 0; cell < n; ++cell) fitted[t.map[cell]] += result.expected[cell];
      for (std::size_t cell = 0; cell < n; ++cell) {
        const double f = fitted[t.map[cell]];
        result.expected[cell] = f > 0.0 ? result.expected[cell] * t.observed[t.map[cell]] / f : 0.0;
      }
    }
    double err = 0.0;
    for (const Target& t : targets) {
      fitted.assign(t.observed.size(), 0.0);
      for (std::size_t cell = 0; cell < n; ++cell) fitted[t.map[cell]] += result.expected[cell];
      for (std::size_t k = 0; k < fitted.size(); ++k) {
        err = std::max(err, std::fabs(fitted[k] - t.observed[k]));
      }
    }
    result.sweeps = sweep;
    result.max_margin_error = err;
    if (err <= options.tolerance) {
      result.converged = true;
      break;
    }
  }
  return result;
}

double g_statistic(std::span<const std::int64_t> observed, std::span<const double> expected) {
  double g = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (observed[i] == 0) continue;
    const auto o = static_cast<double>(observed[i]);
    if (expected[i] <= 0.0) return std::numeric_limits<double>::infinity();
    g += o * std::log(o / expected[i]);
  }
  return std::max(0.0, 2.0 * g);
}

GTestResult g_test(const ContingencyTable& table, const LogLinearModel& model,
                   const IpfOptions& options) {
  IpfResult fit = ipf_fit(table, model, options);
  if (!fit.converged) {
    throw Error(ErrorCode::kNonConvergence,
                "IPF did not converge for " + model.describe(table) + " after " +
                    std::to_string(fit.sweeps) + " sweeps (max margin error " +
                    std::to_string(fit.max_margin_error) + ")");
  }
  GTestResult r;
  r.g2 = g_statistic(table.counts(), fit.expected);
  r.df = degrees_of_freedom(table, model);
  if (r.df > 0) {
    r.p_value = stats::chi_square_upper_tail(r.g2, r.df);
  } else {
    // Saturated: the fit is exact by construction.
    r.p_value = r.g2 <= 1e-9 ? 1.0 : 0.0;
  }
  r.expected = std::move(fit.expected);
  r.model = model;
  r.sweeps = fit.sweeps;
  return r;
}

double monte_carlo_p_value(const ContingencyTable& table, const LogLinearModel& model,
                           int replicates, std::uint64_t seed) {
  const GTestResult observed = g_test(table, model);
  const std::int64_t total = table.total();
  std::vector<double> cdf(observed.expected.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    acc += observed.expected[i] / static_cast<double>(total);
    cdf[i] = acc;
  }
  Rng rng(seed);
  int extreme = 0;
  for (int b = 0; b < replicates; ++b) {
    std::vector<std::int64_t> counts(cdf.size(), 0);
    for (std::int64_t k = 0; k < total; ++k) {
      const double u = rng.uniform01() * acc;
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      if (it == cdf.end()) --it;
      ++counts[static_cast<std::size_t>(it - cdf.begin())];
    }
    ContingencyTable sim(table.factors(), std::move(counts));
    const IpfResult fit = ipf_fit(sim, model);
    if (g_statistic(sim.counts(), fit.expected) >= observed.g2 - 1e-12) ++extreme;
  }
  return (1.0 + extreme) / (1.0 + replicates);
}

nlohmann::ordered_json to_json(const ContingencyTable& table) {
  nlohmann::ordered_json j;
  j["factors"] = nlohmann::ordered_json::array();
  for (const Factor& f : table.factors()) {
    j["factors"].push_back({{"name", f.name}, {"levels", f.levels}});
  }
  j["counts"] = table.counts();
  j["total"] = table.total();
  return j;
}

nlohmann::ordered_json to_json(const GTestResult& r, const ContingencyTable& table) {
  nlohmann::ordered_json j;
  j["model"] = r.model.describe(table);
  j["g2"] = r.g2;
  j["df"] = r.df;
  j["p_value"] = r.p_value;
  j["sweeps"] = r.sweeps;
  j["table"] = to_json(table);
  j["expected"] = r.expected;
  return j;
}

}  // namespace ipdlab
