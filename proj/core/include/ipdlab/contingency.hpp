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

#ifndef IPDLAB_CONTINGENCY_HPP_
#define IPDLAB_CONTINGENCY_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ipdlab {

struct Factor {
  std::string name;
  std::vector<std::string> levels;
};

// Dense multi-way count table. Cells are stored row-major with the last
// factor varying fastest.
class ContingencyTable {
 public:
  explicit ContingencyTable(std::vector<Factor> factors);
  ContingencyTable(std::vector<Factor> factors, std::vector<std::int64_t> counts);

  const std::vector<Factor>& factors() const noexcept { return factors_; }
  std::size_t rank() const noexcept { return factors_.size(); }
  std::size_t cell_count() const noexcept { return counts_.size(); }
  const std::vector<std::int64_t>& counts() const noexcept { return counts_; }
  std::int64_t total() const noexcept;

  std::size_t flat_index(std::span<const std::size_t> levels) const;
  std::vector<std::size_t> unravel(std::size_t flat) const;
  std::int64_t count(std::span<const std::size_t> levels) const {
    return counts_[flat_index(levels)];
  }
  void add(std::span<const std::size_t> levels, std::int64_t n = 1);
  std::optional<std::size_t> factor_index(std::string_view name) const;

 private:
  std::vector<Factor> factors_;
  std::vector<std::size_t> strides_;
  std::vector<std::int64_t> counts_;
};

// A margin is a sorted set of factor axes; a hierarchical log-linear model
// is given by its generating class of margins.
using Margin = std::vector<std::size_t>;

struct LogLinearModel {
  std::vector<Margin> margins;
  // e.g. "[condition*outcome][feeling]".
  std::string describe(const ContingencyTable& table) const;
};

// "a*b,c" (or "a*b;c"); factor names must exist. Throws kUnknownFactor.
LogLinearModel parse_model(std::string_view spec, const ContingencyTable& table);
LogLinearModel independence_model(const ContingencyTable& table);
LogLinearModel saturated_model(const ContingencyTable& table);

// Cells minus the free parameters of the hierarchical model.
int degrees_of_freedom(const ContingencyTable& table, const LogLinearModel& model);

// Sums of `cells` over the axes not in `margin`, indexed row-major over the
// margin's axes.
std::vector<double> margin_sums(const ContingencyTable& table, const Margin& margin,
                                std::span<const double> cells);

struct IpfOptions {
  double tolerance = 1e-8;  // absolute, per margin cell
  int max_sweeps = 10000;
};

struct IpfResult {
  std::vector<double> expected;
  int sweeps = 0;
  double max_margin_error = 0.0;
  bool converged = false;
};

// Iterative proportional fitting from a uniform start. Non-convergence is
// reported in the result (last iterate kept), not thrown. Throws
// kEmptyTable for a zero table.
IpfResult ipf_fit(const ContingencyTable& table, const LogLinearModel& model,
                  const IpfOptions& options = {});

// 2 * sum O ln(O/E) with 0 ln 0 = 0.
double g_statistic(std::span<const std::int64_t> observed, std::span<const double> expected);

struct GTestResult {
  double g2 = 0.0;
  int df = 0;
  double p_value = 1.0;
  std::vector<double> expected;
  LogLinearModel model;
  int sweeps = 0;
};

// Throws kNonConvergence when IPF does not converge.
GTestResult g_test(const ContingencyTable& table, const LogLinearModel& model,
                   const IpfOptions& options = {});

// Parametric bootstrap p-value under the fitted model, (1 + #{G2* >= G2}) /
// (1 + replicates).
double monte_carlo_p_value(const ContingencyTable& table, const LogLinearModel& model,
                           int replicates, std::uint64_t seed);

nlohmann::ordered_json to_json(const ContingencyTable& table);
nlohmann::ordered_json to_json(const GTestResult& result, const ContingencyTable& table);

}  // namespace ipdlab

#endif  // IPDLAB_CONTINGENCY_HPP_
