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

#include <cmath>
#include <random>

#include "doctest.h"
#include "ipdlab/contingency.hpp"
#include "ipdlab/error.hpp"
#include "ipdlab/rng.hpp"

using namespace ipdlab;

namespace {

ContingencyTable two_by_two(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
  return ContingencyTable({{"row", {"r0", "r1"}}, {"col", {"c0", "c1"}}}, {a, b, c, d});
}

ContingencyTable three_way(const std::vector<std::int64_t>& counts) {
  return ContingencyTable(
      {{"a", {"0", "1"}}, {"b", {"0", "1", "2"}}, {"c", {"0", "1"}}}, counts);
}

const std::vector<std::int64_t> kThreeWay = {12, 5, 7, 19, 3, 8, 4, 15, 11, 6, 9, 2};

}  // namespace

TEST_CASE("table indexing") {
  const ContingencyTable t = three_way(kThreeWay);
  CHECK(t.cell_count() == 12);
  CHECK(t.total() == 101);
  const std::size_t idx[] = {1, 2, 0};
  CHECK(t.flat_index(idx) == 10);
  CHECK(t.count(idx) == 9);
  CHECK(t.unravel(10) == std::vector<std::size_t>{1, 2, 0});
  CHECK(t.factor_index("b") == 1u);
  CHECK_FALSE(t.factor_index("z").has_value());
}

TEST_CASE("exactly independent table") {
  const ContingencyTable t = two_by_two(10, 20, 20, 40);
  const GTestResult r = g_test(t, independence_model(t));
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(r.expected[i] == doctest::Approx(static_cast<double>(t.counts()[i])).epsilon(1e-12));
  }
  CHECK(r.g2 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("symmetric association") {
  const ContingencyTable t = two_by_two(30, 10, 10, 30);
  const GTestResult r = g_test(t, independence_model(t));
  for (double e : r.expected) CHECK(e == doctest::Approx(20.0).epsilon(1e-12));
  const double direct = 2 * (2 * 30 * std::log(30.0 / 20) + 2 * 10 * std::log(10.0 / 20));
  CHECK(r.g2 == doctest::Approx(direct).epsilon(1e-12));
  CHECK(std::fabs(r.g2 - 20.930) <= 0.001);
  CHECK(r.df == 1);
}

TEST_CASE("saturated fit reproduces the table") {
  const ContingencyTable t = three_way(kThreeWay);
  const GTestResult r = g_test(t, saturated_model(t));
  for (std::size_t i = 0; i < t.cell_count(); ++i) {
    CHECK(std::fabs(r.expected[i] - static_cast<double>(t.counts()[i])) <= 1e-9);
  }
  CHECK(r.g2 <= 1e-9);
  CHECK(r.df == 0);
}

TEST_CASE("conditional independence has a closed form") {
  const ContingencyTable t = three_way(kThreeWay);
  const LogLinearModel m = parse_model("a*b,b*c", t);
  const IpfResult fit = ipf_fit(t, m);
  CHECK(fit.converged);
  for (std::size_t i = 0; i < t.cell_count(); ++i) {
    const auto lv = t.unravel(i);
    double n_ab = 0, n_bc = 0, n_b = 0;
    for (std::size_t j = 0; j < t.cell_count(); ++j) {
      const auto u = t.unravel(j);
      const double v = static_cast<double>(t.counts()[j]);
      if (u[0] == lv[0] && u[1] == lv[1]) n_ab += v;
      if (u[1] == lv[1] && u[2] == lv[2]) n_bc += v;
      if (u[1] == lv[1]) n_b += v;
    }
    CHECK(fit.expected[i] == doctest::Approx(n_ab * n_bc / n_b).epsilon(1e-9));
  }
}

TEST_CASE("degrees of freedom") {
  const ContingencyTable t = three_way(kThreeWay);
  CHECK(degrees_of_freedom(t, independence_model(t)) == 7);
  CHECK(degrees_of_freedom(t, parse_model("a*b,c", t)) == 5);
  CHECK(degrees_of_freedom(t, parse_model("a*b,b*c", t)) == 3);
  CHECK(degrees_of_freedom(t, parse_model("a*b,a*c,b*c", t)) == 2);
  CHECK(degrees_of_freedom(t, saturated_model(t)) == 0);
}

TEST_CASE("nested models order their statistics") {
  const ContingencyTable t = three_way(kThreeWay);
  double prev = INFINITY;
  for (const char* spec : {"a,b,c", "a*b,c", "a*b,b*c", "a*b,a*c,b*c", "a*b*c"}) {
    const GTestResult r = g_test(t, parse_model(spec, t));
    CHECK(r.g2 <= prev + 1e-9);
    prev = r.g2;
  }
}

TEST_CASE("fitted margins match observed") {
  const ContingencyTable t = three_way(kThreeWay);
  for (const char* spec : {"a,b,c", "a*b,c", "a*b,a*c,b*c"}) {
    const LogLinearModel m = parse_model(spec, t);
    const IpfResult fit = ipf_fit(t, m);
    CHECK(fit.converged);
    CHECK(fit.max_margin_error <= 1e-8);
    std::vector<double> observed(t.counts().begin(), t.counts().end());
    for (const Margin& margin : m.margins) {
      const auto want = margin_sums(t, margin, observed);
      const auto got = margin_sums(t, margin, fit.expected);
      for (std::size_t k = 0; k < want.size(); ++k) CHECK(std::fabs(want[k] - got[k]) <= 1e-8);
    }
  }
}

TEST_CASE("consistent table converges in one sweep") {
  // Outer product of margins: already satisfies independence.
  const ContingencyTable t = ContingencyTable(
      {{"x", {"0", "1", "2"}}, {"y", {"0", "1"}}}, {2 * 3, 2 * 7, 5 * 3, 5 * 7, 1 * 3, 1 * 7});
  CHECK(ipf_fit(t, independence_model(t)).sweeps == 1);
}

TEST_CASE("model parsing") {
  const ContingencyTable t = three_way(kThreeWay);
  CHECK(parse_model("a*b, c", t).margins.size() == 2);
  try {
    parse_model("a*z", t);
    FAIL("expected UnknownFactor");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnknownFactor);
  }
}

TEST_CASE("empty table") {
  const ContingencyTable t = two_by_two(0, 0, 0, 0);
  try {
    ipf_fit(t, independence_model(t));
    FAIL("expected EmptyTable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyTable);
  }
}

TEST_CASE("zero cells do not break the fit") {
  const ContingencyTable t = two_by_two(0, 12, 9, 14);
  const GTestResult r = g_test(t, independence_model(t));
  CHECK(std::isfinite(r.g2));
  CHECK(r.g2 > 0);
}

TEST_CASE("null rejection rate is calibrated") {
  Rng rng(20260101);
  const std::array<double, 6> cells = {0.12, 0.18, 0.3, 0.08, 0.12, 0.2};  // 2x3 independent
  int rejected = 0;
  const int reps = 10000;
  for (int rep = 0; rep < reps; ++rep) {
    std::vector<std::int64_t> counts(6, 0);
    for (int i = 0; i < 300; ++i) ++counts[rng.categorical(cells)];
    const ContingencyTable t({{"r", {"0", "1"}}, {"c", {"0", "1", "2"}}}, counts);
    rejected += g_test(t, independence_model(t)).p_value < 0.05;
  }
  CHECK(std::fabs(rejected / static_cast<double>(reps) - 0.05) <= 0.02);
}

TEST_CASE("monte carlo p-value tracks the asymptotic one") {
  const ContingencyTable t = two_by_two(18, 12, 10, 20);
  const double asym = g_test(t, independence_model(t)).p_value;
  const double mc = monte_carlo_p_value(t, independence_model(t), 4000, 3);
  CHECK(std::fabs(mc - asym) < 0.03);
}
