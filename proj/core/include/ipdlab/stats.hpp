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

#ifndef IPDLAB_STATS_HPP_
#define IPDLAB_STATS_HPP_

namespace ipdlab::stats {

// Regularized lower/upper incomplete gamma functions P(a, x) and Q(a, x).
// Series expansion below x = a + 1, Lentz continued fraction above.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Upper tail of the chi-square distribution: Pr[X >= x] for df > 0.
double chi_square_upper_tail(double x, double df);

}  // namespace ipdlab::stats

#endif  // IPDLAB_STATS_HPP_
