// Copyright 2026 The shuffle-dp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Brute-force ground truth for small instances: exhaustive view enumeration of
// shuffled k-ary randomised response and a Monte Carlo hockey-stick estimator
// for the shuffled Gaussian mechanism.

#ifndef SHUFFLE_DP_ORACLES_H_
#define SHUFFLE_DP_ORACLES_H_

#include <cstdint>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "shuffle_dp/krr.h"
#include "shuffle_dp/pld.h"

namespace shuffle_dp {

// Divergences between the view distributions under X = (1, ..., 1, 1) and
// X' = (1, ..., 1, 2).
struct ViewEnumerationResult {
  // H_{e^eps}(view | X || view | X') over all views.
  double hockey_delta = 0.0;
  // P_X(ratio >= e^eps). For the strong adversary the probability is taken
  // given that the differing user answered truthfully, the event on which
  // the view depends on its input at all; for the weak adversary it is over
  // all views.
  double tail_probability = 0.0;
  // Same divergence with X and X' swapped.
  double reverse_hockey_delta = 0.0;
  // P_X(ratio >= e^eps) over all views, for either adversary.
  double unconditional_tail_probability = 0.0;
  // Sum of P_X over all views; 1 up to round-off.
  double total_mass = 0.0;
};

// Enumerates all (k + 1)^n joint outcomes (truthful, or random value 1..k) and
// groups them into what the adversary sees: which users randomised (all n
// users for kStrong, the first n - 1 for kWeak) plus the multiset of reports.
// Requires n <= 8, 2 <= k <= 4 and (k + 1)^n <= 1e6.
absl::StatusOr<ViewEnumerationResult> KrrViewEnumeration(int64_t n, int k,
                                                         double gamma,
                                                         double eps,
                                                         Adversary adversary);

// The privacy loss distribution of the enumerated views under X, on the same
// event as tail_probability: one atom per view with P_X' > 0 at
// log(P_X / P_X'), views with P_X' = 0 in infinity_mass. Equal losses are
// merged.
absl::StatusOr<DiscretePld> KrrViewPld(int64_t n, int k, double gamma,
                                       Adversary adversary);

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  int64_t samples = 0;
  uint64_t seed = 0;
};

// Estimates H_{e^eps}(M(X') || M(X)) for the shuffled Gaussian mechanism,
// M(X) = N(0, sigma^2 I_n) and M(X') the uniform mixture of N(e_i, sigma^2
// I_n), by sampling t ~ M(X') and averaging max(0, 1 - e^eps / r(t)) with
// r = f_X' / f_X. Samples are split over fixed shards seeded from (seed,
// shard), so the result depends only on the arguments.
// Requires 1 <= n <= 8, sigma > 0 and samples >= 1000.
absl::StatusOr<McEstimate> GaussianShuffleMc(int64_t n, double sigma,
                                             double eps, int64_t samples,
                                             uint64_t seed);

// delta(eps) of the sensitivity-1 Gaussian mechanism with noise sigma:
// Phi(1/(2 sigma) - eps sigma) - e^eps Phi(-1/(2 sigma) - eps sigma).
absl::StatusOr<double> ClosedFormGaussianDelta(double sigma, double eps);

}  // namespace shuffle_dp

#endif  // SHUFFLE_DP_ORACLES_H_
