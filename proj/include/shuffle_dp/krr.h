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

// Privacy loss distributions for shuffled k-ary randomised response, where
// each user reports the truth with probability 1 - gamma and otherwise a
// uniform value in [k]. The differing user holds class 1 in X and class 2 in
// X'. Both builders produce the distribution of log(N1 / N2)-style view
// ratios, so accounting uses the tail-probability form of delta.

#ifndef SHUFFLE_DP_KRR_H_
#define SHUFFLE_DP_KRR_H_

#include <cstdint>
#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "shuffle_dp/pld.h"

namespace shuffle_dp {

// kStrong sees which of all n users randomised; kWeak sees it only for the
// n - 1 users that do not differ.
enum class Adversary {
  kStrong,
  kWeak,
};

// How the class counts of the noise ("blanket") users are modelled.
// kViewJoint uses their joint multinomial law, which is what the view
// probabilities imply. kIndependentMarginals treats each count as an
// independent binomial and exists only to compare against that reading.
enum class JointModel {
  kViewJoint,
  kIndependentMarginals,
};

struct KrrParams {
  int64_t n = 1;
  int k = 2;
  double gamma = 0.5;
  double tau = 0.0;
  Adversary adversary = Adversary::kStrong;
  JointModel joint_model = JointModel::kViewJoint;
  int64_t max_atoms = 50'000'000;
};

absl::Status ValidateKrrParams(const KrrParams& params);

// P(G1 = a, G2 = b) where G1, G2 count the other n - 1 users whose random
// reports land in class 1 and class 2 (trinomial with cell probabilities
// gamma / k, gamma / k, 1 - 2 gamma / k).
absl::StatusOr<double> BlanketJointMass(int64_t n, int k, double gamma,
                                        int64_t a, int64_t b);

// Atoms at log((G1 + 1) / G2) for G2 >= 1; the G2 = 0 mass is infinite loss.
absl::StatusOr<DiscretePld> BuildKrrStrongPld(const KrrParams& params);

// Atoms at log(((1-gamma) N1 + (gamma/k)(B+1)) / ((1-gamma) N2 +
// (gamma/k)(B+1))) where B ~ Bin(n-1, gamma) counts the randomising other
// users, N1, N2 are their class-1/2 counts plus the differing user's report.
// Requires gamma > 0.
absl::StatusOr<DiscretePld> BuildKrrWeakPld(const KrrParams& params);

// Dispatches on params.adversary.
absl::StatusOr<DiscretePld> BuildKrrPld(const KrrParams& params);

struct AnalyticEpsilon {
  double epsilon = 0.0;
  // False when epsilon exceeds 1, outside the range where the bound holds.
  bool valid = false;
};

// Smallest epsilon for which the privacy-blanket analytic bound certifies
// (epsilon, delta)-DP at randomisation probability gamma.
absl::StatusOr<AnalyticEpsilon> BalleAnalyticEpsilon(int64_t n, int k,
                                                     double gamma,
                                                     double delta);

// The randomisation probability the analytic bound requires for (epsilon,
// delta); BalleAnalyticEpsilon inverts this in epsilon.
double BalleAnalyticGamma(int64_t n, int k, double epsilon, double delta);

std::string AdversaryName(Adversary adversary);

}  // namespace shuffle_dp

#endif  // SHUFFLE_DP_KRR_H_
