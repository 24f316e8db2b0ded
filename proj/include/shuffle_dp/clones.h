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

// Privacy loss distributions of the "clones" dominating pair for shuffled
// eps0-LDP randomisers.
//
// With C ~ Bin(n - 1, e^-eps0) other users acting as clones of the two
// differing users and A ~ Bin(C, 1/2) their split, define
//
//   P1 = (A + 1, C - A),   P0 = (A, C - A + 1),
//   P  = q P1 + (1 - q) P0,   Q = (1 - q) P1 + q P0,   q = e^eps0 / (e^eps0 + 1).
//
// Every support point (a, b) lies on the diagonal a + b = C + 1 and the loss
// log(P/Q) depends only on a/b, so the PLD is enumerated diagonal by diagonal.

#ifndef SHUFFLE_DP_CLONES_H_
#define SHUFFLE_DP_CLONES_H_

#include <cstdint>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "shuffle_dp/pld.h"

namespace shuffle_dp {

// How a fractional subsampled population ratio * n becomes an integer.
enum class PopulationRounding {
  kNearest,
  kFloor,
};

struct ClonesParams {
  int64_t n = 1;
  double eps0 = 1.0;
  // Hoeffding truncation budget; 0 enumerates every support point.
  double tau = 0.0;
  // Fraction of users sampled into each round; 1 disables subsampling.
  double subsample_ratio = 1.0;
  PopulationRounding rounding = PopulationRounding::kNearest;
  Direction direction = Direction::kNumOverDen;
  // Resource guard on the number of emitted atoms.
  int64_t max_atoms = 50'000'000;
};

absl::Status ValidateClonesParams(const ClonesParams& params);

// P(P1 = (a, b)). Zero when a = 0.
absl::StatusOr<double> P1Mass(int64_t n, double eps0, int64_t a, int64_t b);
// P(P0 = (a, b)). Zero when b = 0.
absl::StatusOr<double> P0Mass(int64_t n, double eps0, int64_t a, int64_t b);

struct PairMass {
  double p_mass = 0.0;
  double q_mass = 0.0;
};
absl::StatusOr<PairMass> ClonesPairMass(int64_t n, double eps0, int64_t a,
                                        int64_t b);

// log(P(P = (a, b)) / P(Q = (a, b))), always within [-eps0, eps0].
absl::StatusOr<double> ClonesLoss(double eps0, int64_t a, int64_t b);

// Loss of the subsampled pair (r P + (1 - r) Q, Q) at a point whose
// unsubsampled loss is `loss`: log(r e^loss + 1 - r).
double SubsampledLoss(double loss, double ratio);

// Population of one subsampled round.
absl::StatusOr<int64_t> EffectivePopulation(int64_t n, double ratio,
                                            PopulationRounding rounding);

// Every support point, O(n^2) atoms. Ignores `tau` and `subsample_ratio`.
absl::StatusOr<DiscretePld> BuildClonesPldFull(const ClonesParams& params);

// Hoeffding-truncated PLD with O(n log(4 / tau)) atoms. The outer window on C
// and the inner windows on A each drop at most tau / 2; the dropped mass is
// recorded in `truncated_mass`. Falls back to the full build for tau = 0 or
// n = 1. Ignores `subsample_ratio`.
absl::StatusOr<DiscretePld> BuildClonesPld(const ClonesParams& params);

// PLD of (r P + (1 - r) Q, Q) where (P, Q) is the clones pair for the
// effective population round(r n) (or floor, see `rounding`). r = 1 returns
// BuildClonesPld(params) unchanged.
absl::StatusOr<DiscretePld> BuildSubsampledClonesPld(const ClonesParams& params);

}  // namespace shuffle_dp

#endif  // SHUFFLE_DP_CLONES_H_
