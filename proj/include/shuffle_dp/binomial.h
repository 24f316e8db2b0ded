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

// Log-scale binomial probabilities and Hoeffding windows shared by the
// mechanism builders.

#ifndef SHUFFLE_DP_BINOMIAL_H_
#define SHUFFLE_DP_BINOMIAL_H_

#include <cstdint>

namespace shuffle_dp {

// log P(Bin(trials, p) = successes), -infinity outside the support.
//
// Uses Loader's saddle point expansion (Stirling error terms plus the bd0
// deviance), which keeps ~1e-15 relative accuracy for trials up to 1e9 where
// plain lgamma differences lose about 1e-9.
double LogBinomialPmf(int64_t trials, int64_t successes, double p);

// Same with q = 1 - p supplied separately so callers holding q = e^-x style
// values avoid the cancellation in 1 - p.
double LogBinomialPmf(int64_t trials, int64_t successes, double p, double q);

// log of the Stirling error log(k!) - [(k + 1/2) log k - k + log sqrt(2 pi)].
double StirlingError(double k);

// Inclusive integer range [lo, hi]. Empty when lo > hi.
struct IntRange {
  int64_t lo = 0;
  int64_t hi = -1;

  int64_t size() const { return hi >= lo ? hi - lo + 1 : 0; }
  bool contains(int64_t v) const { return v >= lo && v <= hi; }
};

// Smallest range around the mean of Bin(trials, p) that Hoeffding's
// inequality certifies to hold all but `dropped_mass` of the distribution:
// each tail beyond (p -+ c) * trials has mass <= exp(-2 trials c^2)
// = dropped_mass / 2. Bounds are rounded outward and clamped to
// [0, trials]. A nonpositive `dropped_mass` returns the full support.
IntRange HoeffdingWindow(int64_t trials, double p, double dropped_mass);

// P(Bin(trials, p) outside range) from the regularised incomplete beta
// function, so tiny tails keep their relative accuracy instead of surfacing
// as 1 - (sum of the kept probabilities). q = 1 - p as above.
double BinomialOutsideMass(int64_t trials, double p, double q, IntRange range);

}  // namespace shuffle_dp

#endif  // SHUFFLE_DP_BINOMIAL_H_
