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

#include "shuffle_dp/binomial.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/beta.hpp>

namespace shuffle_dp {
namespace {

constexpr double kLogTwoPi = 1.837877066409345483560659472811;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// StirlingError(k) for k = 0..15.
constexpr std::array<double, 16> kSmallStirlingError = {
    0.0,
    0.08106146679532725821967026,
    0.04134069595540929409382208,
    0.02767792568499833914878929,
    0.02079067210376509311152277,
    0.01664469118982119216319487,
    0.01387612882307074799874573,
    0.01189670994589177009505572,
    0.01041126526197209649747857,
    0.009255462182712732917728637,
    0.008330563433362871256469319,
    0.007573675487951840794972024,
    0.006942840107209529865664153,
    0.006408994188004207068439631,
    0.005951370112758847735624416,
    0.00555473355196280137103869,
};

// Deviance term x log(x / np) + np - x, with a series for x close to np.
double Bd0(double x, double np) {
  if (std::abs(x - np) < 0.1 * (x + np)) {
    double v = (x - np) / (x + np);
    double s = (x - np) * v;
    double ej = 2.0 * x * v;
    const double v2 = v * v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v2;
      const double next = s + ej / (2 * j + 1);
      if (next == s) return next;
      s = next;
    }
    return s;
  }
  return x * std::log(x / np) + np - x;
}

}  // namespace

double StirlingError(double k) {
  if (k <= 15.0 && k == std::floor(k) && k >= 0.0) {
    return kSmallStirlingError[static_cast<size_t>(k)];
  }
  constexpr double s0 = 1.0 / 12.0;
  constexpr double s1 = 1.0 / 360.0;
  constexpr double s2 = 1.0 / 1260.0;
  constexpr double s3 = 1.0 / 1680.0;
  constexpr double s4 = 1.0 / 1188.0;
  if (k <= 15.0) {
    return std::lgamma(k + 1.0) - (k + 0.5) * std::log(k) + k -
           0.5 * kLogTwoPi;
  }
  const double k2 = k * k;
  if (k > 500) return (s0 - s1 / k2) / k;
  if (k > 80) return (s0 - (s1 - s2 / k2) / k2) / k;
  if (k > 35) return (s0 - (s1 - (s2 - s3 / k2) / k2) / k2) / k;
  return (s0 - (s1 - (s2 - (s3 - s4 / k2) / k2) / k2) / k2) / k;
}

double LogBinomialPmf(int64_t trials, int64_t successes, double p) {
  return LogBinomialPmf(trials, successes, p, 1.0 - p);
}

double LogBinomialPmf(int64_t trials, int64_t successes, double p, double q) {
  if (successes < 0 || successes > trials) return kNegInf;
  if (p == 0.0) return successes == 0 ? 0.0 : kNegInf;
  if (q == 0.0) return successes == trials ? 0.0 : kNegInf;
  const double n = static_cast<double>(trials);
  if (successes == 0) {
    if (trials == 0) return 0.0;
    return p < 0.1 ? -Bd0(n, n * q) - n * p : n * std::log(q);
  }
  if (successes == trials) {
    return q < 0.1 ? -Bd0(n, n * p) - n * q : n * std::log(p);
  }
  const double x = static_cast<double>(successes);
  const double lc = StirlingError(n) - StirlingError(x) - StirlingError(n - x) -
                    Bd0(x, n * p) - Bd0(n - x, n * q);
  const double lf = kLogTwoPi + std::log(x) + std::log1p(-x / n);
  return lc - 0.5 * lf;
}

IntRange HoeffdingWindow(int64_t trials, double p, double dropped_mass) {
  if (trials <= 0) return {0, 0};
  if (!(dropped_mass > 0.0)) return {0, trials};
  const double n = static_cast<double>(trials);
  const double c = std::sqrt(std::log(2.0 / dropped_mass) / (2.0 * n));
  const double lo = std::floor((p - c) * n);
  const double hi = std::ceil((p + c) * n);
  IntRange range;
  range.lo = lo <= 0.0 ? 0 : static_cast<int64_t>(lo);
  range.hi = hi >= n ? trials : static_cast<int64_t>(hi);
  return range;
}

double BinomialOutsideMass(int64_t trials, double p, double q, IntRange range) {
  const int64_t lo = std::max<int64_t>(range.lo, 0);
  const int64_t hi = std::min(range.hi, trials);
  if (lo > hi) return 1.0;
  double outside = 0.0;
  // P(X <= lo - 1) = I_q(trials - lo + 1, lo), P(X >= hi + 1) = I_p(hi + 1,
  // trials - hi).
  if (lo > 0) {
    outside += boost::math::ibeta(static_cast<double>(trials - lo + 1),
                                  static_cast<double>(lo), q);
  }
  if (hi < trials) {
    outside += boost::math::ibeta(static_cast<double>(hi + 1),
                                  static_cast<double>(trials - hi), p);
  }
  return outside;
}

}  // namespace shuffle_dp
