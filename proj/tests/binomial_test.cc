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

#include <cmath>
#include <limits>

#include <boost/math/distributions/binomial.hpp>

#include "gtest/gtest.h"

namespace shuffle_dp {
namespace {

double BoostLogPmf(int64_t n, int64_t k, double p) {
  boost::math::binomial_distribution<double> dist(static_cast<double>(n), p);
  return std::log(boost::math::pdf(dist, static_cast<double>(k)));
}

TEST(LogBinomialPmfTest, SmallCasesExact) {
  EXPECT_NEAR(LogBinomialPmf(2, 1, 0.5), std::log(0.5), 1e-15);
  EXPECT_NEAR(LogBinomialPmf(4, 2, 0.25), std::log(6.0 * 9.0 / 256.0), 1e-14);
  EXPECT_EQ(LogBinomialPmf(0, 0, 0.3), 0.0);
  EXPECT_EQ(LogBinomialPmf(3, 4, 0.3),
            -std::numeric_limits<double>::infinity());
  EXPECT_EQ(LogBinomialPmf(3, -1, 0.3),
            -std::numeric_limits<double>::infinity());
}

TEST(LogBinomialPmfTest, DegenerateProbabilities) {
  EXPECT_EQ(LogBinomialPmf(5, 0, 0.0), 0.0);
  EXPECT_EQ(LogBinomialPmf(5, 1, 0.0), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(LogBinomialPmf(5, 5, 1.0), 0.0);
  EXPECT_EQ(LogBinomialPmf(5, 4, 1.0), -std::numeric_limits<double>::infinity());
}

TEST(LogBinomialPmfTest, MatchesBoostAcrossScales) {
  for (int64_t n : {1, 7, 16, 40, 100, 999, 12345, 1000000}) {
    for (double p : {0.5, 0.018315638888734179, 0.3, 0.9}) {
      const double mean = n * p;
      for (double offset : {-3.0, -1.0, 0.0, 0.5, 2.0, 5.0}) {
        const int64_t k = static_cast<int64_t>(
            std::llround(mean + offset * std::sqrt(n * p * (1 - p))));
        if (k < 0 || k > n) continue;
        const double ours = LogBinomialPmf(n, k, p);
        const double reference = BoostLogPmf(n, k, p);
        EXPECT_NEAR(ours, reference, 1e-12 * std::max(1.0, std::abs(reference)))
            << "n=" << n << " k=" << k << " p=" << p;
      }
    }
  }
}

TEST(LogBinomialPmfTest, ComplementArgumentAvoidsCancellation) {
  // p rounds to 1, but the supplied q keeps the failure probability exact.
  EXPECT_NEAR(LogBinomialPmf(10, 9, 1.0, 1e-17), std::log(1e-16), 1e-12);
}

TEST(LogBinomialPmfTest, SumsToOne) {
  for (int64_t n : {1, 5, 50, 3000}) {
    long double total = 0.0L;
    for (int64_t k = 0; k <= n; ++k) total += std::exp(LogBinomialPmf(n, k, 0.37));
    EXPECT_NEAR(static_cast<double>(total), 1.0, 1e-13) << n;
  }
}

TEST(StirlingErrorTest, MatchesLgammaDefinition) {
  for (double k : {1.0, 2.5, 10.0, 15.0, 16.0, 40.0, 100.0}) {
    const double direct = std::lgamma(k + 1.0) - (k + 0.5) * std::log(k) + k -
                          0.5 * std::log(2.0 * M_PI);
    EXPECT_NEAR(StirlingError(k), direct, 1e-13) << k;
  }
  // Beyond that the lgamma difference itself loses digits; use the expansion.
  for (double k : {600.0, 1e6}) {
    const double series = 1.0 / (12.0 * k) - 1.0 / (360.0 * k * k * k);
    EXPECT_NEAR(StirlingError(k), series, 1e-18) << k;
  }
}

TEST(HoeffdingWindowTest, CoversMeanAndClamps) {
  IntRange r = HoeffdingWindow(1000, 0.5, 1e-6);
  EXPECT_TRUE(r.contains(500));
  EXPECT_GE(r.lo, 0);
  EXPECT_LE(r.hi, 1000);
  // c = sqrt(log(2e6) / 2000) ~ 0.0852
  EXPECT_EQ(r.lo, 414);
  EXPECT_EQ(r.hi, 586);

  IntRange tiny = HoeffdingWindow(2, 0.5, 1e-15);
  EXPECT_EQ(tiny.lo, 0);
  EXPECT_EQ(tiny.hi, 2);

  IntRange full = HoeffdingWindow(10, 0.2, 0.0);
  EXPECT_EQ(full.lo, 0);
  EXPECT_EQ(full.hi, 10);

  EXPECT_EQ(HoeffdingWindow(0, 0.5, 1e-3).size(), 1);
}

TEST(HoeffdingWindowTest, DroppedMassWithinBudget) {
  const int64_t n = 500;
  const double p = 0.13;
  const double budget = 1e-4;
  IntRange r = HoeffdingWindow(n, p, budget);
  long double outside = 0.0L;
  for (int64_t k = 0; k <= n; ++k) {
    if (!r.contains(k)) outside += std::exp(LogBinomialPmf(n, k, p));
  }
  EXPECT_LE(static_cast<double>(outside), budget);
}

TEST(BinomialOutsideMassTest, MatchesSummedTails) {
  struct Case {
    int64_t n;
    double p;
    IntRange range;
  };
  for (const Case& c : {Case{500, 0.13, {40, 90}}, Case{500, 0.13, {0, 90}},
                        Case{500, 0.13, {40, 500}}, Case{37, 0.5, {5, 30}},
                        Case{2000, 0.01, {3, 45}}, Case{10, 0.3, {-4, 20}}}) {
    long double below = 0.0L;
    long double above = 0.0L;
    for (int64_t k = 0; k <= c.n; ++k) {
      const long double pmf = std::exp(LogBinomialPmf(c.n, k, c.p));
      if (k < c.range.lo) below += pmf;
      if (k > c.range.hi) above += pmf;
    }
    const double want = static_cast<double>(below + above);
    EXPECT_NEAR(BinomialOutsideMass(c.n, c.p, 1.0 - c.p, c.range), want,
                1e-12 * want)
        << c.n << " " << c.p << " [" << c.range.lo << ", " << c.range.hi << "]";
  }
}

TEST(BinomialOutsideMassTest, EdgeRanges) {
  EXPECT_EQ(BinomialOutsideMass(10, 0.3, 0.7, {0, 10}), 0.0);
  EXPECT_EQ(BinomialOutsideMass(10, 0.3, 0.7, {6, 5}), 1.0);
  EXPECT_EQ(BinomialOutsideMass(0, 0.3, 0.7, {0, 0}), 0.0);
  EXPECT_NEAR(BinomialOutsideMass(10, 0.3, 0.7, {1, 10}), std::pow(0.7, 10),
              1e-15);
  // Deep tail far below double round-off of the kept mass.
  const double tiny = BinomialOutsideMass(1000, 0.5, 0.5, {100, 900});
  EXPECT_GT(tiny, 0.0);
  EXPECT_LT(tiny, 1e-100);
}

}  // namespace
}  // namespace shuffle_dp
