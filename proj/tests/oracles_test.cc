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

#include "shuffle_dp/oracles.h"

#include <cmath>

#include "gtest/gtest.h"
#include "shuffle_dp/accountant.h"
#include "shuffle_dp/krr.h"

namespace shuffle_dp {
namespace {

KrrParams Params(int64_t n, int k, double gamma, Adversary adversary) {
  KrrParams params;
  params.n = n;
  params.k = k;
  params.gamma = gamma;
  params.adversary = adversary;
  return params;
}

TEST(KrrViewEnumerationTest, SingleUserExamples) {
  absl::StatusOr<ViewEnumerationResult> strong =
      KrrViewEnumeration(1, 2, 0.5, 0.0, Adversary::kStrong);
  ASSERT_TRUE(strong.ok());
  EXPECT_NEAR(strong->hockey_delta, 0.5, 1e-15);
  absl::StatusOr<ViewEnumerationResult> weak =
      KrrViewEnumeration(1, 2, 0.5, 0.0, Adversary::kWeak);
  ASSERT_TRUE(weak.ok());
  EXPECT_NEAR(weak->hockey_delta, 0.5, 1e-15);
}

TEST(KrrViewEnumerationTest, ThreeUsersStrongTail) {
  absl::StatusOr<ViewEnumerationResult> result =
      KrrViewEnumeration(3, 2, 0.5, 0.5, Adversary::kStrong);
  ASSERT_TRUE(result.ok());
  EXPECT_NEAR(result->tail_probability, 0.6875, 1e-15);
  // Over all views the randomised differing user contributes nothing.
  EXPECT_NEAR(result->unconditional_tail_probability, 0.5 * 0.6875, 1e-15);
}

TEST(KrrViewEnumerationTest, StructuralProperties) {
  for (Adversary adversary : {Adversary::kStrong, Adversary::kWeak}) {
    for (int64_t n = 1; n <= 5; ++n) {
      for (int k : {2, 3}) {
        for (double gamma : {0.25, 0.5, 1.0}) {
          for (double eps : {0.0, 0.3, 0.7}) {
            absl::StatusOr<ViewEnumerationResult> r =
                KrrViewEnumeration(n, k, gamma, eps, adversary);
            ASSERT_TRUE(r.ok());
            EXPECT_NEAR(r->total_mass, 1.0, 1e-14);
            EXPECT_LE(r->hockey_delta, r->tail_probability + 1e-15);
            EXPECT_NEAR(r->reverse_hockey_delta, r->hockey_delta, 1e-12);
          }
        }
      }
    }
  }
}

TEST(KrrViewEnumerationTest, StrongBuilderTailMatches) {
  for (int64_t n = 1; n <= 5; ++n) {
    for (int k : {2, 3}) {
      for (double gamma : {0.25, 0.5}) {
        absl::StatusOr<DiscretePld> pld =
            BuildKrrStrongPld(Params(n, k, gamma, Adversary::kStrong));
        ASSERT_TRUE(pld.ok());
        for (double eps : {0.0, 0.3, 0.7}) {
          absl::StatusOr<ViewEnumerationResult> r =
              KrrViewEnumeration(n, k, gamma, eps, Adversary::kStrong);
          ASSERT_TRUE(r.ok());
          EXPECT_NEAR(ExactDeltaSingle(*pld, eps, IntegralForm::kTailProbability),
                      r->tail_probability, 1e-10)
              << n << " " << k << " " << gamma << " " << eps;
        }
      }
    }
  }
}

TEST(KrrViewEnumerationTest, WeakBuilderMatchesBothForms) {
  for (int64_t n = 1; n <= 5; ++n) {
    for (int k : {2, 3, 4}) {
      for (double gamma : {0.25, 0.5, 0.9}) {
        absl::StatusOr<DiscretePld> pld =
            BuildKrrWeakPld(Params(n, k, gamma, Adversary::kWeak));
        ASSERT_TRUE(pld.ok());
        for (double eps : {0.0, 0.3, 0.7}) {
          absl::StatusOr<ViewEnumerationResult> r =
              KrrViewEnumeration(n, k, gamma, eps, Adversary::kWeak);
          ASSERT_TRUE(r.ok());
          EXPECT_NEAR(ExactDeltaSingle(*pld, eps, IntegralForm::kTailProbability),
                      r->tail_probability, 1e-10);
          EXPECT_NEAR(ExactDeltaSingle(*pld, eps, IntegralForm::kHockeyStick),
                      r->hockey_delta, 1e-12);
        }
      }
    }
  }
}

TEST(KrrViewEnumerationTest, IndependentMarginalsDisagreeWithViews) {
  KrrParams params = Params(5, 3, 0.5, Adversary::kStrong);
  params.joint_model = JointModel::kIndependentMarginals;
  absl::StatusOr<DiscretePld> independent = BuildKrrStrongPld(params);
  ASSERT_TRUE(independent.ok());
  absl::StatusOr<ViewEnumerationResult> r =
      KrrViewEnumeration(5, 3, 0.5, 0.3, Adversary::kStrong);
  ASSERT_TRUE(r.ok());
  EXPECT_GT(std::abs(ExactDeltaSingle(*independent, 0.3,
                                      IntegralForm::kTailProbability) -
                     r->tail_probability),
            1e-4);
}

TEST(KrrViewPldTest, MatchesBuilders) {
  for (Adversary adversary : {Adversary::kStrong, Adversary::kWeak}) {
    absl::StatusOr<DiscretePld> views = KrrViewPld(4, 3, 0.5, adversary);
    absl::StatusOr<DiscretePld> built = BuildKrrPld(Params(4, 3, 0.5, adversary));
    ASSERT_TRUE(views.ok() && built.ok());
    EXPECT_TRUE(Validate(*views).ok()) << Validate(*views).ToString();
    absl::StatusOr<DiscretePld> merged = Coalesce(*built, 1e-12);
    ASSERT_EQ(views->atoms.size(), merged->atoms.size());
    for (size_t i = 0; i < views->atoms.size(); ++i) {
      EXPECT_NEAR(views->atoms[i].loss, merged->atoms[i].loss, 1e-12);
      EXPECT_NEAR(views->atoms[i].mass, merged->atoms[i].mass, 1e-14);
    }
    EXPECT_NEAR(views->infinity_mass, merged->infinity_mass, 1e-14);
  }
}

TEST(KrrViewEnumerationTest, Guards) {
  EXPECT_FALSE(KrrViewEnumeration(9, 2, 0.5, 0.0, Adversary::kStrong).ok());
  EXPECT_FALSE(KrrViewEnumeration(3, 5, 0.5, 0.0, Adversary::kStrong).ok());
  EXPECT_FALSE(KrrViewEnumeration(0, 2, 0.5, 0.0, Adversary::kWeak).ok());
  EXPECT_FALSE(KrrViewEnumeration(3, 2, 1.5, 0.0, Adversary::kWeak).ok());
  EXPECT_TRUE(KrrViewEnumeration(8, 4, 0.5, 0.0, Adversary::kWeak).ok());
}

TEST(ClosedFormGaussianDeltaTest, Examples) {
  EXPECT_NEAR(*ClosedFormGaussianDelta(2.0, 0.0), 0.19741, 1e-5);
  EXPECT_EQ(*ClosedFormGaussianDelta(2.0, 60.0), 0.0);
  EXPECT_EQ(*ClosedFormGaussianDelta(2.0, 1e6), 0.0);
  EXPECT_LT(*ClosedFormGaussianDelta(1e6, 0.0), 1e-6);
  EXPECT_FALSE(ClosedFormGaussianDelta(0.0, 0.0).ok());
}

TEST(GaussianShuffleMcTest, SingleUserMatchesClosedForm) {
  for (double eps : {0.0, 0.5, 1.0}) {
    absl::StatusOr<McEstimate> mc = GaussianShuffleMc(1, 2.0, eps, 1'000'000, 42);
    ASSERT_TRUE(mc.ok());
    const double exact = *ClosedFormGaussianDelta(2.0, eps);
    EXPECT_LE(std::abs(mc->estimate - exact), 4 * mc->std_error) << eps;
    EXPECT_GT(mc->std_error, 0.0);
    EXPECT_EQ(mc->samples, 1'000'000);
    EXPECT_EQ(mc->seed, 42u);
  }
}

TEST(GaussianShuffleMcTest, DeterministicGivenSeed) {
  absl::StatusOr<McEstimate> a = GaussianShuffleMc(3, 1.5, 0.2, 10'000, 9);
  absl::StatusOr<McEstimate> b = GaussianShuffleMc(3, 1.5, 0.2, 10'000, 9);
  absl::StatusOr<McEstimate> c = GaussianShuffleMc(3, 1.5, 0.2, 10'000, 10);
  ASSERT_TRUE(a.ok() && b.ok() && c.ok());
  EXPECT_EQ(a->estimate, b->estimate);
  EXPECT_EQ(a->std_error, b->std_error);
  EXPECT_NE(a->estimate, c->estimate);
}

TEST(GaussianShuffleMcTest, VanishesAtHugeEpsilon) {
  absl::StatusOr<McEstimate> mc = GaussianShuffleMc(4, 2.0, 50.0, 10'000, 1);
  ASSERT_TRUE(mc.ok());
  EXPECT_EQ(mc->estimate, 0.0);
}

TEST(GaussianShuffleMcTest, Validation) {
  EXPECT_FALSE(GaussianShuffleMc(0, 2.0, 0.0, 10'000, 1).ok());
  EXPECT_FALSE(GaussianShuffleMc(9, 2.0, 0.0, 10'000, 1).ok());
  EXPECT_FALSE(GaussianShuffleMc(2, -1.0, 0.0, 10'000, 1).ok());
  EXPECT_FALSE(GaussianShuffleMc(2, 2.0, 0.0, 999, 1).ok());
}

}  // namespace
}  // namespace shuffle_dp
