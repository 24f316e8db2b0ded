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

#include "shuffle_dp/krr.h"

#include <cmath>

#include "gtest/gtest.h"
#include "shuffle_dp/accountant.h"

namespace shuffle_dp {
namespace {

const double kLn2 = std::log(2.0);

KrrParams Params(int64_t n, int k, double gamma, Adversary adversary,
                 double tau = 0.0) {
  KrrParams params;
  params.n = n;
  params.k = k;
  params.gamma = gamma;
  params.adversary = adversary;
  params.tau = tau;
  return params;
}

double MassAtLoss(const DiscretePld& pld, double loss) {
  double mass = 0.0;
  for (const LossAtom& atom : pld.atoms) {
    if (std::abs(atom.loss - loss) < 1e-12) mass += atom.mass;
  }
  return mass;
}

TEST(BlanketJointMassTest, Examples) {
  EXPECT_EQ(*BlanketJointMass(1, 3, 0.4, 0, 0), 1.0);
  EXPECT_NEAR(*BlanketJointMass(3, 2, 0.5, 0, 1), 0.25, 1e-15);
  EXPECT_FALSE(BlanketJointMass(3, 2, 0.5, 2, 1).ok());
}

TEST(BlanketJointMassTest, SumsToOne) {
  for (int64_t n : {1, 4, 30}) {
    long double total = 0.0L;
    for (int64_t a = 0; a < n; ++a) {
      for (int64_t b = 0; a + b < n; ++b) {
        total += *BlanketJointMass(n, 3, 0.6, a, b);
      }
    }
    EXPECT_NEAR(static_cast<double>(total), 1.0, 1e-14) << n;
  }
}

TEST(KrrStrongTest, DegenerateCasesAreAllInfinity) {
  for (const KrrParams& params :
       {Params(1, 2, 0.5, Adversary::kStrong),
        Params(7, 3, 0.0, Adversary::kStrong)}) {
    absl::StatusOr<DiscretePld> pld = BuildKrrStrongPld(params);
    ASSERT_TRUE(pld.ok());
    EXPECT_TRUE(pld->atoms.empty());
    EXPECT_EQ(pld->infinity_mass, 1.0);
    EXPECT_EQ(ExactDeltaSingle(*pld, 3.0, IntegralForm::kTailProbability), 1.0);
  }
}

TEST(KrrStrongTest, ThreeUsersHandEnumeration) {
  absl::StatusOr<DiscretePld> pld =
      BuildKrrStrongPld(Params(3, 2, 0.5, Adversary::kStrong));
  ASSERT_TRUE(pld.ok());
  absl::StatusOr<DiscretePld> merged = Coalesce(*pld, 1e-12);
  ASSERT_EQ(merged->atoms.size(), 3u);
  EXPECT_NEAR(MassAtLoss(*pld, 0.0), 0.25, 1e-15);
  EXPECT_NEAR(MassAtLoss(*pld, kLn2), 0.125, 1e-15);
  EXPECT_NEAR(MassAtLoss(*pld, -kLn2), 0.0625, 1e-15);
  EXPECT_NEAR(pld->infinity_mass, 9.0 / 16.0, 1e-15);
  EXPECT_NEAR(ExactDeltaSingle(*pld, 0.5, IntegralForm::kTailProbability),
              0.6875, 1e-15);
}

TEST(KrrStrongTest, InfinityMassIsNoClassTwoReports) {
  for (int64_t n : {2, 10, 1000}) {
    for (double gamma : {0.1, 0.5, 1.0}) {
      absl::StatusOr<DiscretePld> pld =
          BuildKrrStrongPld(Params(n, 4, gamma, Adversary::kStrong, 1e-12));
      ASSERT_TRUE(pld.ok());
      EXPECT_NEAR(pld->infinity_mass, std::pow(1.0 - gamma / 4.0, n - 1),
                  1e-12);
      EXPECT_TRUE(Validate(*pld).ok()) << Validate(*pld).ToString();
      EXPECT_LE(pld->truncated_mass, 1e-12);
    }
  }
}

TEST(KrrTest, TruncatedMassIsTheDroppedMass) {
  for (Adversary adversary : {Adversary::kStrong, Adversary::kWeak}) {
    for (JointModel model :
         {JointModel::kViewJoint, JointModel::kIndependentMarginals}) {
      KrrParams params = Params(600, 3, 0.4, adversary, 1e-2);
      params.joint_model = model;
      absl::StatusOr<DiscretePld> pld = BuildKrrPld(params);
      ASSERT_TRUE(pld.ok());
      EXPECT_GT(pld->truncated_mass, 0.0);
      EXPECT_LE(pld->truncated_mass, 1e-2);
      EXPECT_NEAR(pld->truncated_mass,
                  1.0 - pld->infinity_mass - pld->AtomMass(), 1e-13)
          << AdversaryName(adversary);
    }
  }
}

TEST(KrrStrongTest, TruncationOnlyMovesMassToLedger) {
  KrrParams params = Params(800, 3, 0.3, Adversary::kStrong);
  absl::StatusOr<DiscretePld> full = BuildKrrStrongPld(params);
  params.tau = 1e-10;
  absl::StatusOr<DiscretePld> truncated = BuildKrrStrongPld(params);
  ASSERT_TRUE(full.ok() && truncated.ok());
  EXPECT_LT(truncated->atoms.size(), full->atoms.size());
  for (double eps : {0.0, 0.2, 0.5, 1.0}) {
    const double d_full = ExactDeltaSingle(*full, eps, IntegralForm::kTailProbability);
    const double d_trunc =
        ExactDeltaSingle(*truncated, eps, IntegralForm::kTailProbability);
    EXPECT_GE(d_trunc, d_full - 1e-15);
    EXPECT_LE(d_trunc - d_full, 1e-10 + 1e-12);
  }
}

TEST(KrrWeakTest, NoDataDependenceWhenAlwaysRandomising) {
  absl::StatusOr<DiscretePld> pld =
      BuildKrrWeakPld(Params(20, 3, 1.0, Adversary::kWeak));
  ASSERT_TRUE(pld.ok());
  absl::StatusOr<DiscretePld> merged = Coalesce(*pld, 0.0);
  ASSERT_EQ(merged->atoms.size(), 1u);
  EXPECT_EQ(merged->atoms[0].loss, 0.0);
  EXPECT_NEAR(merged->atoms[0].mass, 1.0, 1e-12);
  EXPECT_EQ(ExactDeltaSingle(*pld, 0.0, IntegralForm::kHockeyStick), 0.0);
}

TEST(KrrWeakTest, SingleUserIsLocalRandomiser) {
  for (int k : {2, 3, 5}) {
    const double gamma = 0.4;
    absl::StatusOr<DiscretePld> pld =
        BuildKrrWeakPld(Params(1, k, gamma, Adversary::kWeak));
    ASSERT_TRUE(pld.ok());
    const double keep = 1.0 - gamma + gamma / k;
    const double flip = gamma / k;
    const double loss = std::log(keep / flip);
    EXPECT_NEAR(MassAtLoss(*pld, loss), keep, 1e-15);
    EXPECT_NEAR(MassAtLoss(*pld, -loss), flip, 1e-15);
    EXPECT_NEAR(MassAtLoss(*pld, 0.0), 1.0 - keep - flip, 1e-15);
  }
}

TEST(KrrWeakTest, RejectsZeroGamma) {
  EXPECT_FALSE(BuildKrrWeakPld(Params(5, 3, 0.0, Adversary::kWeak)).ok());
}

TEST(KrrWeakTest, LossBoundAndMass) {
  for (int64_t n : {2, 15, 300}) {
    for (double gamma : {0.1, 0.5}) {
      for (JointModel model :
           {JointModel::kViewJoint, JointModel::kIndependentMarginals}) {
        KrrParams params = Params(n, 4, gamma, Adversary::kWeak, 1e-12);
        params.joint_model = model;
        absl::StatusOr<DiscretePld> pld = BuildKrrWeakPld(params);
        ASSERT_TRUE(pld.ok());
        EXPECT_TRUE(Validate(*pld).ok()) << Validate(*pld).ToString();
        const double bound = std::log(1.0 + 4.0 * (1.0 - gamma) / gamma);
        for (const LossAtom& atom : pld->atoms) {
          ASSERT_LE(std::abs(atom.loss), bound + 1e-12);
        }
      }
    }
  }
}

TEST(KrrTest, ValidatesParameters) {
  EXPECT_FALSE(BuildKrrPld(Params(0, 2, 0.5, Adversary::kStrong)).ok());
  EXPECT_FALSE(BuildKrrPld(Params(5, 1, 0.5, Adversary::kStrong)).ok());
  EXPECT_FALSE(BuildKrrPld(Params(5, 2, 1.5, Adversary::kWeak)).ok());
  EXPECT_FALSE(BuildKrrPld(Params(5, 2, 0.5, Adversary::kWeak, 1.0)).ok());
  absl::Status status = ValidateKrrParams(Params(0, 2, 0.5, Adversary::kStrong));
  EXPECT_NE(status.message().find("n must be >= 1"), std::string::npos);
}

TEST(BalleAnalyticTest, Examples) {
  absl::StatusOr<AnalyticEpsilon> large = BalleAnalyticEpsilon(100000, 4, 0.25, 1e-6);
  ASSERT_TRUE(large.ok());
  EXPECT_NEAR(large->epsilon, 0.1803, 1e-4);
  EXPECT_TRUE(large->valid);

  absl::StatusOr<AnalyticEpsilon> small = BalleAnalyticEpsilon(1000, 4, 0.25, 1e-6);
  ASSERT_TRUE(small.ok());
  EXPECT_NEAR(small->epsilon, 1.80, 5e-3);
  EXPECT_FALSE(small->valid);
}

TEST(BalleAnalyticTest, RoundTripsThroughGammaFormula) {
  for (int64_t n : {5000, 10000, 100000}) {
    for (double delta : {1e-4, 1e-6, 1e-8}) {
      absl::StatusOr<AnalyticEpsilon> eps = BalleAnalyticEpsilon(n, 4, 0.25, delta);
      ASSERT_TRUE(eps.ok());
      EXPECT_LE(BalleAnalyticGamma(n, 4, eps->epsilon, delta), 0.25 * (1 + 1e-12));
    }
  }
}

}  // namespace
}  // namespace shuffle_dp
