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

// FFT accountant for discrete privacy loss distributions.
//
// A PLD is placed on the grid x_j = -L + j dx, j = 0..m-1, dx = 2L/m, by
// rounding every loss up to the next grid point, so the grid distribution
// stochastically dominates the exact one and every delta computed from it is
// an upper bound. Losses above the grid move to the infinity ledger; losses
// below -L are clamped to -L. Composition is circular convolution via FFT.

#ifndef SHUFFLE_DP_ACCOUNTANT_H_
#define SHUFFLE_DP_ACCOUNTANT_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "shuffle_dp/pld.h"

namespace shuffle_dp {

struct AccountantConfig {
  double half_width = 20.0;
  int64_t grid_size = int64_t{1} << 20;

  double spacing() const {
    return 2.0 * half_width / static_cast<double>(grid_size);
  }
  double GridPoint(int64_t j) const {
    return -half_width + static_cast<double>(j) * spacing();
  }
};

absl::Status ValidateConfig(const AccountantConfig& config);

// Smallest power of two >= requested (and >= 2).
int64_t RoundUpGridSize(double requested);

enum class IntegralForm {
  // delta = d_inf + sum_{x > eps} (1 - e^(eps - x)) w(x)
  kHockeyStick,
  // delta = d_inf + sum_{x >= eps} w(x)
  kTailProbability,
};

std::string IntegralFormName(IntegralForm form);

struct DiscretizedPld {
  Eigen::ArrayXd masses;
  // infinity_mass + truncated_mass + mass rounded beyond the right end.
  double ledger_mass = 0.0;
};

// Index of the smallest grid point >= loss; grid_size when there is none.
int64_t RoundUpIndex(double loss, const AccountantConfig& config);

DiscretizedPld Discretize(const DiscretePld& pld, const AccountantConfig& config);

struct CompositionEntry {
  const DiscretePld* pld = nullptr;
  int64_t count = 1;
};

// log E[e^(lambda X); X on the grid] of a grid density at each lambda of the
// Chernoff grid, for lambda = 0.02 * 1.15^i, i = 0..75.
Eigen::ArrayXd GridLogMgf(const Eigen::ArrayXd& masses,
                          const AccountantConfig& config);

// The composed grid density with precomputed suffix sums, so each delta query
// is O(1).
//
// FFT round-off leaves an additive floor of roughly 1e-16 on the composed
// masses. When `log_mgf` (the sum over composed rounds of GridLogMgf) is
// given, DeltaAt also evaluates the Chernoff bound of the exact linear
// convolution and returns the smaller of the two. Both are upper bounds on
// the delta of the grid distribution, and the Chernoff bound is what keeps
// deltas below the FFT floor meaningful.
class ComposedDensity {
 public:
  static ComposedDensity FromGrid(Eigen::ArrayXd masses, double infinity_mass,
                                  const AccountantConfig& config,
                                  Eigen::ArrayXd log_mgf = Eigen::ArrayXd());

  const Eigen::ArrayXd& masses() const { return masses_; }
  double infinity_mass() const { return infinity_mass_; }
  const AccountantConfig& config() const { return config_; }
  // Set when more than 1e-8 of the mass sits within 10 cells of either end
  // of the grid, where circular wrap-around may have corrupted the result.
  const std::optional<std::string>& wrap_warning() const {
    return wrap_warning_;
  }

  double DeltaAt(double eps, IntegralForm form) const;

  // infinity_mass + min over the lambda grid of the finite part's Chernoff
  // bound; +infinity without `log_mgf`.
  double ChernoffDelta(double eps, IntegralForm form) const;

 private:
  ComposedDensity() = default;

  Eigen::ArrayXd masses_;
  double infinity_mass_ = 0.0;
  AccountantConfig config_;
  std::optional<std::string> wrap_warning_;
  // tail_mass_[j] = sum_{i >= j} w_i
  Eigen::ArrayXd tail_mass_;
  // tail_weighted_[j] = sum_{i >= j} w_i e^(x_j - x_i)
  Eigen::ArrayXd tail_weighted_;
  Eigen::ArrayXd log_mgf_;
};

// Composes count_i copies of each PLD. The infinity mass composes as
// 1 - prod (1 - ledger_i)^count_i.
absl::StatusOr<ComposedDensity> Compose(std::span<const CompositionEntry> spec,
                                        const AccountantConfig& config);

inline double DeltaAt(const ComposedDensity& composed, double eps,
                      IntegralForm form) {
  return composed.DeltaAt(eps, form);
}

// Smallest eps (to 1e-9, upper end of the bisection bracket) such that the
// largest delta over `densities` is <= target_delta. Used with one density
// per direction of a dominating pair.
absl::StatusOr<double> EpsilonForDelta(
    std::span<const ComposedDensity* const> densities, double target_delta,
    IntegralForm form);

absl::StatusOr<double> EpsilonForDelta(std::span<const CompositionEntry> spec,
                                       const AccountantConfig& config,
                                       double target_delta, IntegralForm form);

// Grid-free delta of a single (uncomposed) PLD at its exact losses.
double ExactDeltaSingle(const DiscretePld& pld, double eps, IntegralForm form);

// n_c-fold self-convolution at the atom level: loss sums and mass products,
// equal losses merged. Both ledgers fold into infinity_mass as
// 1 - (1 - d)^n_c. Fails when an intermediate result would exceed max_atoms.
absl::StatusOr<DiscretePld> NaiveCompose(const DiscretePld& pld, int64_t n_c,
                                         int64_t max_atoms = 10'000'000);

}  // namespace shuffle_dp

#endif  // SHUFFLE_DP_ACCOUNTANT_H_
