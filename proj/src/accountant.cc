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

#include "shuffle_dp/accountant.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "shuffle_dp/parallel.h"

namespace shuffle_dp {
namespace {

constexpr double kBisectionTolerance = 1e-9;
constexpr int kMaxBisectionSteps = 200;
constexpr int64_t kBoundaryCells = 10;
constexpr double kBoundaryMassLimit = 1e-8;
constexpr int kChernoffPoints = 76;

double ChernoffLambda(int i) { return 0.02 * std::pow(1.15, i); }

// log sup_{t >= 0} (1 - e^-t) e^(-lambda t), attained at e^-t = lambda /
// (1 + lambda). Scales the tail bound into one for the hockey-stick form.
double LogHockeyFactor(double lambda) {
  return -std::log1p(lambda) + lambda * std::log(lambda / (1.0 + lambda));
}

// Swaps the two halves so that loss 0 sits at index 0 and index sums of the
// circular convolution are loss sums. Its own inverse for even sizes.
void SwapHalves(Eigen::ArrayXd& a) {
  const Eigen::Index half = a.size() / 2;
  a.head(half).swap(a.tail(half));
}

// z^count by repeated squaring.
std::complex<double> IntPow(std::complex<double> z, int64_t count) {
  std::complex<double> result(1.0, 0.0);
  while (count > 0) {
    if (count & 1) result *= z;
    z *= z;
    count >>= 1;
  }
  return result;
}

// 1 - prod (1 - d_i)^count_i without cancellation for small d_i.
double ComposedInfinity(std::span<const std::pair<double, int64_t>> ledgers) {
  double log_survive = 0.0;
  for (const auto& [d, count] : ledgers) {
    if (d >= 1.0) return 1.0;
    log_survive += static_cast<double>(count) * std::log1p(-d);
  }
  return -std::expm1(log_survive);
}

}  // namespace

absl::Status ValidateConfig(const AccountantConfig& config) {
  if (!(config.half_width > 0.0) || !std::isfinite(config.half_width)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "grid half width L must be positive, got %g", config.half_width));
  }
  if (config.grid_size < 2 || config.grid_size % 2 != 0) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "grid size m must be a positive even integer, got %d",
        config.grid_size));
  }
  return absl::OkStatus();
}

int64_t RoundUpGridSize(double requested) {
  int64_t m = 2;
  while (static_cast<double>(m) < requested) m <<= 1;
  return m;
}

std::string IntegralFormName(IntegralForm form) {
  return form == IntegralForm::kHockeyStick ? "hockey-stick"
                                            : "tail-probability";
}

int64_t RoundUpIndex(double loss, const AccountantConfig& config) {
  const int64_t m = config.grid_size;
  const double scaled = std::ceil((loss + config.half_width) / config.spacing());
  if (!(scaled > 0.0)) return 0;
  if (scaled > static_cast<double>(m)) return m;
  int64_t j = static_cast<int64_t>(scaled);
  // Fix the rounding of the division so that x_j >= loss > x_{j-1}.
  while (j > 0 && config.GridPoint(j - 1) >= loss) --j;
  while (j < m && config.GridPoint(j) < loss) ++j;
  return j;
}

DiscretizedPld Discretize(const DiscretePld& pld,
                          const AccountantConfig& config) {
  DiscretizedPld out;
  out.masses = Eigen::ArrayXd::Zero(config.grid_size);
  double overflow = 0.0;
  for (const LossAtom& atom : pld.atoms) {
    const int64_t j = RoundUpIndex(atom.loss, config);
    if (j >= config.grid_size) {
      overflow += atom.mass;
    } else {
      out.masses[j] += atom.mass;
    }
  }
  out.ledger_mass = pld.infinity_mass + pld.truncated_mass + overflow;
  return out;
}

Eigen::ArrayXd GridLogMgf(const Eigen::ArrayXd& masses,
                          const AccountantConfig& config) {
  std::vector<double> loss;
  std::vector<double> log_mass;
  for (Eigen::Index j = 0; j < masses.size(); ++j) {
    if (masses[j] > 0.0) {
      loss.push_back(config.GridPoint(j));
      log_mass.push_back(std::log(masses[j]));
    }
  }
  Eigen::ArrayXd out =
      Eigen::ArrayXd::Constant(kChernoffPoints, -INFINITY);
  if (loss.empty()) return out;
  ParallelFor(kChernoffPoints, [&](int64_t i) {
    const double lambda = ChernoffLambda(static_cast<int>(i));
    double peak = -INFINITY;
    for (size_t j = 0; j < loss.size(); ++j) {
      peak = std::max(peak, log_mass[j] + lambda * loss[j]);
    }
    long double sum = 0.0L;
    for (size_t j = 0; j < loss.size(); ++j) {
      sum += std::exp(log_mass[j] + lambda * loss[j] - peak);
    }
    out[i] = peak + std::log(static_cast<double>(sum));
  });
  return out;
}

ComposedDensity ComposedDensity::FromGrid(Eigen::ArrayXd masses,
                                          double infinity_mass,
                                          const AccountantConfig& config,
                                          Eigen::ArrayXd log_mgf) {
  ComposedDensity density;
  density.masses_ = std::move(masses);
  density.infinity_mass_ = infinity_mass;
  density.config_ = config;
  density.log_mgf_ = std::move(log_mgf);

  const Eigen::Index m = density.masses_.size();
  density.tail_mass_.resize(m + 1);
  density.tail_weighted_.resize(m + 1);
  const long double shrink = std::exp(-static_cast<long double>(config.spacing()));
  long double tail = 0.0L;
  long double weighted = 0.0L;
  density.tail_mass_[m] = 0.0;
  density.tail_weighted_[m] = 0.0;
  for (Eigen::Index j = m - 1; j >= 0; --j) {
    tail += density.masses_[j];
    weighted = density.masses_[j] + shrink * weighted;
    density.tail_mass_[j] = static_cast<double>(tail);
    density.tail_weighted_[j] = static_cast<double>(weighted);
  }

  const Eigen::Index edge = std::min<Eigen::Index>(kBoundaryCells + 1, m);
  const double boundary =
      density.masses_.head(edge).sum() + density.masses_.tail(edge).sum();
  if (boundary > kBoundaryMassLimit) {
    density.wrap_warning_ = absl::StrFormat(
        "%.3g of the composed mass lies within %d grid cells of +-L = %g; "
        "results may be affected by wrap-around, increase L",
        boundary, kBoundaryCells, config.half_width);
  }
  return density;
}

double ComposedDensity::ChernoffDelta(double eps, IntegralForm form) const {
  if (log_mgf_.size() == 0) return INFINITY;
  double best = INFINITY;
  for (Eigen::Index i = 0; i < log_mgf_.size(); ++i) {
    const double lambda = ChernoffLambda(static_cast<int>(i));
    double log_bound = log_mgf_[i] - lambda * eps;
    if (form == IntegralForm::kHockeyStick) log_bound += LogHockeyFactor(lambda);
    best = std::min(best, log_bound);
  }
  return infinity_mass_ + std::exp(best);
}

double ComposedDensity::DeltaAt(double eps, IntegralForm form) const {
  const int64_t j = RoundUpIndex(eps, config_);
  double delta = infinity_mass_;
  if (j < masses_.size()) {
    if (form == IntegralForm::kTailProbability) {
      delta += tail_mass_[j];
    } else {
      const double gap = std::exp(eps - config_.GridPoint(j));
      delta += tail_mass_[j] - gap * tail_weighted_[j];
    }
  }
  delta = std::min(delta, ChernoffDelta(eps, form));
  return std::clamp(delta, 0.0, 1.0);
}

absl::StatusOr<ComposedDensity> Compose(std::span<const CompositionEntry> spec,
                                        const AccountantConfig& config) {
  if (absl::Status s = ValidateConfig(config); !s.ok()) return s;
  if (spec.empty()) {
    return absl::InvalidArgumentError("composition needs at least one entry");
  }
  for (const CompositionEntry& entry : spec) {
    if (entry.pld == nullptr || entry.count < 1) {
      return absl::InvalidArgumentError(
          "composition entries need a PLD and a count >= 1");
    }
    if (ValidationReport report = Validate(*entry.pld); !report.ok()) {
      return absl::InvalidArgumentError("invalid PLD in composition: " +
                                        report.ToString());
    }
  }

  const int64_t m = config.grid_size;
  if (spec.size() == 1 && spec[0].count == 1) {
    // Nothing to convolve; skipping the transform pair keeps the grid free of
    // FFT round-off, so the Chernoff bound would never be the smaller one.
    DiscretizedPld grid = Discretize(*spec[0].pld, config);
    return ComposedDensity::FromGrid(std::move(grid.masses), grid.ledger_mass,
                                     config);
  }
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);

  Eigen::VectorXcd product;
  Eigen::ArrayXd log_mgf = Eigen::ArrayXd::Zero(kChernoffPoints);
  std::vector<std::pair<double, int64_t>> ledgers;
  ledgers.reserve(spec.size());
  for (const CompositionEntry& entry : spec) {
    DiscretizedPld grid = Discretize(*entry.pld, config);
    ledgers.emplace_back(grid.ledger_mass, entry.count);
    log_mgf += static_cast<double>(entry.count) * GridLogMgf(grid.masses, config);
    SwapHalves(grid.masses);
    Eigen::VectorXcd spectrum;
    const Eigen::VectorXd signal = grid.masses.matrix();
    fft.fwd(spectrum, signal);
    for (Eigen::Index f = 0; f < spectrum.size(); ++f) {
      spectrum[f] = IntPow(spectrum[f], entry.count);
    }
    if (product.size() == 0) {
      product = std::move(spectrum);
    } else {
      product.array() *= spectrum.array();
    }
  }

  Eigen::VectorXd composed;
  fft.inv(composed, product, m);
  Eigen::ArrayXd masses = composed.array().max(0.0);
  SwapHalves(masses);
  return ComposedDensity::FromGrid(std::move(masses), ComposedInfinity(ledgers),
                                   config, std::move(log_mgf));
}

absl::StatusOr<double> EpsilonForDelta(
    std::span<const ComposedDensity* const> densities, double target_delta,
    IntegralForm form) {
  if (densities.empty()) {
    return absl::InvalidArgumentError("no densities to query");
  }
  if (!(target_delta > 0.0 && target_delta < 1.0)) {
    return absl::OutOfRangeError(absl::StrFormat(
        "target delta must lie in (0, 1), got %g", target_delta));
  }
  auto delta_at = [&](double eps) {
    double delta = 0.0;
    for (const ComposedDensity* d : densities) {
      delta = std::max(delta, d->DeltaAt(eps, form));
    }
    return delta;
  };
  const double half_width = densities.front()->config().half_width;
  double lo = -half_width;
  double hi = half_width;
  const double delta_lo = delta_at(lo);
  const double delta_hi = delta_at(hi);
  if (target_delta < delta_hi || target_delta > delta_lo) {
    return absl::OutOfRangeError(absl::StrFormat(
        "target delta %g outside the achievable range [%.6g, %.6g] on "
        "eps in [%g, %g]",
        target_delta, delta_hi, delta_lo, lo, hi));
  }
  for (int step = 0; step < kMaxBisectionSteps && hi - lo > kBisectionTolerance;
       ++step) {
    const double mid = 0.5 * (lo + hi);
    if (delta_at(mid) <= target_delta) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

absl::StatusOr<double> EpsilonForDelta(std::span<const CompositionEntry> spec,
                                       const AccountantConfig& config,
                                       double target_delta, IntegralForm form) {
  absl::StatusOr<ComposedDensity> composed = Compose(spec, config);
  if (!composed.ok()) return composed.status();
  const ComposedDensity* densities[] = {&*composed};
  return EpsilonForDelta(densities, target_delta, form);
}

double ExactDeltaSingle(const DiscretePld& pld, double eps, IntegralForm form) {
  long double delta =
      static_cast<long double>(pld.infinity_mass) + pld.truncated_mass;
  for (const LossAtom& atom : pld.atoms) {
    if (form == IntegralForm::kTailProbability) {
      if (atom.loss >= eps) delta += atom.mass;
    } else if (atom.loss > eps) {
      delta += static_cast<long double>(atom.mass) * -std::expm1(eps - atom.loss);
    }
  }
  return std::clamp(static_cast<double>(delta), 0.0, 1.0);
}

absl::StatusOr<DiscretePld> NaiveCompose(const DiscretePld& pld, int64_t n_c,
                                         int64_t max_atoms) {
  if (n_c < 1) return absl::InvalidArgumentError("n_c must be >= 1");
  absl::StatusOr<DiscretePld> base = Coalesce(pld, 0.0);
  if (!base.ok()) return base.status();

  DiscretePld result;
  result.direction = pld.direction;
  result.atoms = {{0.0, 1.0}};
  for (int64_t round = 0; round < n_c; ++round) {
    const int64_t size =
        static_cast<int64_t>(result.atoms.size() * base->atoms.size());
    if (size > max_atoms) {
      return absl::ResourceExhaustedError(absl::StrFormat(
          "naive composition needs %d atoms, above the cap of %d", size,
          max_atoms));
    }
    DiscretePld next;
    next.atoms.reserve(size);
    for (const LossAtom& x : result.atoms) {
      for (const LossAtom& y : base->atoms) {
        next.atoms.push_back({x.loss + y.loss, x.mass * y.mass});
      }
    }
    absl::StatusOr<DiscretePld> merged = Coalesce(next, 0.0);
    if (!merged.ok()) return merged.status();
    result.atoms = std::move(merged->atoms);
  }
  const std::pair<double, int64_t> ledger[] = {
      {pld.infinity_mass + pld.truncated_mass, n_c}};
  result.infinity_mass = ComposedInfinity(ledger);
  return result;
}

}  // namespace shuffle_dp
