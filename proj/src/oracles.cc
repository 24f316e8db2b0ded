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

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "shuffle_dp/parallel.h"

namespace shuffle_dp {
namespace {

constexpr int64_t kMaxOutcomes = 1'000'000;
constexpr long double kTieTolerance = 1e-12L;
constexpr int kShards = 16;

// Probabilities of one view. The cond_* fields hold the same view's
// probabilities given that the differing (last) user answered truthfully;
// they are only filled for the strong adversary, whose view reveals that.
struct ViewMass {
  long double p_x = 0.0L;
  long double p_x_prime = 0.0L;
  long double cond_p_x = 0.0L;
  long double cond_p_x_prime = 0.0L;
  bool differing_truthful = false;
};

absl::Status ValidateEnumeration(int64_t n, int k, double gamma) {
  if (n < 1 || n > 8) {
    return absl::InvalidArgumentError(
        absl::StrFormat("view enumeration needs 1 <= n <= 8, got %d", n));
  }
  if (k < 2 || k > 4) {
    return absl::InvalidArgumentError(
        absl::StrFormat("view enumeration needs 2 <= k <= 4, got %d", k));
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("gamma must lie in [0, 1], got %g", gamma));
  }
  if (std::pow(k + 1.0, static_cast<double>(n)) > kMaxOutcomes) {
    return absl::ResourceExhaustedError(
        absl::StrFormat("(k + 1)^n = %d^%d outcomes exceeds %d", k + 1, n,
                        kMaxOutcomes));
  }
  return absl::OkStatus();
}

// View key: bits 0..7 flag randomised users visible to the adversary, then
// four bits per class count.
uint64_t ViewKey(uint64_t mask, const std::array<int, 5>& counts, int k) {
  uint64_t key = mask;
  for (int c = 1; c <= k; ++c) {
    key |= static_cast<uint64_t>(counts[c]) << (8 + 4 * (c - 1));
  }
  return key;
}

std::vector<ViewMass> EnumerateViews(int64_t n, int k, double gamma,
                                     Adversary adversary) {
  const long double truthful = 1.0L - static_cast<long double>(gamma);
  const long double random = static_cast<long double>(gamma) / k;
  const int64_t visible = adversary == Adversary::kStrong ? n : n - 1;
  int64_t outcomes = 1;
  for (int64_t i = 0; i < n; ++i) outcomes *= k + 1;

  std::map<uint64_t, ViewMass> views;
  std::vector<int> digits(n);
  for (int64_t o = 0; o < outcomes; ++o) {
    int64_t rest = o;
    for (int64_t i = 0; i < n; ++i) {
      digits[i] = static_cast<int>(rest % (k + 1));
      rest /= k + 1;
    }
    long double others = 1.0L;
    uint64_t mask = 0;
    std::array<int, 5> counts{};
    for (int64_t i = 0; i + 1 < n; ++i) {
      others *= digits[i] == 0 ? truthful : random;
      if (digits[i] != 0) mask |= uint64_t{1} << i;
      ++counts[digits[i] == 0 ? 1 : digits[i]];
    }
    const int last = digits[n - 1];
    const long double prob = others * (last == 0 ? truthful : random);
    if (last != 0 && visible == n) mask |= uint64_t{1} << (n - 1);

    std::array<int, 5> counts_x = counts;
    std::array<int, 5> counts_x_prime = counts;
    ++counts_x[last == 0 ? 1 : last];
    ++counts_x_prime[last == 0 ? 2 : last];

    ViewMass& vx = views[ViewKey(mask, counts_x, k)];
    ViewMass& vxp = views[ViewKey(mask, counts_x_prime, k)];
    vx.p_x += prob;
    vxp.p_x_prime += prob;
    if (adversary == Adversary::kStrong && last == 0) {
      vx.cond_p_x += others;
      vxp.cond_p_x_prime += others;
      vx.differing_truthful = true;
      vxp.differing_truthful = true;
    }
  }
  std::vector<ViewMass> out;
  out.reserve(views.size());
  for (const auto& [key, mass] : views) out.push_back(mass);
  return out;
}

// p >= e^eps q up to a relative tie tolerance; q = 0 < p counts as infinite.
bool RatioAtLeast(long double p, long double q, long double threshold) {
  if (p <= 0.0L) return false;
  return p >= threshold * q * (1.0L - kTieTolerance);
}

double Clamp01(long double v) {
  return std::clamp(static_cast<double>(v), 0.0, 1.0);
}

}  // namespace

absl::StatusOr<ViewEnumerationResult> KrrViewEnumeration(int64_t n, int k,
                                                         double gamma,
                                                         double eps,
                                                         Adversary adversary) {
  if (absl::Status s = ValidateEnumeration(n, k, gamma); !s.ok()) return s;
  if (std::isnan(eps)) return absl::InvalidArgumentError("eps is NaN");
  const std::vector<ViewMass> views = EnumerateViews(n, k, gamma, adversary);
  const long double threshold = std::exp(static_cast<long double>(eps));

  long double hockey = 0.0L, reverse = 0.0L, tail = 0.0L, cond_tail = 0.0L;
  long double total = 0.0L;
  for (const ViewMass& v : views) {
    total += v.p_x;
    hockey += std::max(0.0L, v.p_x - threshold * v.p_x_prime);
    reverse += std::max(0.0L, v.p_x_prime - threshold * v.p_x);
    if (RatioAtLeast(v.p_x, v.p_x_prime, threshold)) tail += v.p_x;
    if (v.differing_truthful &&
        RatioAtLeast(v.cond_p_x, v.cond_p_x_prime, threshold)) {
      cond_tail += v.cond_p_x;
    }
  }
  ViewEnumerationResult result;
  result.hockey_delta = Clamp01(hockey);
  result.reverse_hockey_delta = Clamp01(reverse);
  result.unconditional_tail_probability = Clamp01(tail);
  result.tail_probability =
      Clamp01(adversary == Adversary::kStrong ? cond_tail : tail);
  result.total_mass = static_cast<double>(total);
  return result;
}

absl::StatusOr<DiscretePld> KrrViewPld(int64_t n, int k, double gamma,
                                       Adversary adversary) {
  if (absl::Status s = ValidateEnumeration(n, k, gamma); !s.ok()) return s;
  const std::vector<ViewMass> views = EnumerateViews(n, k, gamma, adversary);
  const bool strong = adversary == Adversary::kStrong;
  DiscretePld pld;
  long double infinity = 0.0L;
  for (const ViewMass& v : views) {
    const long double p = strong ? v.cond_p_x : v.p_x;
    const long double q = strong ? v.cond_p_x_prime : v.p_x_prime;
    if (p <= 0.0L) continue;
    if (q <= 0.0L) {
      infinity += p;
    } else {
      pld.atoms.push_back({static_cast<double>(std::log(p / q)),
                           static_cast<double>(p)});
    }
  }
  pld.infinity_mass = static_cast<double>(infinity);
  // Views with the same ratio reach it through different products of the
  // same factors, so equal losses can differ in the last bits.
  return Coalesce(pld, 1e-12);
}

absl::StatusOr<McEstimate> GaussianShuffleMc(int64_t n, double sigma,
                                             double eps, int64_t samples,
                                             uint64_t seed) {
  if (n < 1 || n > 8) {
    return absl::InvalidArgumentError(
        absl::StrFormat("Gaussian Monte Carlo needs 1 <= n <= 8, got %d", n));
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("sigma must be positive, got %g", sigma));
  }
  if (std::isnan(eps)) return absl::InvalidArgumentError("eps is NaN");
  if (samples < 1000) {
    return absl::InvalidArgumentError(
        absl::StrFormat("need at least 1000 samples, got %d", samples));
  }

  struct ShardSum {
    long double sum = 0.0L;
    long double sum_sq = 0.0L;
  };
  std::array<ShardSum, kShards> shards;
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  const double log_n = std::log(static_cast<double>(n));

  ParallelFor(kShards, [&](int64_t shard) {
    const int64_t count =
        samples / kShards + (shard < samples % kShards ? 1 : 0);
    std::seed_seq seq{static_cast<uint32_t>(seed),
                      static_cast<uint32_t>(seed >> 32),
                      static_cast<uint32_t>(shard)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, sigma);
    std::uniform_int_distribution<int64_t> component(0, n - 1);
    std::vector<double> exponents(n);
    ShardSum acc;
    for (int64_t s = 0; s < count; ++s) {
      const int64_t centre = component(rng);
      double top = -std::numeric_limits<double>::infinity();
      for (int64_t j = 0; j < n; ++j) {
        const double t = normal(rng) + (j == centre ? 1.0 : 0.0);
        exponents[j] = (2.0 * t - 1.0) * inv_two_var;
        top = std::max(top, exponents[j]);
      }
      double sum = 0.0;
      for (double e : exponents) sum += std::exp(e - top);
      const double log_ratio = top + std::log(sum) - log_n;
      const double value =
          eps >= log_ratio ? 0.0 : -std::expm1(eps - log_ratio);
      acc.sum += value;
      acc.sum_sq += static_cast<long double>(value) * value;
    }
    shards[shard] = acc;
  });

  long double sum = 0.0L, sum_sq = 0.0L;
  for (const ShardSum& s : shards) {
    sum += s.sum;
    sum_sq += s.sum_sq;
  }
  const long double count = static_cast<long double>(samples);
  const long double mean = sum / count;
  const long double var =
      std::max(0.0L, (sum_sq - count * mean * mean) / (count - 1.0L));
  McEstimate out;
  out.estimate = Clamp01(mean);
  out.std_error = static_cast<double>(std::sqrt(var / count));
  out.samples = samples;
  out.seed = seed;
  return out;
}

absl::StatusOr<double> ClosedFormGaussianDelta(double sigma, double eps) {
  if (!(sigma > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("sigma must be positive, got %g", sigma));
  }
  if (std::isnan(eps)) return absl::InvalidArgumentError("eps is NaN");
  auto phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  const double a = 1.0 / (2.0 * sigma);
  const double delta = phi(a - eps * sigma) - std::exp(eps) * phi(-a - eps * sigma);
  return std::isfinite(delta) ? std::clamp(delta, 0.0, 1.0) : 0.0;
}

}  // namespace shuffle_dp
