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

#include "shuffle_dp/clones.h"

#include <cmath>
#include <numeric>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "shuffle_dp/binomial.h"
#include "shuffle_dp/parallel.h"

namespace shuffle_dp {
namespace {

absl::Status CheckSupport(int64_t n, double eps0, int64_t a, int64_t b) {
  if (n < 1) return absl::InvalidArgumentError("n must be >= 1");
  if (!(eps0 > 0.0)) return absl::InvalidArgumentError("eps0 must be > 0");
  if (a < 0 || b < 0 || a + b > n) {
    return absl::OutOfRangeError(absl::StrFormat(
        "(a, b) = (%d, %d) outside the support a + b <= n = %d", a, b, n));
  }
  return absl::OkStatus();
}

// Mixture weight q = e^eps0 / (e^eps0 + 1) and 1 - q, computed without
// cancellation.
struct MixtureWeights {
  double q;
  double one_minus_q;
};

MixtureWeights Weights(double eps0) {
  const double one_minus_q = 1.0 / (1.0 + std::exp(eps0));
  const double q = 1.0 / (1.0 + std::exp(-eps0));
  return {q, one_minus_q};
}

// log P(C = i) for C ~ Bin(n - 1, e^-eps0).
double LogClonesCount(int64_t n, double eps0, int64_t i) {
  return LogBinomialPmf(n - 1, i, std::exp(-eps0), -std::expm1(-eps0));
}

// log P(A = j | C = i) for A ~ Bin(i, 1/2).
double LogSplit(int64_t i, int64_t j) {
  if (i == 0) return j == 0 ? 0.0 : -INFINITY;
  return LogBinomialPmf(i, j, 0.5, 0.5);
}

// Loss at (a, b) with a + b >= 1: log((e^eps0 a + b) / (e^eps0 b + a)).
double LossAt(double eps0, double exp_eps0, int64_t a, int64_t b) {
  if (a == b) return 0.0;
  if (b == 0) return eps0;
  if (a == 0) return -eps0;
  const double da = static_cast<double>(a);
  const double db = static_cast<double>(b);
  return std::log(exp_eps0 * da + db) - std::log(exp_eps0 * db + da);
}

// Ranges of a to enumerate on each diagonal C = i, i in `outer`.
struct Enumeration {
  IntRange outer;
  std::vector<IntRange> a_ranges;  // indexed by i - outer.lo
  int64_t atom_count = 0;
};

Enumeration PlanEnumeration(int64_t n, double eps0, double tau) {
  Enumeration plan;
  const bool truncate = tau > 0.0 && n > 1;
  plan.outer = truncate ? HoeffdingWindow(n - 1, std::exp(-eps0), tau / 2.0)
                        : IntRange{0, n - 1};
  plan.a_ranges.reserve(plan.outer.size());
  for (int64_t i = plan.outer.lo; i <= plan.outer.hi; ++i) {
    IntRange a_range{0, i + 1};
    if (truncate && i > 0) {
      const IntRange split = HoeffdingWindow(i, 0.5, tau / 2.0);
      // Point a carries P1 mass from A = a - 1 and P0 mass from A = a, so
      // every A in the window is fully covered by a in [lo, hi + 1].
      a_range = {split.lo, split.hi + 1};
    }
    plan.a_ranges.push_back(a_range);
    plan.atom_count += a_range.size();
  }
  return plan;
}

// Weights of P1 and P0 in the measure whose masses the atoms carry.
struct EmittedMeasure {
  double p1;
  double p0;
};

// Emits one atom per point of `plan` through make_atom(p_mass, q_mass, loss).
// The mass of `measure` outside the plan is recorded as truncation, summed
// from binomial tails rather than as 1 - (emitted mass) so that round-off in
// the atoms does not show up as dropped mass.
template <typename MakeAtom>
DiscretePld Enumerate(int64_t n, double eps0, const Enumeration& plan,
                      Direction direction, EmittedMeasure measure,
                      MakeAtom make_atom) {
  const MixtureWeights w = Weights(eps0);
  const double exp_eps0 = std::exp(eps0);
  const int64_t diagonals = plan.outer.size();
  std::vector<std::vector<LossAtom>> per_diagonal(diagonals);
  std::vector<double> dropped(diagonals, 0.0);

  ParallelFor(diagonals, [&](int64_t d) {
    const int64_t i = plan.outer.lo + d;
    const IntRange a_range = plan.a_ranges[d];
    const double log_count = LogClonesCount(n, eps0, i);
    // P1 covers A = a - 1 and P0 covers A = a for a in a_range.
    const double split_dropped =
        measure.p1 * BinomialOutsideMass(i, 0.5, 0.5,
                                         {a_range.lo - 1, a_range.hi - 1}) +
        measure.p0 * BinomialOutsideMass(i, 0.5, 0.5, a_range);
    dropped[d] = split_dropped > 0.0 ? std::exp(log_count) * split_dropped
                                     : 0.0;
    std::vector<LossAtom>& out = per_diagonal[d];
    out.reserve(a_range.size());
    // log P(A = a - 1 | C = i), carried across the loop.
    double log_split_prev = LogSplit(i, a_range.lo - 1);
    for (int64_t a = a_range.lo; a <= a_range.hi; ++a) {
      const int64_t b = i + 1 - a;
      const double log_split = LogSplit(i, a);
      const double p1 = a > 0 ? std::exp(log_count + log_split_prev) : 0.0;
      const double p0 = b > 0 ? std::exp(log_count + log_split) : 0.0;
      log_split_prev = log_split;
      const double p_mass = w.q * p1 + w.one_minus_q * p0;
      const double q_mass = w.one_minus_q * p1 + w.q * p0;
      if (p_mass == 0.0 && q_mass == 0.0) continue;
      LossAtom atom = make_atom(p_mass, q_mass, LossAt(eps0, exp_eps0, a, b));
      if (atom.mass > 0.0) out.push_back(atom);
    }
  });

  DiscretePld pld;
  pld.direction = direction;
  pld.atoms.reserve(plan.atom_count);
  long double total_dropped = BinomialOutsideMass(
      n - 1, std::exp(-eps0), -std::expm1(-eps0), plan.outer);
  for (int64_t d = 0; d < diagonals; ++d) {
    total_dropped += dropped[d];
    pld.atoms.insert(pld.atoms.end(), per_diagonal[d].begin(),
                     per_diagonal[d].end());
  }
  pld.truncated_mass = static_cast<double>(total_dropped);
  return pld;
}

absl::Status CheckAtomBudget(const Enumeration& plan, int64_t max_atoms) {
  if (plan.atom_count > max_atoms) {
    return absl::ResourceExhaustedError(absl::StrFormat(
        "clones PLD would have %d atoms, above the cap of %d; use a positive "
        "tau or raise max_atoms",
        plan.atom_count, max_atoms));
  }
  return absl::OkStatus();
}

absl::StatusOr<DiscretePld> BuildFromPlan(const ClonesParams& params,
                                          int64_t n, const Enumeration& plan) {
  if (absl::Status s = CheckAtomBudget(plan, params.max_atoms); !s.ok()) {
    return s;
  }
  const MixtureWeights w = Weights(params.eps0);
  if (params.direction == Direction::kNumOverDen) {
    return Enumerate(n, params.eps0, plan, params.direction,
                     {w.q, w.one_minus_q}, [](double p, double, double loss) {
                       return LossAtom{loss, p};
                     });
  }
  return Enumerate(n, params.eps0, plan, params.direction,
                   {w.one_minus_q, w.q}, [](double, double q, double loss) {
                     return LossAtom{-loss, q};
                   });
}

}  // namespace

absl::Status ValidateClonesParams(const ClonesParams& params) {
  if (params.n < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("n must be >= 1, got %d", params.n));
  }
  if (!(params.eps0 > 0.0) || !std::isfinite(params.eps0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("eps0 must be a positive finite number, got %g",
                        params.eps0));
  }
  if (!(params.tau >= 0.0 && params.tau < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("tau must lie in [0, 1), got %g", params.tau));
  }
  if (!(params.subsample_ratio > 0.0 && params.subsample_ratio <= 1.0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "subsample_ratio must lie in (0, 1], got %g", params.subsample_ratio));
  }
  if (params.max_atoms < 1) {
    return absl::InvalidArgumentError("max_atoms must be >= 1");
  }
  return absl::OkStatus();
}

absl::StatusOr<double> P1Mass(int64_t n, double eps0, int64_t a, int64_t b) {
  if (absl::Status s = CheckSupport(n, eps0, a, b); !s.ok()) return s;
  if (a == 0) return 0.0;
  const int64_t i = a + b - 1;
  return std::exp(LogClonesCount(n, eps0, i) + LogSplit(i, a - 1));
}

absl::StatusOr<double> P0Mass(int64_t n, double eps0, int64_t a, int64_t b) {
  if (absl::Status s = CheckSupport(n, eps0, a, b); !s.ok()) return s;
  if (b == 0) return 0.0;
  const int64_t i = a + b - 1;
  return std::exp(LogClonesCount(n, eps0, i) + LogSplit(i, a));
}

absl::StatusOr<PairMass> ClonesPairMass(int64_t n, double eps0, int64_t a,
                                        int64_t b) {
  if (a + b < 1) {
    return absl::OutOfRangeError("(0, 0) is outside the clones support");
  }
  absl::StatusOr<double> p1 = P1Mass(n, eps0, a, b);
  if (!p1.ok()) return p1.status();
  absl::StatusOr<double> p0 = P0Mass(n, eps0, a, b);
  if (!p0.ok()) return p0.status();
  const MixtureWeights w = Weights(eps0);
  return PairMass{w.q * *p1 + w.one_minus_q * *p0,
                  w.one_minus_q * *p1 + w.q * *p0};
}

absl::StatusOr<double> ClonesLoss(double eps0, int64_t a, int64_t b) {
  if (!(eps0 > 0.0)) return absl::InvalidArgumentError("eps0 must be > 0");
  if (a < 0 || b < 0 || (a == 0 && b == 0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "loss undefined at (a, b) = (%d, %d)", a, b));
  }
  return LossAt(eps0, std::exp(eps0), a, b);
}

double SubsampledLoss(double loss, double ratio) {
  if (loss == 0.0) return 0.0;
  // log(1 + r (e^loss - 1)) keeps precision for small losses.
  return std::log1p(ratio * std::expm1(loss));
}

absl::StatusOr<int64_t> EffectivePopulation(int64_t n, double ratio,
                                            PopulationRounding rounding) {
  const double scaled = ratio * static_cast<double>(n);
  const double rounded = rounding == PopulationRounding::kNearest
                             ? std::round(scaled)
                             : std::floor(scaled);
  if (rounded < 1.0) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "subsampled population ratio * n = %g rounds below 1", scaled));
  }
  return static_cast<int64_t>(rounded);
}

absl::StatusOr<DiscretePld> BuildClonesPldFull(const ClonesParams& params) {
  if (absl::Status s = ValidateClonesParams(params); !s.ok()) return s;
  return BuildFromPlan(params, params.n,
                       PlanEnumeration(params.n, params.eps0, 0.0));
}

absl::StatusOr<DiscretePld> BuildClonesPld(const ClonesParams& params) {
  if (absl::Status s = ValidateClonesParams(params); !s.ok()) return s;
  if (params.tau == 0.0 || params.n == 1) return BuildClonesPldFull(params);
  return BuildFromPlan(params, params.n,
                       PlanEnumeration(params.n, params.eps0, params.tau));
}

absl::StatusOr<DiscretePld> BuildSubsampledClonesPld(const ClonesParams& params) {
  if (absl::Status s = ValidateClonesParams(params); !s.ok()) return s;
  if (params.subsample_ratio == 1.0) return BuildClonesPld(params);
  absl::StatusOr<int64_t> n_eff =
      EffectivePopulation(params.n, params.subsample_ratio, params.rounding);
  if (!n_eff.ok()) return n_eff.status();

  const Enumeration plan = PlanEnumeration(
      *n_eff, params.eps0, *n_eff > 1 ? params.tau : 0.0);
  if (absl::Status s = CheckAtomBudget(plan, params.max_atoms); !s.ok()) {
    return s;
  }
  const double r = params.subsample_ratio;
  const MixtureWeights w = Weights(params.eps0);
  if (params.direction == Direction::kNumOverDen) {
    return Enumerate(*n_eff, params.eps0, plan, params.direction,
                     {r * w.q + (1.0 - r) * w.one_minus_q,
                      r * w.one_minus_q + (1.0 - r) * w.q},
                     [r](double p, double q, double loss) {
                       return LossAtom{SubsampledLoss(loss, r),
                                       r * p + (1.0 - r) * q};
                     });
  }
  return Enumerate(*n_eff, params.eps0, plan, params.direction,
                   {w.one_minus_q, w.q}, [r](double, double q, double loss) {
                     return LossAtom{-SubsampledLoss(loss, r), q};
                   });
}

}  // namespace shuffle_dp
