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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "shuffle_dp/binomial.h"
#include "shuffle_dp/parallel.h"

namespace shuffle_dp {
namespace {

// Joins per-worker chunks. The builders sum the dropped mass from binomial
// tails; taking it as 1 - (emitted mass) would record the atoms' round-off
// as truncation.
DiscretePld Concatenate(std::vector<std::vector<LossAtom>>& chunks,
                        double infinity_mass, long double dropped) {
  DiscretePld pld;
  size_t count = 0;
  for (const auto& chunk : chunks) count += chunk.size();
  pld.atoms.reserve(count);
  for (auto& chunk : chunks) {
    pld.atoms.insert(pld.atoms.end(), chunk.begin(), chunk.end());
    std::vector<LossAtom>().swap(chunk);
  }
  pld.infinity_mass = infinity_mass;
  pld.truncated_mass = dropped > 0.0L ? static_cast<double>(dropped) : 0.0;
  return pld;
}

double Positive(double x) { return x > 0.0 ? x : 0.0; }

absl::Status CheckAtomBudget(int64_t atoms, int64_t max_atoms) {
  if (atoms > max_atoms) {
    return absl::ResourceExhaustedError(absl::StrFormat(
        "k-RR PLD would have %d atoms, above the cap of %d", atoms, max_atoms));
  }
  return absl::OkStatus();
}

// log((a + 1) / b) from exact integers.
double StrongLoss(int64_t a, int64_t b) {
  if (a + 1 == b) return 0.0;
  return std::log(static_cast<double>(a + 1)) -
         std::log(static_cast<double>(b));
}

absl::StatusOr<DiscretePld> StrongViewJoint(const KrrParams& params) {
  const int64_t others = params.n - 1;
  const double g = params.gamma / params.k;
  // G2 | G1 = a ~ Bin(others - a, g / (1 - g)).
  const double g_cond = g / (1.0 - g);
  const double g_cond_c = (1.0 - 2.0 * g) / (1.0 - g);
  const double half_tau = params.tau / 2.0;

  const IntRange outer = HoeffdingWindow(others, g, half_tau);
  std::vector<IntRange> inner(outer.size());
  int64_t atoms = 0;
  for (int64_t a = outer.lo; a <= outer.hi; ++a) {
    IntRange r = HoeffdingWindow(others - a, g_cond, half_tau);
    r.lo = std::max<int64_t>(r.lo, 1);
    inner[a - outer.lo] = r;
    atoms += r.size();
  }
  if (absl::Status s = CheckAtomBudget(atoms, params.max_atoms); !s.ok()) {
    return s;
  }

  // P(G2 = 0) from the G2 marginal Bin(n - 1, g).
  const double infinity_mass =
      std::exp(static_cast<double>(others) * std::log1p(-g));

  // Dropped: G2 >= 1 with G1 outside `outer` or G2 outside its inner window.
  // The G2 = 0 mass is infinity_mass and never dropped; given G2 = 0,
  // G1 ~ Bin(n - 1, g / (1 - g)).
  std::vector<double> dropped(outer.size(), 0.0);
  std::vector<std::vector<LossAtom>> chunks(outer.size());
  ParallelFor(outer.size(), [&](int64_t d) {
    const int64_t a = outer.lo + d;
    const double log_a = LogBinomialPmf(others, a, g, 1.0 - g);
    const IntRange r = inner[d];
    const double g2_zero =
        std::pow(g_cond_c, static_cast<double>(others - a));
    dropped[d] = std::exp(log_a) *
                 Positive(BinomialOutsideMass(others - a, g_cond, g_cond_c, r) -
                          g2_zero);
    std::vector<LossAtom>& out = chunks[d];
    out.reserve(r.size());
    for (int64_t b = r.lo; b <= r.hi; ++b) {
      const double mass =
          std::exp(log_a + LogBinomialPmf(others - a, b, g_cond, g_cond_c));
      if (mass > 0.0) out.push_back({StrongLoss(a, b), mass});
    }
  });
  long double total_dropped = Positive(
      BinomialOutsideMass(others, g, 1.0 - g, outer) -
      infinity_mass *
          BinomialOutsideMass(others, g / (1.0 - g), g_cond_c, outer));
  for (double x : dropped) total_dropped += x;
  return Concatenate(chunks, infinity_mass, total_dropped);
}

absl::StatusOr<DiscretePld> StrongIndependent(const KrrParams& params) {
  const int64_t others = params.n - 1;
  const double g = params.gamma / params.k;
  const double half_tau = params.tau / 2.0;
  const IntRange r1 = HoeffdingWindow(others, g, half_tau);
  IntRange r2 = HoeffdingWindow(others, g, half_tau);
  r2.lo = std::max<int64_t>(r2.lo, 1);
  if (absl::Status s = CheckAtomBudget(r1.size() * r2.size(), params.max_atoms);
      !s.ok()) {
    return s;
  }
  std::vector<double> log_b(r2.size());
  for (int64_t b = r2.lo; b <= r2.hi; ++b) {
    log_b[b - r2.lo] = LogBinomialPmf(others, b, g, 1.0 - g);
  }
  std::vector<std::vector<LossAtom>> chunks(r1.size());
  ParallelFor(r1.size(), [&](int64_t d) {
    const int64_t a = r1.lo + d;
    const double log_a = LogBinomialPmf(others, a, g, 1.0 - g);
    std::vector<LossAtom>& out = chunks[d];
    out.reserve(r2.size());
    for (int64_t b = r2.lo; b <= r2.hi; ++b) {
      const double mass = std::exp(log_a + log_b[b - r2.lo]);
      if (mass > 0.0) out.push_back({StrongLoss(a, b), mass});
    }
  });
  const double infinity_mass =
      std::exp(static_cast<double>(others) * std::log1p(-g));
  const double g1_out = BinomialOutsideMass(others, g, 1.0 - g, r1);
  const double g2_out =
      Positive(BinomialOutsideMass(others, g, 1.0 - g, r2) - infinity_mass);
  const long double dropped =
      static_cast<long double>(g1_out) * (1.0L - infinity_mass) +
      static_cast<long double>(1.0 - g1_out) * g2_out;
  return Concatenate(chunks, infinity_mass, dropped);
}

// Final class-1/2 counts for one value of B, accumulated over the noise
// counts and the differing user's report. Row r holds N1 = n1_lo + r and
// columns N2 in [col_lo[r], col_lo[r] + mass[r].size()).
struct CountTable {
  int64_t n1_lo = 0;
  std::vector<int64_t> col_lo;
  std::vector<std::vector<double>> mass;

  void Add(int64_t n1, int64_t n2, double m) {
    const int64_t r = n1 - n1_lo;
    mass[r][n2 - col_lo[r]] += m;
  }
};

// Probabilities of the differing user's report under X (true class 1):
// class 1, class 2, or any other class.
struct ReportProbabilities {
  double class1;
  double class2;
  double other;
};

absl::StatusOr<DiscretePld> Weak(const KrrParams& params) {
  const int64_t others = params.n - 1;
  const int k = params.k;
  const double gamma = params.gamma;
  const double keep = 1.0 - gamma;
  const double g = gamma / k;
  const double third_tau = params.tau / 3.0;
  const bool joint = params.joint_model == JointModel::kViewJoint;
  const ReportProbabilities report{keep + g, g, gamma * (k - 2) / k};

  const IntRange b_range = HoeffdingWindow(others, gamma, third_tau);
  // Per-B windows on N1^B and N2^B (conditional on N1^B under the joint
  // model, where N2^B | N1^B ~ Bin(B - N1^B, 1 / (k - 1))).
  const double p2 = joint ? 1.0 / (k - 1) : 1.0 / k;
  int64_t atoms = 0;
  for (int64_t m = b_range.lo; m <= b_range.hi; ++m) {
    const IntRange r1 = HoeffdingWindow(m, 1.0 / k, third_tau);
    for (int64_t n1b = r1.lo; n1b <= r1.hi; ++n1b) {
      atoms += (joint ? HoeffdingWindow(m - n1b, p2, third_tau)
                      : HoeffdingWindow(m, p2, third_tau))
                   .size();
    }
  }
  if (absl::Status s = CheckAtomBudget(atoms, params.max_atoms); !s.ok()) {
    return s;
  }

  std::vector<double> dropped(b_range.size(), 0.0);
  std::vector<std::vector<LossAtom>> chunks(b_range.size());
  ParallelFor(b_range.size(), [&](int64_t d) {
    const int64_t m = b_range.lo + d;
    const double log_b = LogBinomialPmf(others, m, gamma, keep);
    const IntRange r1 = HoeffdingWindow(m, 1.0 / k, third_tau);
    auto n2_window = [&](int64_t n1b) {
      return joint ? HoeffdingWindow(m - n1b, p2, third_tau)
                   : HoeffdingWindow(m, p2, third_tau);
    };

    CountTable table;
    table.n1_lo = r1.lo;
    const int64_t rows = r1.size() + 1;
    table.col_lo.resize(rows);
    table.mass.resize(rows);
    for (int64_t r = 0; r < rows; ++r) {
      const int64_t n1 = r1.lo + r;
      int64_t lo = INT64_MAX;
      int64_t hi = INT64_MIN;
      if (r1.contains(n1)) {  // report not in class 1
        const IntRange w = n2_window(n1);
        lo = std::min(lo, w.lo);
        hi = std::max(hi, w.hi + 1);
      }
      if (r1.contains(n1 - 1)) {  // report in class 1
        const IntRange w = n2_window(n1 - 1);
        lo = std::min(lo, w.lo);
        // Under independent indicators a class-1 report may also count
        // towards class 2.
        hi = std::max(hi, joint ? w.hi : w.hi + 1);
      }
      table.col_lo[r] = lo;
      table.mass[r].assign(hi >= lo ? hi - lo + 1 : 0, 0.0);
    }

    long double noise_dropped =
        BinomialOutsideMass(m, 1.0 / k, 1.0 - 1.0 / k, r1);
    for (int64_t n1b = r1.lo; n1b <= r1.hi; ++n1b) {
      const double log_n1 = LogBinomialPmf(m, n1b, 1.0 / k, 1.0 - 1.0 / k);
      const IntRange w = n2_window(n1b);
      const double n2_out =
          joint ? BinomialOutsideMass(m - n1b, p2, 1.0 - p2, w)
                : BinomialOutsideMass(m, p2, 1.0 - p2, w);
      if (n2_out > 0.0) noise_dropped += std::exp(log_n1) * n2_out;
      for (int64_t n2b = w.lo; n2b <= w.hi; ++n2b) {
        const double log_n2 =
            joint ? LogBinomialPmf(m - n1b, n2b, p2, 1.0 - p2)
                  : LogBinomialPmf(m, n2b, p2, 1.0 - p2);
        const double base = std::exp(log_b + log_n1 + log_n2);
        if (base == 0.0) continue;
        if (joint) {
          table.Add(n1b + 1, n2b, base * report.class1);
          table.Add(n1b, n2b + 1, base * report.class2);
          if (report.other > 0.0) table.Add(n1b, n2b, base * report.other);
        } else {
          // The two indicator draws are independent in this reading.
          const double c1 = report.class1;
          const double c2 = report.class2;
          table.Add(n1b + 1, n2b + 1, base * c1 * c2);
          table.Add(n1b + 1, n2b, base * c1 * (1.0 - c2));
          table.Add(n1b, n2b + 1, base * (1.0 - c1) * c2);
          table.Add(n1b, n2b, base * (1.0 - c1) * (1.0 - c2));
        }
      }
    }

    dropped[d] = static_cast<double>(std::exp(log_b) * noise_dropped);

    const double blanket = g * static_cast<double>(m + 1);
    std::vector<LossAtom>& out = chunks[d];
    for (int64_t r = 0; r < rows; ++r) {
      const int64_t n1 = r1.lo + r;
      for (size_t c = 0; c < table.mass[r].size(); ++c) {
        const double mass = table.mass[r][c];
        if (mass <= 0.0) continue;
        const int64_t n2 = table.col_lo[r] + static_cast<int64_t>(c);
        const double loss =
            n1 == n2 ? 0.0
                     : std::log(keep * static_cast<double>(n1) + blanket) -
                           std::log(keep * static_cast<double>(n2) + blanket);
        out.push_back({loss, mass});
      }
    }
  });
  long double total_dropped = BinomialOutsideMass(others, gamma, keep, b_range);
  for (double x : dropped) total_dropped += x;
  return Concatenate(chunks, 0.0, total_dropped);
}

}  // namespace

absl::Status ValidateKrrParams(const KrrParams& params) {
  if (params.n < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("n must be >= 1, got %d", params.n));
  }
  if (params.k < 2) {
    return absl::InvalidArgumentError(
        absl::StrFormat("k must be >= 2, got %d", params.k));
  }
  if (!(params.gamma >= 0.0 && params.gamma <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("gamma must lie in [0, 1], got %g", params.gamma));
  }
  if (!(params.tau >= 0.0 && params.tau < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("tau must lie in [0, 1), got %g", params.tau));
  }
  return absl::OkStatus();
}

absl::StatusOr<double> BlanketJointMass(int64_t n, int k, double gamma,
                                        int64_t a, int64_t b) {
  KrrParams params;
  params.n = n;
  params.k = k;
  params.gamma = gamma;
  if (absl::Status s = ValidateKrrParams(params); !s.ok()) return s;
  if (a < 0 || b < 0 || a + b > n - 1) {
    return absl::OutOfRangeError(absl::StrFormat(
        "(a, b) = (%d, %d) outside the support a + b <= n - 1 = %d", a, b,
        n - 1));
  }
  const double g = gamma / k;
  if (g == 0.0) return a == 0 && b == 0 ? 1.0 : 0.0;
  return std::exp(
      LogBinomialPmf(n - 1, a, g, 1.0 - g) +
      LogBinomialPmf(n - 1 - a, b, g / (1.0 - g), (1.0 - 2.0 * g) / (1.0 - g)));
}

absl::StatusOr<DiscretePld> BuildKrrStrongPld(const KrrParams& params) {
  if (absl::Status s = ValidateKrrParams(params); !s.ok()) return s;
  if (params.gamma == 0.0 || params.n == 1) {
    // No blanket: the differing report is always identified.
    DiscretePld pld;
    pld.infinity_mass = 1.0;
    return pld;
  }
  return params.joint_model == JointModel::kViewJoint
             ? StrongViewJoint(params)
             : StrongIndependent(params);
}

absl::StatusOr<DiscretePld> BuildKrrWeakPld(const KrrParams& params) {
  if (absl::Status s = ValidateKrrParams(params); !s.ok()) return s;
  if (params.gamma == 0.0) {
    return absl::InvalidArgumentError(
        "the weak-adversary model needs gamma > 0 (the view ratio's "
        "denominator can vanish)");
  }
  return Weak(params);
}

absl::StatusOr<DiscretePld> BuildKrrPld(const KrrParams& params) {
  return params.adversary == Adversary::kStrong ? BuildKrrStrongPld(params)
                                                : BuildKrrWeakPld(params);
}

double BalleAnalyticGamma(int64_t n, int k, double epsilon, double delta) {
  const double others = static_cast<double>(n - 1);
  return std::max(14.0 * k * std::log(2.0 / delta) / (others * epsilon * epsilon),
                  27.0 * k / (others * epsilon));
}

absl::StatusOr<AnalyticEpsilon> BalleAnalyticEpsilon(int64_t n, int k,
                                                     double gamma,
                                                     double delta) {
  if (n < 2) return absl::InvalidArgumentError("analytic bound needs n >= 2");
  if (k < 2) return absl::InvalidArgumentError("k must be >= 2");
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    return absl::InvalidArgumentError("gamma must lie in (0, 1]");
  }
  if (!(delta > 0.0 && delta <= 1.0)) {
    return absl::InvalidArgumentError("delta must lie in (0, 1]");
  }
  const double scale = static_cast<double>(n - 1) * gamma;
  const double eps = std::max(std::sqrt(14.0 * k * std::log(2.0 / delta) / scale),
                              27.0 * k / scale);
  return AnalyticEpsilon{eps, eps <= 1.0};
}

std::string AdversaryName(Adversary adversary) {
  return adversary == Adversary::kStrong ? "strong" : "weak";
}

}  // namespace shuffle_dp
