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

#ifndef SHUFFLE_DP_PLD_H_
#define SHUFFLE_DP_PLD_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "absl/status/statusor.h"

namespace shuffle_dp {

// Which member of a dominating pair (P, Q) is the numerator of the loss
// log(P(o) / Q(o)).
enum class Direction {
  kNumOverDen,
  kDenOverNum,
};

// One point of a discrete privacy loss distribution. `loss` is in nats and
// always finite.
struct LossAtom {
  double loss = 0.0;
  double mass = 0.0;

  friend bool operator==(const LossAtom&, const LossAtom&) = default;
};

// A discrete privacy loss distribution.
//
// Mass of outcomes that are impossible under the denominator lives in
// `infinity_mass` rather than in an atom with infinite loss. Mass that a
// builder deliberately dropped (tail truncation) lives in `truncated_mass`.
// Accounting treats both ledgers as mass at +infinity, which only ever
// over-estimates delta.
struct DiscretePld {
  std::vector<LossAtom> atoms;
  double infinity_mass = 0.0;
  double truncated_mass = 0.0;
  Direction direction = Direction::kNumOverDen;

  double AtomMass() const;
  // Sum of atom masses plus both ledgers. Equals 1 for a well formed PLD.
  double TotalMass() const;
};

// Tolerance on |TotalMass() - 1| used by Validate().
inline constexpr double kMassTolerance = 1e-9;

struct Violation {
  // Index of the offending atom, or -1 for whole-distribution violations.
  long atom_index = -1;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string ToString() const;
};

// Checks every invariant of `pld` and reports all violations. Never fails.
ValidationReport Validate(const DiscretePld& pld);

// Merges atoms whose losses are chained by gaps of at most `loss_tolerance`
// (after sorting by loss). A merged atom carries the summed mass at the
// mass-weighted mean loss. With a zero tolerance only exactly equal losses
// merge. The output is sorted by loss and zero-mass atoms are dropped.
absl::StatusOr<DiscretePld> Coalesce(const DiscretePld& pld,
                                     double loss_tolerance);

// CSV export: header `loss,mass`, one atom per row, then the two ledger
// comment lines. Numbers use 17 significant digits so the file round-trips.
void WritePldCsv(const DiscretePld& pld, std::ostream& out);
absl::StatusOr<DiscretePld> ReadPldCsv(std::istream& in);

std::string DirectionName(Direction direction);

}  // namespace shuffle_dp

#endif  // SHUFFLE_DP_PLD_H_
