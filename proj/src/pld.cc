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

#include "shuffle_dp/pld.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "absl/status/status.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"

namespace shuffle_dp {

double DiscretePld::AtomMass() const {
  long double sum = 0.0L;
  for (const LossAtom& atom : atoms) sum += atom.mass;
  return static_cast<double>(sum);
}

double DiscretePld::TotalMass() const {
  return AtomMass() + infinity_mass + truncated_mass;
}

std::string ValidationReport::ToString() const {
  if (ok()) return "ok";
  std::string out;
  for (const Violation& v : violations) {
    if (!out.empty()) out += "; ";
    if (v.atom_index >= 0) absl::StrAppend(&out, "atom ", v.atom_index, ": ");
    out += v.message;
  }
  return out;
}

ValidationReport Validate(const DiscretePld& pld) {
  ValidationReport report;
  for (size_t i = 0; i < pld.atoms.size(); ++i) {
    const LossAtom& atom = pld.atoms[i];
    const long index = static_cast<long>(i);
    if (!std::isfinite(atom.loss)) {
      report.violations.push_back(
          {index, absl::StrFormat("non-finite loss in atoms (%g)", atom.loss)});
    }
    if (!(atom.mass >= 0.0) || !std::isfinite(atom.mass)) {
      report.violations.push_back(
          {index, absl::StrFormat("negative or non-finite mass %g", atom.mass)});
    }
  }
  auto check_ledger = [&report](double value, const char* name) {
    if (!(value >= 0.0 && value <= 1.0)) {
      report.violations.push_back(
          {-1, absl::StrFormat("%s %g outside [0, 1]", name, value)});
    }
  };
  check_ledger(pld.infinity_mass, "infinity_mass");
  check_ledger(pld.truncated_mass, "truncated_mass");
  const double total = pld.TotalMass();
  if (!(std::abs(total - 1.0) <= kMassTolerance)) {
    report.violations.push_back(
        {-1, absl::StrFormat("total mass %.17g", total)});
  }
  return report;
}

absl::StatusOr<DiscretePld> Coalesce(const DiscretePld& pld,
                                     double loss_tolerance) {
  if (!(loss_tolerance >= 0.0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "loss_tolerance must be nonnegative, got %g", loss_tolerance));
  }
  std::vector<LossAtom> sorted = pld.atoms;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const LossAtom& a, const LossAtom& b) {
                     return a.loss < b.loss;
                   });

  DiscretePld out;
  out.infinity_mass = pld.infinity_mass;
  out.truncated_mass = pld.truncated_mass;
  out.direction = pld.direction;
  out.atoms.reserve(sorted.size());

  size_t begin = 0;
  while (begin < sorted.size()) {
    size_t end = begin + 1;
    while (end < sorted.size() &&
           sorted[end].loss - sorted[end - 1].loss <= loss_tolerance) {
      ++end;
    }
    long double mass = 0.0L;
    long double weighted = 0.0L;
    for (size_t i = begin; i < end; ++i) {
      mass += sorted[i].mass;
      weighted += static_cast<long double>(sorted[i].mass) * sorted[i].loss;
    }
    if (mass > 0.0L) {
      // A single atom keeps its loss bit for bit.
      const double loss = end - begin == 1
                              ? sorted[begin].loss
                              : static_cast<double>(weighted / mass);
      out.atoms.push_back({loss, static_cast<double>(mass)});
    }
    begin = end;
  }
  return out;
}

void WritePldCsv(const DiscretePld& pld, std::ostream& out) {
  out << "loss,mass\n";
  for (const LossAtom& atom : pld.atoms) {
    out << absl::StrFormat("%.17g,%.17g\n", atom.loss, atom.mass);
  }
  out << absl::StrFormat("# infinity_mass=%.17g\n", pld.infinity_mass);
  out << absl::StrFormat("# truncated_mass=%.17g\n", pld.truncated_mass);
}

absl::StatusOr<DiscretePld> ReadPldCsv(std::istream& in) {
  DiscretePld pld;
  std::string line;
  if (!std::getline(in, line) || absl::StripAsciiWhitespace(line) != "loss,mass") {
    return absl::InvalidArgumentError("missing `loss,mass` header");
  }
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    absl::string_view view = absl::StripAsciiWhitespace(line);
    if (view.empty()) continue;
    if (absl::ConsumePrefix(&view, "#")) {
      view = absl::StripAsciiWhitespace(view);
      double* target = nullptr;
      if (absl::ConsumePrefix(&view, "infinity_mass=")) {
        target = &pld.infinity_mass;
      } else if (absl::ConsumePrefix(&view, "truncated_mass=")) {
        target = &pld.truncated_mass;
      }
      if (target != nullptr && !absl::SimpleAtod(view, target)) {
        return absl::InvalidArgumentError(
            absl::StrFormat("line %d: bad ledger value", line_number));
      }
      continue;
    }
    std::vector<absl::string_view> fields = absl::StrSplit(view, ',');
    LossAtom atom;
    if (fields.size() != 2 || !absl::SimpleAtod(fields[0], &atom.loss) ||
        !absl::SimpleAtod(fields[1], &atom.mass)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("line %d: expected `loss,mass`", line_number));
    }
    pld.atoms.push_back(atom);
  }
  return pld;
}

std::string DirectionName(Direction direction) {
  switch (direction) {
    case Direction::kNumOverDen:
      return "num-over-den";
    case Direction::kDenOverNum:
      return "den-over-num";
  }
  return "unknown";
}

}  // namespace shuffle_dp
