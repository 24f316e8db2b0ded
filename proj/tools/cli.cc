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

#include "cli.h"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "json.hpp"
#include "shuffle_dp/accountant.h"
#include "shuffle_dp/clones.h"
#include "shuffle_dp/krr.h"
#include "shuffle_dp/oracles.h"
#include "shuffle_dp/pld.h"

namespace shuffle_dp {
namespace {

struct Options {
  std::string mechanism;
  int64_t n = 0;
  double eps0 = 1.0;
  double tau = 1e-12;
  double subsample_ratio = 1.0;
  std::string rounding = "nearest";
  int k = 2;
  double gamma = 0.5;
  std::string adversary = "strong";
  std::string joint = "view-joint";
  std::string direction = "max";
  std::vector<std::string> compose;

  double half_width = 20.0;
  double grid_size = 1e7;
  int64_t n_c = 1;
  // Empty selects the mechanism default: tail-probability for krr,
  // hockey-stick otherwise.
  std::string form;
  std::vector<double> eps;
  std::optional<double> delta;
  double eps_min = 0.0;
  double eps_max = 5.0;
  int64_t eps_steps = 51;

  double sigma = 2.0;
  int64_t samples = 1'000'000;
  uint64_t seed = 0;

  std::string format = "csv";
  std::string output;
};

struct Record {
  double eps = 0.0;
  double delta = 0.0;
  int64_t n_c = 1;
  std::string mechanism;
  std::string adversary;
  std::string direction;
  std::optional<double> std_error;
};

// count_i copies of plds[i], for one direction of the pair.
struct Composition {
  std::vector<DiscretePld> plds;
  std::vector<int64_t> counts;
};

int ExitCodeFor(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kOk:
      return kExitOk;
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kFailedPrecondition:
    case absl::StatusCode::kResourceExhausted:
      return kExitValidation;
    case absl::StatusCode::kOutOfRange:
      return kExitRange;
    default:
      return kExitInternal;
  }
}

void AddMechanismOptions(CLI::App* app, Options& o, bool subsampled) {
  app->add_option("--n", o.n, "Number of users");
  app->add_option("--eps0", o.eps0, "Local randomiser epsilon (clones)");
  app->add_option("--tau", o.tau, "Truncation budget, 0 disables")
      ->capture_default_str();
  app->add_option("--k", o.k, "Domain size (krr)");
  app->add_option("--gamma", o.gamma, "Randomisation probability (krr)");
  app->add_option("--adversary", o.adversary)
      ->check(CLI::IsMember({"strong", "weak"}))
      ->capture_default_str();
  app->add_option("--joint", o.joint, "Blanket count model (krr)")
      ->check(CLI::IsMember({"view-joint", "independent"}))
      ->capture_default_str();
  if (subsampled) {
    app->add_option("--subsample-ratio", o.subsample_ratio)
        ->capture_default_str();
    app->add_option("--rounding", o.rounding)
        ->check(CLI::IsMember({"nearest", "floor"}))
        ->capture_default_str();
  }
}

void AddAccountantOptions(CLI::App* app, Options& o) {
  app->add_option("--L", o.half_width, "Grid half width")
      ->capture_default_str();
  app->add_option("--m", o.grid_size,
                  "Grid size, rounded up to a power of two")
      ->capture_default_str();
  app->add_option("--form", o.form,
                  "Integral form; krr defaults to tail-probability, others "
                  "to hockey-stick")
      ->check(CLI::IsMember({"hockey-stick", "tail-probability"}));
  app->add_option("--direction", o.direction)
      ->check(CLI::IsMember({"num-over-den", "den-over-num", "max"}))
      ->capture_default_str();
  app->add_option("--format", o.format)
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app->add_option("--output", o.output, "Output file, default stdout");
}

void AddCompositionOptions(CLI::App* app, Options& o) {
  app->add_option("--nc", o.n_c, "Number of composed rounds")
      ->capture_default_str();
}

void AddQueryOptions(CLI::App* app, Options& o) {
  app->add_option("--eps", o.eps, "Epsilon values to evaluate delta at");
  app->add_option("--delta", o.delta, "Target delta to solve epsilon for");
}

absl::StatusOr<Direction> ParseDirection(const std::string& name) {
  if (name == "num-over-den") return Direction::kNumOverDen;
  if (name == "den-over-num") return Direction::kDenOverNum;
  return absl::InvalidArgumentError("a single direction is required here");
}

std::vector<Direction> Directions(const std::string& name) {
  if (name == "max") return {Direction::kNumOverDen, Direction::kDenOverNum};
  return {*ParseDirection(name)};
}

IntegralForm ParseForm(const std::string& name, const std::string& mechanism) {
  if (name.empty()) {
    return mechanism == "krr" ? IntegralForm::kTailProbability
                              : IntegralForm::kHockeyStick;
  }
  return name == "tail-probability" ? IntegralForm::kTailProbability
                                    : IntegralForm::kHockeyStick;
}

// Parses "n:eps0:count".
absl::StatusOr<std::pair<ClonesParams, int64_t>> ParseComposeItem(
    const std::string& item, const Options& o) {
  std::vector<std::string> parts = absl::StrSplit(item, ':');
  ClonesParams params;
  params.tau = o.tau;
  int64_t count = 0;
  if (parts.size() != 3 || !absl::SimpleAtoi(parts[0], &params.n) ||
      !absl::SimpleAtod(parts[1], &params.eps0) ||
      !absl::SimpleAtoi(parts[2], &count)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "--compose expects n:eps0:count, got \"%s\"", item));
  }
  if (count < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("--compose count must be >= 1, got %d", count));
  }
  return std::make_pair(params, count);
}

absl::StatusOr<DiscretePld> BuildSingle(const std::string& mechanism,
                                        const Options& o, Direction direction) {
  if (mechanism == "clones" || mechanism == "clones-subsampled") {
    ClonesParams params;
    params.n = o.n;
    params.eps0 = o.eps0;
    params.tau = o.tau;
    params.direction = direction;
    if (mechanism == "clones") return BuildClonesPld(params);
    params.subsample_ratio = o.subsample_ratio;
    params.rounding = o.rounding == "floor" ? PopulationRounding::kFloor
                                            : PopulationRounding::kNearest;
    return BuildSubsampledClonesPld(params);
  }
  KrrParams params;
  params.n = o.n;
  params.k = o.k;
  params.gamma = o.gamma;
  params.tau = o.tau;
  params.adversary =
      o.adversary == "weak" ? Adversary::kWeak : Adversary::kStrong;
  params.joint_model = o.joint == "independent"
                           ? JointModel::kIndependentMarginals
                           : JointModel::kViewJoint;
  return BuildKrrPld(params);
}

absl::StatusOr<std::vector<Composition>> BuildCompositions(
    const std::string& mechanism, const Options& o) {
  if (o.n_c < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("--nc must be >= 1, got %d", o.n_c));
  }
  if (!o.compose.empty() && mechanism != "clones") {
    return absl::InvalidArgumentError("--compose is only supported for clones");
  }
  // The k-RR pair is symmetric under exchanging the two classes, so one
  // direction covers both.
  std::vector<Direction> directions = Directions(o.direction);
  if (mechanism == "krr") directions.resize(1);

  std::vector<Composition> out;
  for (Direction direction : directions) {
    Composition c;
    if (o.compose.empty()) {
      absl::StatusOr<DiscretePld> pld = BuildSingle(mechanism, o, direction);
      if (!pld.ok()) return pld.status();
      c.plds.push_back(*std::move(pld));
      c.counts.push_back(o.n_c);
    } else {
      for (const std::string& item : o.compose) {
        absl::StatusOr<std::pair<ClonesParams, int64_t>> parsed =
            ParseComposeItem(item, o);
        if (!parsed.ok()) return parsed.status();
        parsed->first.direction = direction;
        absl::StatusOr<DiscretePld> pld = BuildClonesPld(parsed->first);
        if (!pld.ok()) return pld.status();
        c.plds.push_back(*std::move(pld));
        c.counts.push_back(parsed->second);
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

absl::StatusOr<AccountantConfig> MakeConfig(const Options& o,
                                            std::ostream& err) {
  if (!(o.grid_size >= 2.0) || !(o.grid_size <= std::ldexp(1.0, 30))) {
    return absl::InvalidArgumentError(
        absl::StrFormat("--m must lie in [2, 2^30], got %g", o.grid_size));
  }
  AccountantConfig config;
  config.half_width = o.half_width;
  config.grid_size = RoundUpGridSize(o.grid_size);
  if (absl::Status s = ValidateConfig(config); !s.ok()) return s;
  err << absl::StrFormat("grid: m=%d dx=%.6g L=%g\n", config.grid_size,
                         config.spacing(), config.half_width);
  return config;
}

absl::StatusOr<std::vector<ComposedDensity>> ComposeAll(
    const std::vector<Composition>& compositions,
    const AccountantConfig& config, std::ostream& err) {
  std::vector<ComposedDensity> densities;
  for (const Composition& c : compositions) {
    std::vector<CompositionEntry> entries;
    for (size_t i = 0; i < c.plds.size(); ++i) {
      entries.push_back({&c.plds[i], c.counts[i]});
    }
    absl::StatusOr<ComposedDensity> density = Compose(entries, config);
    if (!density.ok()) return density.status();
    if (density->wrap_warning()) {
      err << "warning: " << *density->wrap_warning() << "\n";
    }
    densities.push_back(*std::move(density));
  }
  return densities;
}

void EmitRecords(const std::vector<Record>& records, const Options& o,
                 std::ostream& out) {
  if (o.format == "json") {
    nlohmann::ordered_json array = nlohmann::ordered_json::array();
    for (const Record& r : records) {
      nlohmann::ordered_json j;
      j["eps"] = r.eps;
      j["delta"] = r.delta;
      j["n_c"] = r.n_c;
      j["mechanism"] = r.mechanism;
      j["adversary"] = r.adversary;
      j["direction"] = r.direction;
      if (r.std_error) j["std_error"] = *r.std_error;
      array.push_back(std::move(j));
    }
    out << array.dump(2) << "\n";
    return;
  }
  out << "eps,delta,n_c,mechanism,adversary,direction\n";
  for (const Record& r : records) {
    out << absl::StrFormat("%.12g,%.17g,%d,%s,%s,%s\n", r.eps, r.delta, r.n_c,
                           r.mechanism, r.adversary, r.direction);
  }
}

// Builds, composes and evaluates one accounting query.
absl::StatusOr<std::vector<Record>> RunAccounting(const std::string& mechanism,
                                                  const Options& o,
                                                  std::vector<double> eps_grid,
                                                  std::ostream& err) {
  if (eps_grid.empty() == !o.delta.has_value()) {
    return absl::InvalidArgumentError(
        "give exactly one of --eps (one or more values) and --delta");
  }
  absl::StatusOr<AccountantConfig> config = MakeConfig(o, err);
  if (!config.ok()) return config.status();
  absl::StatusOr<std::vector<Composition>> compositions =
      BuildCompositions(mechanism, o);
  if (!compositions.ok()) return compositions.status();
  absl::StatusOr<std::vector<ComposedDensity>> densities =
      ComposeAll(*compositions, *config, err);
  if (!densities.ok()) return densities.status();

  std::vector<const ComposedDensity*> pointers;
  for (const ComposedDensity& d : *densities) pointers.push_back(&d);
  const IntegralForm form = ParseForm(o.form, mechanism);

  Record base;
  base.n_c = 0;
  for (int64_t count : compositions->front().counts) base.n_c += count;
  base.mechanism = mechanism;
  base.adversary = mechanism == "krr" ? o.adversary : "none";
  base.direction = o.direction;

  std::vector<Record> records;
  if (o.delta) {
    absl::StatusOr<double> eps = EpsilonForDelta(pointers, *o.delta, form);
    if (!eps.ok()) return eps.status();
    Record r = base;
    r.eps = *eps;
    r.delta = *o.delta;
    records.push_back(r);
    return records;
  }
  for (double eps : eps_grid) {
    if (!std::isfinite(eps)) {
      return absl::InvalidArgumentError("--eps values must be finite");
    }
    Record r = base;
    r.eps = eps;
    for (const ComposedDensity* d : pointers) {
      r.delta = std::max(r.delta, d->DeltaAt(eps, form));
    }
    records.push_back(r);
  }
  return records;
}

absl::StatusOr<std::vector<Record>> RunGaussianMc(const Options& o) {
  if (o.eps.empty()) return absl::InvalidArgumentError("--eps is required");
  std::vector<Record> records;
  for (double eps : o.eps) {
    absl::StatusOr<McEstimate> mc =
        GaussianShuffleMc(o.n, o.sigma, eps, o.samples, o.seed);
    if (!mc.ok()) return mc.status();
    Record r;
    r.eps = eps;
    r.delta = mc->estimate;
    r.n_c = 1;
    r.mechanism = "gaussian-mc";
    r.adversary = "none";
    r.direction = "x-prime-over-x";
    r.std_error = mc->std_error;
    records.push_back(r);
  }
  return records;
}

std::vector<double> SweepGrid(const Options& o) {
  std::vector<double> grid;
  if (o.eps_steps == 1) return {o.eps_min};
  for (int64_t i = 0; i < o.eps_steps; ++i) {
    grid.push_back(o.eps_min + (o.eps_max - o.eps_min) *
                                   static_cast<double>(i) /
                                   static_cast<double>(o.eps_steps - 1));
  }
  return grid;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  Options o;
  CLI::App app("Privacy accountant for shuffled mechanisms", "shuffle_acct");
  app.require_subcommand(1);

  CLI::App* clones = app.add_subcommand("clones", "Shuffled eps0-LDP randomisers");
  AddMechanismOptions(clones, o, false);
  AddAccountantOptions(clones, o);
  AddCompositionOptions(clones, o);
  AddQueryOptions(clones, o);
  clones->add_option("--compose", o.compose,
                     "Heterogeneous rounds as n:eps0:count (replaces --n, "
                     "--eps0 and --nc)");

  CLI::App* subsampled = app.add_subcommand(
      "clones-subsampled", "Shuffled eps0-LDP randomisers with subsampling");
  AddMechanismOptions(subsampled, o, true);
  AddAccountantOptions(subsampled, o);
  AddCompositionOptions(subsampled, o);
  AddQueryOptions(subsampled, o);

  CLI::App* krr = app.add_subcommand("krr", "Shuffled k-ary randomised response");
  AddMechanismOptions(krr, o, false);
  AddAccountantOptions(krr, o);
  AddCompositionOptions(krr, o);
  AddQueryOptions(krr, o);

  CLI::App* mc = app.add_subcommand(
      "gaussian-mc", "Monte Carlo delta of the shuffled Gaussian mechanism");
  mc->add_option("--n", o.n)->required();
  mc->add_option("--sigma", o.sigma)->capture_default_str();
  mc->add_option("--eps", o.eps)->required();
  mc->add_option("--samples", o.samples)->capture_default_str();
  mc->add_option("--seed", o.seed)->capture_default_str();
  mc->add_option("--format", o.format)
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  mc->add_option("--output", o.output);

  CLI::App* sweep = app.add_subcommand("sweep", "delta over an epsilon grid");
  sweep->add_option("--mechanism", o.mechanism)
      ->required()
      ->check(CLI::IsMember({"clones", "clones-subsampled", "krr"}));
  AddMechanismOptions(sweep, o, true);
  AddAccountantOptions(sweep, o);
  AddCompositionOptions(sweep, o);
  sweep->add_option("--eps-min", o.eps_min)->capture_default_str();
  sweep->add_option("--eps-max", o.eps_max)->capture_default_str();
  sweep->add_option("--eps-steps", o.eps_steps)->capture_default_str();

  CLI::App* export_pld =
      app.add_subcommand("export-pld", "Write a PLD as loss,mass CSV");
  export_pld->add_option("--mechanism", o.mechanism)
      ->required()
      ->check(CLI::IsMember({"clones", "clones-subsampled", "krr"}));
  AddMechanismOptions(export_pld, o, true);
  export_pld->add_option("--direction", o.direction,
                         "PLD direction, default num-over-den")
      ->check(CLI::IsMember({"num-over-den", "den-over-num"}));
  export_pld->add_option("--output", o.output);

  std::vector<std::string> argv_storage = {"shuffle_acct"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& s : argv_storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  std::unique_ptr<std::ofstream> file;
  std::ostream* sink = &out;
  if (!o.output.empty()) {
    file = std::make_unique<std::ofstream>(o.output);
    if (!*file) {
      err << "error: cannot open " << o.output << " for writing\n";
      return kExitInternal;
    }
    sink = file.get();
  }

  absl::StatusOr<std::vector<Record>> records;
  if (export_pld->parsed()) {
    if (o.direction == "max") o.direction = "num-over-den";
    absl::StatusOr<DiscretePld> pld =
        BuildSingle(o.mechanism, o, *ParseDirection(o.direction));
    if (!pld.ok()) {
      err << "error: " << pld.status().message() << "\n";
      return ExitCodeFor(pld.status());
    }
    WritePldCsv(*pld, *sink);
    return kExitOk;
  } else if (mc->parsed()) {
    records = RunGaussianMc(o);
  } else if (sweep->parsed()) {
    if (o.eps_steps < 1 || !(o.eps_min <= o.eps_max)) {
      err << "error: sweep needs --eps-steps >= 1 and --eps-min <= --eps-max\n";
      return kExitValidation;
    }
    records = RunAccounting(o.mechanism, o, SweepGrid(o), err);
  } else {
    const std::string mechanism = clones->parsed()       ? "clones"
                                  : subsampled->parsed() ? "clones-subsampled"
                                                         : "krr";
    if (!clones->parsed() && !o.compose.empty()) {
      err << "error: --compose is only supported for clones\n";
      return kExitValidation;
    }
    records = RunAccounting(mechanism, o, o.eps, err);
  }
  if (!records.ok()) {
    err << "error: " << records.status().message() << "\n";
    return ExitCodeFor(records.status());
  }
  if (mc->parsed()) {
    for (const Record& r : *records) {
      err << absl::StrFormat("eps=%g estimate=%.6g std_error=%.3g\n", r.eps,
                             r.delta, *r.std_error);
    }
  }
  EmitRecords(*records, o, *sink);
  return kExitOk;
}

}  // namespace shuffle_dp
