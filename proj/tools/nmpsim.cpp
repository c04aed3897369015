// Copyright 2026 The nmp-sdn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nmp/error.hpp"
#include "nmp/geo_feasibility.hpp"
#include "nmp/scenario.hpp"

namespace {

using nmp::Error;
using nmp::ErrorKind;
namespace sc = nmp::scenario;

struct RunArgs {
  std::string scenario;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

struct ProfileArgs {
  std::vector<int> rates{48000};
  std::vector<int> frames{2048, 1024, 512, 256, 128, 64};
  double d0 = 0.0;
};

struct FeasibilityArgs {
  std::string cities;
  std::string src;
  std::string dst;
  std::string measurements;
  double ept = 25.0;
};

int run_command(const RunArgs& a) {
  auto cfg = sc::load_config(a.scenario);
  if (a.seed) cfg.seed = *a.seed;
  const auto result = sc::run_scenario(cfg);
  if (!a.out_dir.empty()) sc::write_outputs(cfg, result, a.out_dir);
  std::cout << sc::report_text(cfg, result);
  return result.exit_code();
}

int profile_command(const ProfileArgs& a) {
  for (int r : a.rates) {
    if (r <= 0) nmp::fail(ErrorKind::kInput, "sampling rates must be positive");
  }
  for (int f : a.frames) {
    if (f <= 0) nmp::fail(ErrorKind::kInput, "frame sizes must be positive");
  }
  if (a.d0 < 0) nmp::fail(ErrorKind::kInput, "--d0 must be >= 0");
  std::cout << sc::profile_table(a.rates, a.frames, a.d0);
  return sc::kExitOk;
}

int feasibility_command(const FeasibilityArgs& a) {
  namespace geo = nmp::geo;
  const auto cities = geo::load_cities(a.cities);
  auto relays = geo::enumerate_relays(cities, a.src, a.dst, a.ept);

  std::optional<std::vector<geo::LatencyRecord>> records;
  if (!a.measurements.empty()) {
    if (std::filesystem::exists(a.measurements)) {
      records = geo::load_latency_records(a.measurements);
    } else {
      std::cerr << "nmpsim: measurements file " << a.measurements
                << " not found; reporting distances only\n";
    }
  }

  if (!records) {
    std::cout << geo::render_report(relays, a.ept);
    return relays.empty() ? sc::kExitDegraded : sc::kExitOk;
  }
  relays = geo::restrict_to_measured(std::move(relays), *records);
  std::map<std::string, geo::LatencyStats> stats;
  std::map<std::string, std::string> errors;
  for (const auto& p : relays) {
    try {
      stats[p.path_id] = geo::path_latency_stats(*records, p);
    } catch (const Error& e) {
      errors[p.path_id] = e.what();
    }
  }
  std::cout << geo::render_report(relays, a.ept, &stats, &errors);
  return relays.empty() ? sc::kExitDegraded : sc::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Networked music performance session simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run a scenario and write its event log and time series");
  run->add_option("scenario", run_args.scenario, "Scenario file (JSON)")->required();
  run->add_option("--out-dir", run_args.out_dir, "Directory for CSV, transcript and report output");
  run->add_option("--seed", run_args.seed, "Override the scenario's noise seed");

  ProfileArgs profile_args;
  auto* profile = app.add_subcommand("profile", "Print theoretical blocking delays for a mode grid");
  profile->add_option("--rates", profile_args.rates, "Sampling rates in Hz")->delimiter(',');
  profile->add_option("--frames", profile_args.frames, "Frame sizes in samples")->delimiter(',');
  profile->add_option("--d0", profile_args.d0, "Constant hardware delay in ms");

  FeasibilityArgs feas_args;
  auto* feas = app.add_subcommand("feasibility", "List relay cities that keep a city pair under the EPT");
  feas->add_option("--cities", feas_args.cities, "City coordinates CSV")->required();
  feas->add_option("--src", feas_args.src, "Source city")->required();
  feas->add_option("--dst", feas_args.dst, "Destination city")->required();
  feas->add_option("--measurements", feas_args.measurements, "Latency records (CSV or JSON)");
  feas->add_option("--ept", feas_args.ept, "Delay budget in ms");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : sc::kExitConfig;
  }

  try {
    if (*run) return run_command(run_args);
    if (*profile) return profile_command(profile_args);
    if (*feas) return feasibility_command(feas_args);
  } catch (const Error& e) {
    std::cerr << "nmpsim: " << e.what() << "\n";
    return e.kind() == ErrorKind::kRejected ? sc::kExitDegraded : sc::kExitConfig;
  }
  return sc::kExitConfig;
}
