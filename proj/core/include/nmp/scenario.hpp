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

#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nmp/audio_model.hpp"
#include "nmp/controller.hpp"
#include "nmp/monitor.hpp"
#include "nmp/netsim.hpp"

namespace nmp::scenario {

struct EndpointSpec {
  std::string host;
  net::NodeId attach;
  std::string profile;  // endpoint_id to take from the profile source
  bool drop_acks = false;
};

struct Timeline {
  double start_s = 0.0;
  double path_request_s = 0.0;
  double transmission_start_s = 0.0;
  double end_s = 0.0;
};

struct NoiseSpec {
  double low_ms = 0.0;
  double high_ms = 0.0;
};

struct ScenarioConfig {
  std::string name;
  std::string session_id = "s1";
  std::uint64_t seed = 1;

  std::vector<net::NodeId> switches;
  std::vector<net::Link> links;
  EndpointSpec transmitter;
  EndpointSpec receiver;

  std::vector<std::string> paths;  // empty: enumerate with hop_limit
  int hop_limit = 4;

  /// Resolved profiles, already renamed to the endpoint host ids.
  audio::AudioProfile tx_profile;
  audio::AudioProfile rx_profile;
  std::vector<audio::AudioMode> modes;  // empty: default quality order

  double max_delay_ms = 25.0;
  double max_jitter_ms = std::numeric_limits<double>::infinity();

  sdn::ControllerConfig controller;
  monitor::MonitorConfig monitor;
  std::vector<monitor::ProbeOutage> outages;
  std::optional<NoiseSpec> noise;
  Timeline timeline;
};

/// Parses a JSON scenario. Relative profile paths resolve against
/// `base_dir`. Every problem is Error(kConfig) naming the offending field.
ScenarioConfig parse_config(std::string_view text, const std::string& source,
                            const std::string& base_dir);
ScenarioConfig load_config(const std::string& path);

struct TimeseriesRow {
  double t_s = 0.0;
  std::vector<std::optional<double>> delays_ms;  // aligned with RunResult::path_ids
  std::string current_path = "-";
  std::string mode = "-";
  std::optional<double> total_blocking_ms;
  std::optional<double> e2e_ms;
  std::vector<int> event_ids;
  bool streaming = false;
};

struct MonitorRow {
  double t_s = 0.0;
  std::string path_id;
  double rtt_ms = 0.0;
  double one_way_ms = 0.0;
  std::optional<double> jitter_ms;
};

struct RunResult {
  std::vector<std::string> path_ids;
  std::vector<sdn::EventRecord> events;
  std::vector<TimeseriesRow> timeseries;
  std::vector<MonitorRow> monitor;
  std::vector<std::string> transcript;
  std::vector<std::string> warnings;  // raised before a session existed
  std::optional<std::string> rejection;

  std::optional<audio::AudioMode> initial_mode;
  std::optional<audio::AudioMode> final_mode;
  std::optional<double> final_network_ms;
  std::optional<double> final_e2e_ms;
  /// End-of-run e2e had the initial mode been kept.
  std::optional<double> counterfactual_e2e_ms;
  std::optional<double> gain_percent;

  bool best_effort() const;
  /// 0 success, 1 rejected or best effort reached.
  int exit_code() const;
};

/// Error(kConfig) for configurations that fail to assemble.
RunResult run_scenario(const ScenarioConfig& config);

std::string events_csv(const RunResult& result);
std::string timeseries_csv(const RunResult& result);
std::string monitor_csv(const RunResult& result);
std::string transcript_jsonl(const RunResult& result);
std::string report_text(const ScenarioConfig& config, const RunResult& result);

/// Writes events.csv, timeseries.csv, monitor.csv, transcript.jsonl and
/// report.txt into `dir`, creating it if needed.
void write_outputs(const ScenarioConfig& config, const RunResult& result, const std::string& dir);

/// Theoretical blocking delay grid, one row per frame size, one column
/// per sampling rate. Error(kInput) for non-positive rates or frames.
std::string profile_table(std::span<const int> rates, std::span<const int> frames, double d0_ms);

inline constexpr int kExitOk = 0;
inline constexpr int kExitDegraded = 1;
inline constexpr int kExitConfig = 2;

}  // namespace nmp::scenario
