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

#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nmp/netsim.hpp"

namespace nmp::monitor {

struct DelaySample {
  std::string path_id;
  double t_s = 0.0;
  double rtt_ms = 0.0;
  double one_way_ms = 0.0;
};

struct MonitorConfig {
  double polling_period_s = 1.0;
  std::size_t window = 16;
  /// One-way delay is half the RTT (symmetric paths). When false the RTT
  /// itself is stored as the one-way figure.
  bool one_way_is_half_rtt = true;
  /// EWMA weight of the newest sample for current_delay(); unset means the
  /// latest sample is reported as-is.
  std::optional<double> ewma_alpha;
  int stale_after_periods = 3;

  void validate() const;
};

struct PathStats {
  std::string path_id;
  double latest_one_way_ms = 0.0;
  double smoothed_ms = 0.0;
  double jitter_ms = 0.0;
  double last_sample_time_s = 0.0;
  std::size_t sample_count = 0;
  std::deque<DelaySample> window;
};

/// A window of virtual time during which probes on one path are lost.
struct ProbeOutage {
  std::string path_id;
  double from_s = 0.0;
  double to_s = 0.0;  // exclusive
};

class Monitor {
 public:
  /// Error(kConfig) if a path is not valid in `topology` or repeats.
  Monitor(const net::Topology& topology, std::vector<net::Path> paths, MonitorConfig config = {},
          std::optional<net::NoiseModel> noise = std::nullopt);

  /// Probes every monitored path at t. Successive polls must sit on the
  /// cadence of the first one; anything else is Error(kInput).
  std::vector<DelaySample> poll(double t_s);

  /// Feeds an externally measured sample. Error(kNotFound) for unknown paths,
  /// Error(kInput) for negative RTT or time going backwards.
  void record(const std::string& path_id, double t_s, double rtt_ms);

  void add_outage(ProbeOutage outage);

  double current_delay(const std::string& path_id) const;
  double jitter(const std::string& path_id) const;
  bool jitter_ready(const std::string& path_id) const;
  bool has_samples(const std::string& path_id) const;
  bool is_stale(const std::string& path_id, double now_s) const;

  /// Least-squares line through the window's one-way delays, evaluated
  /// horizon_s past the newest sample. Falls back to current_delay() with
  /// fewer than two samples.
  double predicted_delay(const std::string& path_id, double horizon_s) const;

  const PathStats& stats(const std::string& path_id) const;
  const std::vector<net::Path>& paths() const noexcept { return paths_; }
  const MonitorConfig& config() const noexcept { return config_; }

  /// Links found clamped at zero delay during the most recent poll.
  const std::vector<std::pair<net::NodeId, net::NodeId>>& last_clamped_links() const noexcept {
    return last_clamped_;
  }

 private:
  PathStats& mutable_stats(const std::string& path_id);
  bool in_outage(const std::string& path_id, double t_s) const;

  const net::Topology* topology_;
  std::vector<net::Path> paths_;
  MonitorConfig config_;
  std::optional<net::NoiseModel> noise_;
  std::map<std::string, PathStats> stats_;
  std::vector<ProbeOutage> outages_;
  std::optional<double> first_poll_;
  std::optional<double> last_poll_;
  std::vector<std::pair<net::NodeId, net::NodeId>> last_clamped_;
};

}  // namespace nmp::monitor
