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

#include "nmp/monitor.hpp"

#include <algorithm>
#include <cmath>

#include "nmp/error.hpp"

namespace nmp::monitor {

namespace {

constexpr double kJitterGain = 1.0 / 16.0;
constexpr double kCadenceTolerance = 1e-6;

}  // namespace

void MonitorConfig::validate() const {
  if (!(polling_period_s > 0.0)) fail(ErrorKind::kConfig, "monitor: polling_period_s must be > 0");
  if (window == 0) fail(ErrorKind::kConfig, "monitor: window must be >= 1");
  if (ewma_alpha && !(*ewma_alpha > 0.0 && *ewma_alpha <= 1.0)) {
    fail(ErrorKind::kConfig, "monitor: ewma_alpha must lie in (0, 1]");
  }
  if (stale_after_periods < 1) fail(ErrorKind::kConfig, "monitor: stale_after_periods must be >= 1");
}

Monitor::Monitor(const net::Topology& topology, std::vector<net::Path> paths,
                 MonitorConfig config, std::optional<net::NoiseModel> noise)
    : topology_(&topology),
      paths_(std::move(paths)),
      config_(config),
      noise_(std::move(noise)) {
  config_.validate();
  for (const auto& p : paths_) {
    try {
      net::validate_path(topology, p);
    } catch (const Error& e) {
      fail(ErrorKind::kConfig, std::string("monitor: ") + e.what());
    }
    if (stats_.count(p.id)) fail(ErrorKind::kConfig, "monitor: path listed twice: " + p.id);
    stats_[p.id].path_id = p.id;
  }
}

std::vector<DelaySample> Monitor::poll(double t) {
  if (first_poll_) {
    const double k = (t - *first_poll_) / config_.polling_period_s;
    if (!(t > *last_poll_) || std::abs(k - std::round(k)) > kCadenceTolerance) {
      fail(ErrorKind::kInput, "monitor: poll at t=" + std::to_string(t) +
                                  " is off the polling cadence");
    }
  } else {
    first_poll_ = t;
  }
  last_poll_ = t;
  last_clamped_.clear();

  std::vector<DelaySample> out;
  out.reserve(paths_.size());
  for (const auto& p : paths_) {
    if (in_outage(p.id, t)) continue;
    const auto detail = net::path_delay_detail(*topology_, p, t);
    for (const auto& l : detail.clamped_links) {
      if (std::find(last_clamped_.begin(), last_clamped_.end(), l) == last_clamped_.end()) {
        last_clamped_.push_back(l);
      }
    }
    double rtt = 2.0 * detail.ms;
    if (noise_) rtt = std::max(0.0, rtt + noise_->draw());
    record(p.id, t, rtt);
    out.push_back(stats_.at(p.id).window.back());
  }
  return out;
}

void Monitor::record(const std::string& path_id, double t, double rtt_ms) {
  if (!(rtt_ms >= 0.0) || !std::isfinite(rtt_ms)) {
    fail(ErrorKind::kInput, "monitor: RTT must be finite and >= 0");
  }
  auto& s = mutable_stats(path_id);
  if (s.sample_count > 0 && t < s.last_sample_time_s) {
    fail(ErrorKind::kInput, "monitor: sample time moved backwards on " + path_id);
  }
  const double one_way = config_.one_way_is_half_rtt ? rtt_ms / 2.0 : rtt_ms;
  if (s.sample_count > 0) {
    const double d = std::abs(one_way - s.latest_one_way_ms);
    s.jitter_ms += (d - s.jitter_ms) * kJitterGain;
  }
  if (s.sample_count == 0 || !config_.ewma_alpha) {
    s.smoothed_ms = one_way;
  } else {
    s.smoothed_ms += *config_.ewma_alpha * (one_way - s.smoothed_ms);
  }
  s.latest_one_way_ms = one_way;
  s.last_sample_time_s = t;
  ++s.sample_count;
  s.window.push_back({path_id, t, rtt_ms, one_way});
  while (s.window.size() > config_.window) s.window.pop_front();
}

void Monitor::add_outage(ProbeOutage outage) {
  if (!stats_.count(outage.path_id)) {
    fail(ErrorKind::kConfig, "monitor: outage names unmonitored path " + outage.path_id);
  }
  if (!(outage.to_s > outage.from_s)) fail(ErrorKind::kConfig, "monitor: outage window is empty");
  outages_.push_back(std::move(outage));
}

bool Monitor::in_outage(const std::string& path_id, double t) const {
  return std::any_of(outages_.begin(), outages_.end(), [&](const ProbeOutage& o) {
    return o.path_id == path_id && t >= o.from_s && t < o.to_s;
  });
}

double Monitor::current_delay(const std::string& path_id) const {
  const auto& s = stats(path_id);
  if (s.sample_count == 0) fail(ErrorKind::kNotReady, "monitor: no samples yet for " + path_id);
  return s.smoothed_ms;
}

double Monitor::jitter(const std::string& path_id) const {
  const auto& s = stats(path_id);
  if (s.sample_count < 2) {
    fail(ErrorKind::kNotReady, "monitor: jitter needs two samples on " + path_id);
  }
  return s.jitter_ms;
}

bool Monitor::jitter_ready(const std::string& path_id) const {
  return stats(path_id).sample_count >= 2;
}

bool Monitor::has_samples(const std::string& path_id) const {
  return stats(path_id).sample_count > 0;
}

bool Monitor::is_stale(const std::string& path_id, double now) const {
  const auto& s = stats(path_id);
  if (s.sample_count == 0) return true;
  const double limit = config_.stale_after_periods * config_.polling_period_s;
  return now - s.last_sample_time_s >= limit - kCadenceTolerance;
}

double Monitor::predicted_delay(const std::string& path_id, double horizon_s) const {
  const auto& s = stats(path_id);
  if (s.window.size() < 2) return current_delay(path_id);
  const double t0 = s.window.back().t_s;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(s.window.size());
  for (const auto& w : s.window) {
    const double x = w.t_s - t0;
    sx += x;
    sy += w.one_way_ms;
    sxx += x * x;
    sxy += x * w.one_way_ms;
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-12) return current_delay(path_id);
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  return std::max(0.0, intercept + slope * horizon_s);
}

const PathStats& Monitor::stats(const std::string& path_id) const {
  auto it = stats_.find(path_id);
  if (it == stats_.end()) fail(ErrorKind::kNotFound, "monitor: unknown path " + path_id);
  return it->second;
}

PathStats& Monitor::mutable_stats(const std::string& path_id) {
  auto it = stats_.find(path_id);
  if (it == stats_.end()) fail(ErrorKind::kNotFound, "monitor: unknown path " + path_id);
  return it->second;
}

}  // namespace nmp::monitor
