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

// Deterministic network model: switches, hosts and bidirectional links
// whose delay is an explicit function of virtual time. No queues, no
// bandwidth, no loss; delay is injected through per-link schedules.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace nmp::net {

using NodeId = std::string;

enum class SegmentKind { kStep, kRamp };

/// kStep: the level jumps by `value` ms at start_s and then holds.
/// kRamp: the level grows by `value` ms per second from start_s.
/// Each segment continues from the level reached when it begins.
struct ScheduleSegment {
  double start_s = 0.0;
  SegmentKind kind = SegmentKind::kStep;
  double value = 0.0;
};

class DelaySchedule {
 public:
  DelaySchedule() = default;
  /// Error(kInput) unless start times are strictly increasing.
  explicit DelaySchedule(std::vector<ScheduleSegment> segments);

  /// Offset added to the link's base delay at time t (may be negative).
  double offset_at(double t_s) const noexcept;

  std::span<const ScheduleSegment> segments() const noexcept { return segments_; }
  bool empty() const noexcept { return segments_.empty(); }

 private:
  std::vector<ScheduleSegment> segments_;
};

struct Link {
  NodeId a;
  NodeId b;
  double base_delay_ms = 0.0;
  DelaySchedule schedule;
};

struct LinkDelay {
  double ms = 0.0;
  bool clamped = false;  // base + schedule went negative and was floored at 0
};

LinkDelay effective_delay(const Link& link, double t_s) noexcept;

class Topology {
 public:
  void add_switch(NodeId id);
  /// Attaches `host` to an existing switch through a zero-delay access link.
  void add_host(NodeId host, const NodeId& attached_switch);
  /// Both ends must be existing switches; a == b and duplicates rejected.
  void add_link(Link link);

  bool has_switch(const NodeId& id) const;
  bool has_host(const NodeId& id) const;
  /// Switch a host is attached to; Error(kNotFound) for unknown hosts.
  const NodeId& attachment(const NodeId& host) const;

  const Link* find_link(const NodeId& a, const NodeId& b) const;
  /// Neighbouring switches in ascending id order.
  std::vector<NodeId> neighbors(const NodeId& sw) const;

  std::vector<NodeId> switches() const;
  std::vector<NodeId> hosts() const;
  std::vector<const Link*> links() const;

 private:
  static std::pair<NodeId, NodeId> key(const NodeId& a, const NodeId& b);

  std::map<NodeId, std::vector<NodeId>> adjacency_;
  std::map<NodeId, NodeId> hosts_;
  std::map<std::pair<NodeId, NodeId>, Link> links_;
};

/// Simple switch path from ingress to egress, labelled "1-3-5".
struct Path {
  std::string id;
  std::vector<NodeId> hops;

  static Path from_hops(std::vector<NodeId> hops);
  /// Splits a label on '-'. Error(kInput) for empty labels or segments.
  static Path parse(const std::string& label);

  friend bool operator==(const Path& a, const Path& b) { return a.hops == b.hops; }
};

/// Every simple path between the switches `src` and `dst` attach to, with
/// at most hop_limit switches, sorted by label. src == dst gives nothing.
std::vector<Path> enumerate_paths(const Topology& topology, const NodeId& src_host,
                                  const NodeId& dst_host, int hop_limit = 4);

/// Error(kInput) unless hops are existing switches joined by links and no
/// switch repeats.
void validate_path(const Topology& topology, const Path& path);

struct PathDelay {
  double ms = 0.0;
  std::vector<std::pair<NodeId, NodeId>> clamped_links;
};

PathDelay path_delay_detail(const Topology& topology, const Path& path, double t_s);
double path_delay(const Topology& topology, const Path& path, double t_s);

/// Seeded additive jitter on probe RTTs. Draws are reproducible across
/// platforms: a 64-bit Mersenne Twister mapped to [low, high) by the top
/// 53 bits.
class NoiseModel {
 public:
  static NoiseModel uniform(double low_ms, double high_ms, std::uint64_t seed);

  double draw();
  double low() const noexcept { return low_; }
  double high() const noexcept { return high_; }

 private:
  NoiseModel(double low, double high, std::uint64_t seed);

  double low_;
  double high_;
  std::mt19937_64 engine_;
};

/// Echo probe record: what the transmitter stamps into each probe.
struct ProbePacket {
  std::string path_id;
  std::uint32_t sequence = 0;
  std::int64_t send_time_us = 0;
};

ProbePacket make_probe(const std::string& path_id, std::uint32_t sequence, double t_s);

/// Round trip along `path` and back: 2 * path_delay + one noise draw.
double simulate_probe(const Topology& topology, const Path& path, double t_s,
                      NoiseModel* noise = nullptr);

class VirtualClock {
 public:
  double now() const noexcept { return now_; }
  /// Error(kInternal) when asked to move backwards.
  void advance_to(double t_s);

 private:
  double now_ = 0.0;
};

/// Single-threaded discrete-event loop. Events at equal times run in
/// ascending priority, then in scheduling order.
class EventLoop {
 public:
  using Action = std::function<void(double t_s)>;

  explicit EventLoop(double start_s = 0.0);

  void schedule(double t_s, int priority, Action action);
  /// Runs every event with time <= end_s; returns the number executed.
  std::size_t run_until(double end_s);

  const VirtualClock& clock() const noexcept { return clock_; }
  bool empty() const noexcept { return queue_.empty(); }

 private:
  struct Entry {
    double t;
    int priority;
    std::uint64_t order;
    Action action;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const noexcept {
      if (a.t != b.t) return a.t > b.t;
      if (a.priority != b.priority) return a.priority > b.priority;
      return a.order > b.order;
    }
  };

  VirtualClock clock_;
  std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
  std::uint64_t next_order_ = 0;
};

}  // namespace nmp::net
