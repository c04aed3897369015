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

#include "nmp/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "nmp/error.hpp"

namespace nmp::net {

DelaySchedule::DelaySchedule(std::vector<ScheduleSegment> segments)
    : segments_(std::move(segments)) {
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (!std::isfinite(s.start_s) || !std::isfinite(s.value)) {
      fail(ErrorKind::kInput, "delay schedule: non-finite segment " + std::to_string(i));
    }
    if (i > 0 && !(s.start_s > segments_[i - 1].start_s)) {
      fail(ErrorKind::kInput,
           "delay schedule: segment start times must be strictly increasing (segment " +
               std::to_string(i) + ")");
    }
  }
}

double DelaySchedule::offset_at(double t) const noexcept {
  double level = 0.0;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (t < s.start_s) break;
    const double until =
        (i + 1 < segments_.size()) ? std::min(t, segments_[i + 1].start_s) : t;
    if (s.kind == SegmentKind::kStep) {
      level += s.value;
    } else {
      level += s.value * (until - s.start_s);
    }
  }
  return level;
}

LinkDelay effective_delay(const Link& link, double t) noexcept {
  const double raw = link.base_delay_ms + link.schedule.offset_at(t);
  if (raw < 0.0) return {0.0, true};
  return {raw, false};
}

std::pair<NodeId, NodeId> Topology::key(const NodeId& a, const NodeId& b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

void Topology::add_switch(NodeId id) {
  if (id.empty() || id.find('-') != NodeId::npos) {
    fail(ErrorKind::kInput, "switch id must be non-empty and must not contain '-': '" + id + "'");
  }
  if (hosts_.count(id)) fail(ErrorKind::kConflict, "node id already used by a host: " + id);
  if (!adjacency_.emplace(std::move(id), std::vector<NodeId>{}).second) {
    fail(ErrorKind::kConflict, "duplicate switch id");
  }
}

void Topology::add_host(NodeId host, const NodeId& attached_switch) {
  if (host.empty()) fail(ErrorKind::kInput, "host id must be non-empty");
  if (!has_switch(attached_switch)) {
    fail(ErrorKind::kNotFound,
         "host '" + host + "' attaches to unknown switch '" + attached_switch + "'");
  }
  if (adjacency_.count(host)) fail(ErrorKind::kConflict, "node id already used by a switch: " + host);
  if (!hosts_.emplace(std::move(host), attached_switch).second) {
    fail(ErrorKind::kConflict, "duplicate host id");
  }
}

void Topology::add_link(Link link) {
  if (link.a == link.b) fail(ErrorKind::kInput, "link endpoints must differ: " + link.a);
  if (!has_switch(link.a) || !has_switch(link.b)) {
    fail(ErrorKind::kNotFound, "link " + link.a + "-" + link.b + " references an unknown switch");
  }
  if (!(link.base_delay_ms >= 0.0) || !std::isfinite(link.base_delay_ms)) {
    fail(ErrorKind::kInput, "link " + link.a + "-" + link.b + ": base delay must be >= 0");
  }
  auto k = key(link.a, link.b);
  if (links_.count(k)) fail(ErrorKind::kConflict, "duplicate link " + link.a + "-" + link.b);
  auto& na = adjacency_[link.a];
  auto& nb = adjacency_[link.b];
  na.insert(std::upper_bound(na.begin(), na.end(), link.b), link.b);
  nb.insert(std::upper_bound(nb.begin(), nb.end(), link.a), link.a);
  links_.emplace(std::move(k), std::move(link));
}

bool Topology::has_switch(const NodeId& id) const { return adjacency_.count(id) != 0; }
bool Topology::has_host(const NodeId& id) const { return hosts_.count(id) != 0; }

const NodeId& Topology::attachment(const NodeId& host) const {
  auto it = hosts_.find(host);
  if (it == hosts_.end()) fail(ErrorKind::kNotFound, "unknown host: " + host);
  return it->second;
}

const Link* Topology::find_link(const NodeId& a, const NodeId& b) const {
  auto it = links_.find(key(a, b));
  return it == links_.end() ? nullptr : &it->second;
}

std::vector<NodeId> Topology::neighbors(const NodeId& sw) const {
  auto it = adjacency_.find(sw);
  if (it == adjacency_.end()) fail(ErrorKind::kNotFound, "unknown switch: " + sw);
  return it->second;
}

std::vector<NodeId> Topology::switches() const {
  std::vector<NodeId> out;
  for (const auto& [id, _] : adjacency_) out.push_back(id);
  return out;
}

std::vector<NodeId> Topology::hosts() const {
  std::vector<NodeId> out;
  for (const auto& [id, _] : hosts_) out.push_back(id);
  return out;
}

std::vector<const Link*> Topology::links() const {
  std::vector<const Link*> out;
  for (const auto& [_, l] : links_) out.push_back(&l);
  return out;
}

Path Path::from_hops(std::vector<NodeId> hops) {
  Path p;
  for (std::size_t i = 0; i < hops.size(); ++i) {
    if (i) p.id += '-';
    p.id += hops[i];
  }
  p.hops = std::move(hops);
  return p;
}

Path Path::parse(const std::string& label) {
  std::vector<NodeId> hops;
  std::size_t pos = 0;
  while (true) {
    const auto dash = label.find('-', pos);
    const auto part = label.substr(pos, dash == std::string::npos ? std::string::npos : dash - pos);
    if (part.empty()) fail(ErrorKind::kInput, "malformed path label: '" + label + "'");
    hops.push_back(part);
    if (dash == std::string::npos) break;
    pos = dash + 1;
  }
  return from_hops(std::move(hops));
}

namespace {

void extend(const Topology& topo, const NodeId& target, std::size_t hop_limit,
            std::vector<NodeId>& stack, std::set<NodeId>& on_stack, std::vector<Path>& out) {
  const NodeId& here = stack.back();
  if (here == target) {
    out.push_back(Path::from_hops(stack));
    return;
  }
  if (stack.size() >= hop_limit) return;
  for (const auto& next : topo.neighbors(here)) {
    if (on_stack.count(next)) continue;
    stack.push_back(next);
    on_stack.insert(next);
    extend(topo, target, hop_limit, stack, on_stack, out);
    on_stack.erase(next);
    stack.pop_back();
  }
}

}  // namespace

std::vector<Path> enumerate_paths(const Topology& topology, const NodeId& src_host,
                                  const NodeId& dst_host, int hop_limit) {
  if (src_host == dst_host || hop_limit <= 0) return {};
  const NodeId& ingress = topology.attachment(src_host);
  const NodeId& egress = topology.attachment(dst_host);
  std::vector<Path> out;
  std::vector<NodeId> stack{ingress};
  std::set<NodeId> on_stack{ingress};
  extend(topology, egress, static_cast<std::size_t>(hop_limit), stack, on_stack, out);
  std::sort(out.begin(), out.end(), [](const Path& a, const Path& b) { return a.id < b.id; });
  return out;
}

void validate_path(const Topology& topology, const Path& path) {
  if (path.hops.empty()) fail(ErrorKind::kInput, "path has no hops");
  std::set<NodeId> seen;
  for (std::size_t i = 0; i < path.hops.size(); ++i) {
    const auto& h = path.hops[i];
    if (!topology.has_switch(h)) {
      fail(ErrorKind::kInput, "path " + path.id + ": unknown switch '" + h + "'");
    }
    if (!seen.insert(h).second) {
      fail(ErrorKind::kInput, "path " + path.id + ": switch '" + h + "' repeats");
    }
    if (i > 0 && !topology.find_link(path.hops[i - 1], h)) {
      fail(ErrorKind::kInput,
           "path " + path.id + ": no link between " + path.hops[i - 1] + " and " + h);
    }
  }
}

PathDelay path_delay_detail(const Topology& topology, const Path& path, double t) {
  validate_path(topology, path);
  PathDelay out;
  for (std::size_t i = 1; i < path.hops.size(); ++i) {
    const Link* link = topology.find_link(path.hops[i - 1], path.hops[i]);
    const auto d = effective_delay(*link, t);
    out.ms += d.ms;
    if (d.clamped) out.clamped_links.emplace_back(link->a, link->b);
  }
  return out;
}

double path_delay(const Topology& topology, const Path& path, double t) {
  return path_delay_detail(topology, path, t).ms;
}

NoiseModel::NoiseModel(double low, double high, std::uint64_t seed)
    : low_(low), high_(high), engine_(seed) {}

NoiseModel NoiseModel::uniform(double low_ms, double high_ms, std::uint64_t seed) {
  if (!std::isfinite(low_ms) || !std::isfinite(high_ms) || high_ms < low_ms) {
    fail(ErrorKind::kInput, "noise model: need finite low <= high");
  }
  return NoiseModel(low_ms, high_ms, seed);
}

double NoiseModel::draw() {
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return low_ + (high_ - low_) * u;
}

ProbePacket make_probe(const std::string& path_id, std::uint32_t sequence, double t_s) {
  return {path_id, sequence, static_cast<std::int64_t>(std::llround(t_s * 1e6))};
}

double simulate_probe(const Topology& topology, const Path& path, double t, NoiseModel* noise) {
  double rtt = 2.0 * path_delay(topology, path, t);
  if (noise) rtt += noise->draw();
  return rtt < 0.0 ? 0.0 : rtt;
}

void VirtualClock::advance_to(double t) {
  if (t < now_) fail(ErrorKind::kInternal, "virtual clock cannot move backwards");
  now_ = t;
}

EventLoop::EventLoop(double start_s) { clock_.advance_to(start_s); }

void EventLoop::schedule(double t, int priority, Action action) {
  if (t < clock_.now()) fail(ErrorKind::kInternal, "event scheduled in the past");
  queue_.push({t, priority, next_order_++, std::move(action)});
}

std::size_t EventLoop::run_until(double end_s) {
  std::size_t n = 0;
  while (!queue_.empty() && queue_.top().t <= end_s) {
    Entry e = queue_.top();
    queue_.pop();
    clock_.advance_to(e.t);
    e.action(e.t);
    ++n;
  }
  return n;
}

}  // namespace nmp::net
