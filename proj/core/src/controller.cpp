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

#include "nmp/controller.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "nmp/error.hpp"
#include "nmp/text_io.hpp"

namespace nmp::sdn {

namespace {

constexpr double kEps = 1e-9;

std::string describe_switch(const audio::AudioMode& from, const audio::AudioMode& to) {
  return audio::to_string(from) + " -> " + audio::to_string(to);
}

}  // namespace

void ControllerConfig::validate() const {
  if (!(ept_ms > 0.0)) fail(ErrorKind::kConfig, "controller: ept_ms must be > 0");
  if (!(reroute_threshold_ms > 0.0)) {
    fail(ErrorKind::kConfig, "controller: reroute_threshold_ms must be > 0");
  }
  if (!(guard_ms >= 0.0 && guard_ms < ept_ms)) {
    fail(ErrorKind::kConfig, "controller: guard_ms must satisfy 0 <= guard < ept");
  }
  if (!(polling_period_s > 0.0)) fail(ErrorKind::kConfig, "controller: polling_period_s must be > 0");
}

std::string_view to_string(Action action) noexcept {
  switch (action) {
    case Action::kPathAssignment: return "Path assignment";
    case Action::kRerouting: return "Rerouting";
    case Action::kAudioModification: return "Audio modification";
    case Action::kBestEffort: return "Best effort";
    case Action::kWarning: return "Warning";
  }
  return "?";
}

std::vector<net::NodeId> replay_rules(const FlowTable& table, const net::Topology& topology,
                                      const std::string& session_id, const std::string& src_host,
                                      const std::string& dst_host, Direction direction) {
  const bool fwd = direction == Direction::kForward;
  const std::string& end_host = fwd ? dst_host : src_host;
  net::NodeId cur = topology.attachment(fwd ? src_host : dst_host);
  std::vector<net::NodeId> visited;
  while (true) {
    const FlowRule* rule = nullptr;
    if (auto it = table.find(cur); it != table.end()) {
      for (const auto& r : it->second) {
        if (r.session_id == session_id && r.direction == direction) {
          rule = &r;
          break;
        }
      }
    }
    if (!rule) fail(ErrorKind::kInternal, "flow replay: no rule for " + session_id + " at " + cur);
    visited.push_back(cur);
    if (rule->next_hop == end_host) {
      if (topology.attachment(end_host) != cur) {
        fail(ErrorKind::kInternal, "flow replay: host " + end_host + " is not attached to " + cur);
      }
      return visited;
    }
    if (!topology.find_link(cur, rule->next_hop)) {
      fail(ErrorKind::kInternal, "flow replay: no link " + cur + "-" + rule->next_hop);
    }
    if (std::find(visited.begin(), visited.end(), rule->next_hop) != visited.end()) {
      fail(ErrorKind::kInternal, "flow replay: loop at " + rule->next_hop);
    }
    cur = rule->next_hop;
  }
}

void LoopbackEndpoints::add_endpoint(const std::string& id) { agents_.try_emplace(id); }

void LoopbackEndpoints::set_drop_acks(const std::string& id, bool drop) {
  agent(id).drop_acks = drop;
}

LoopbackEndpoints::Agent& LoopbackEndpoints::agent(const std::string& id) {
  auto it = agents_.find(id);
  if (it == agents_.end()) fail(ErrorKind::kNotFound, "loopback: unknown endpoint " + id);
  return it->second;
}

std::optional<audio::AudioMode> LoopbackEndpoints::mode_of(const std::string& id) const {
  auto it = agents_.find(id);
  if (it == agents_.end()) return std::nullopt;
  return it->second.mode;
}

proto::ControlMessage LoopbackEndpoints::make(const std::string& from, const std::string& to,
                                              std::optional<std::string> session,
                                              proto::Body body) {
  auto& a = agent(from);
  return {a.next_seq++, from, to, std::move(session), std::move(body)};
}

std::vector<proto::ControlMessage> LoopbackEndpoints::deliver(const proto::ControlMessage& msg) {
  auto it = agents_.find(msg.to);
  if (it == agents_.end()) return {};
  auto& a = it->second;
  if (const auto* pa = std::get_if<proto::PathAssignedBody>(&msg.body)) a.mode = pa->mode;
  if (const auto* rc = std::get_if<proto::AudioReconfigBody>(&msg.body)) a.mode = rc->mode;
  if (msg.kind() == proto::MessageKind::kAck || a.drop_acks) return {};
  return {make(msg.to, msg.from, msg.session, proto::AckBody{msg.seq})};
}

Controller::Controller(const net::Topology& topology, const monitor::Monitor& monitor,
                       ControllerConfig config, ControlTransport* transport,
                       std::string controller_id)
    : topology_(&topology),
      monitor_(&monitor),
      config_(config),
      transport_(transport),
      id_(std::move(controller_id)) {
  config_.validate();
}

void Controller::register_endpoint(const audio::AudioProfile& profile) {
  if (profile.endpoint_id().empty()) fail(ErrorKind::kInput, "register: empty endpoint id");
  if (profile.empty()) {
    fail(ErrorKind::kInput, "register: profile for " + profile.endpoint_id() + " has no modes");
  }
  if (profiles_.count(profile.endpoint_id())) {
    fail(ErrorKind::kConflict, "register: endpoint already registered: " + profile.endpoint_id());
  }
  profiles_.emplace(profile.endpoint_id(), profile);
}

const audio::AudioProfile& Controller::profile(const std::string& endpoint_id) const {
  auto it = profiles_.find(endpoint_id);
  if (it == profiles_.end()) fail(ErrorKind::kNotFound, "unregistered endpoint: " + endpoint_id);
  return it->second;
}

bool Controller::is_registered(const std::string& endpoint_id) const {
  return profiles_.count(endpoint_id) != 0;
}

const SessionState& Controller::session(const std::string& session_id) const {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) fail(ErrorKind::kNotFound, "unknown session: " + session_id);
  return it->second;
}

bool Controller::has_session(const std::string& session_id) const {
  return sessions_.count(session_id) != 0;
}

SessionState& Controller::mutable_session(const std::string& session_id) {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) fail(ErrorKind::kNotFound, "unknown session: " + session_id);
  return it->second;
}

proto::SessionValidator& Controller::validator(const std::string& session_id) {
  return validators_.try_emplace(session_id, session_id).first->second;
}

EventRecord& Controller::emit(SessionState& s, double t, Action action, std::string current,
                              std::string next, std::string detail) {
  EventRecord e;
  e.t_s = t;
  e.event_id = static_cast<int>(s.history.size()) + 1;
  e.current_path = std::move(current);
  e.next_path = std::move(next);
  e.action = action;
  e.detail = std::move(detail);
  s.history.push_back(std::move(e));
  return s.history.back();
}

void Controller::record_warning(const std::string& session_id, double t, std::string detail) {
  auto& s = mutable_session(session_id);
  emit(s, t, Action::kWarning, s.current_path.id, s.current_path.id, std::move(detail));
}

double Controller::blocking(const SessionState& s, const audio::AudioMode& mode) const {
  return audio::total_blocking(profile(s.src), profile(s.dst), mode);
}

double Controller::network_delay(const SessionState& s) const {
  if (config_.trend_prediction) {
    return monitor_->predicted_delay(s.current_path.id, config_.polling_period_s);
  }
  return monitor_->current_delay(s.current_path.id);
}

double Controller::end_to_end(const std::string& session_id) const {
  const auto& s = session(session_id);
  return blocking(s, s.current_mode) + monitor_->current_delay(s.current_path.id);
}

std::vector<const net::Path*> Controller::usable_paths(const SessionState& s, double t) const {
  std::vector<const net::Path*> out;
  for (const auto& p : s.candidate_paths) {
    if (monitor_->has_samples(p.id) && !monitor_->is_stale(p.id, t)) out.push_back(&p);
  }
  return out;
}

std::vector<FlowRule> Controller::install_flow_rules(const std::string& session_id) {
  const auto& s = session(session_id);
  try {
    net::validate_path(*topology_, s.current_path);
  } catch (const Error& e) {
    fail(ErrorKind::kInternal, std::string("install_flow_rules: ") + e.what());
  }
  const auto& hops = s.current_path.hops;
  std::vector<FlowRule> rules;
  for (std::size_t i = 0; i < hops.size(); ++i) {
    rules.push_back({hops[i], session_id, Direction::kForward,
                     i + 1 < hops.size() ? hops[i + 1] : s.dst});
    rules.push_back({hops[i], session_id, Direction::kReverse, i > 0 ? hops[i - 1] : s.src});
  }
  for (auto it = flow_table_.begin(); it != flow_table_.end();) {
    auto& v = it->second;
    v.erase(std::remove_if(v.begin(), v.end(),
                           [&](const FlowRule& r) { return r.session_id == session_id; }),
            v.end());
    it = v.empty() ? flow_table_.erase(it) : std::next(it);
  }
  for (const auto& r : rules) flow_table_[r.switch_id].push_back(r);
  return rules;
}

void Controller::note(const proto::ControlMessage& msg) {
  auto line = proto::encode(msg);
  line.pop_back();
  transcript_.push_back(std::move(line));
}

std::optional<audio::AudioMode> Controller::observe(const std::string& session_id,
                                                    const proto::ControlMessage& msg, double t) {
  auto obs = validator(session_id).observe(msg);
  if (obs.verdict == proto::Verdict::kViolation && has_session(session_id)) {
    record_warning(session_id, t, "protocol violation: " + obs.reason);
  }
  return obs.committed_mode;
}

std::optional<audio::AudioMode> Controller::send(const std::string& session_id,
                                                 const std::string& to, proto::Body body,
                                                 double t) {
  proto::ControlMessage msg{next_seq_++, id_, to, session_id, std::move(body)};
  note(msg);
  auto committed = observe(session_id, msg, t);
  if (!transport_) return committed;
  for (const auto& reply : transport_->deliver(msg)) {
    note(reply);
    if (auto c = observe(session_id, reply, t)) committed = c;
  }
  return committed;
}

void Controller::commit_mode(SessionState& s, const audio::AudioMode& mode) {
  s.current_mode = mode;
  s.pending_mode.reset();
}

bool Controller::reconfigure(SessionState& s, const audio::AudioMode& mode, double t) {
  if (!transport_) {
    commit_mode(s, mode);
    return true;
  }
  s.pending_mode = mode;
  auto c1 = send(s.session_id, s.src, proto::AudioReconfigBody{mode}, t);
  auto c2 = send(s.session_id, s.dst, proto::AudioReconfigBody{mode}, t);
  const auto committed = c2 ? c2 : c1;
  if (!committed) return false;
  commit_mode(s, *committed);
  return true;
}

const EventRecord& Controller::handle_path_request(const PathRequest& req, double t) {
  if (req.session_id.empty()) fail(ErrorKind::kInput, "path request: empty session id");
  if (sessions_.count(req.session_id)) {
    fail(ErrorKind::kConflict, "path request: session already exists: " + req.session_id);
  }
  if (req.src == req.dst) fail(ErrorKind::kInput, "path request: src and dst are the same endpoint");
  if (!(req.max_delay_ms > 0.0) || !(req.max_jitter_ms >= 0.0)) {
    fail(ErrorKind::kInput, "path request: need max_delay > 0 and max_jitter >= 0");
  }
  const auto& tx = profile(req.src);
  const auto& rx = profile(req.dst);
  const auto& ingress = topology_->attachment(req.src);
  const auto& egress = topology_->attachment(req.dst);

  SessionState s;
  s.session_id = req.session_id;
  s.src = req.src;
  s.dst = req.dst;
  for (const auto& p : monitor_->paths()) {
    if (p.hops.front() == ingress && p.hops.back() == egress) s.candidate_paths.push_back(p);
  }
  s.candidate_modes =
      req.candidate_modes.empty() ? audio::default_quality_order(tx, rx) : req.candidate_modes;
  if (s.candidate_modes.empty()) {
    fail(ErrorKind::kInput, "path request: the two profiles share no audio mode");
  }
  for (const auto& m : s.candidate_modes) audio::total_blocking(tx, rx, m);

  const net::Path* best = nullptr;
  double best_delay = 0.0;
  std::string diagnostics;
  for (const auto& p : s.candidate_paths) {
    if (!monitor_->has_samples(p.id) || monitor_->is_stale(p.id, t)) {
      diagnostics += " " + p.id + ": no fresh samples;";
      continue;
    }
    const double d = monitor_->current_delay(p.id);
    const double j = monitor_->jitter_ready(p.id) ? monitor_->jitter(p.id) : 0.0;
    if (d > req.max_delay_ms + kEps || j > req.max_jitter_ms + kEps) {
      diagnostics += " " + p.id + ": delay " + text::fixed(d) + " ms, jitter " + text::fixed(j) +
                     " ms;";
      continue;
    }
    if (!best || d < best_delay || (d == best_delay && p.id < best->id)) {
      best = &p;
      best_delay = d;
    }
  }
  if (!best) {
    if (s.candidate_paths.empty()) diagnostics = " no monitored path joins the endpoints";
    fail(ErrorKind::kRejected, "path request " + req.session_id + " rejected (max delay " +
                                   text::fixed(req.max_delay_ms) + " ms, max jitter " +
                                   text::fixed(req.max_jitter_ms) + " ms):" + diagnostics);
  }

  s.current_path = *best;
  const auto fit = audio::select_mode(tx, rx, s.candidate_modes, best_delay, config_.ept_ms,
                                      config_.guard_ms);
  s.current_mode = fit ? *fit : audio::min_blocking_mode(tx, rx, s.candidate_modes);
  s.initial_mode = s.current_mode;

  auto& stored = sessions_.emplace(req.session_id, std::move(s)).first->second;
  install_flow_rules(req.session_id);
  validator(req.session_id).adopt_request(req.src, req.dst);
  emit(stored, t, Action::kPathAssignment, "-", stored.current_path.id,
       "mode " + audio::to_string(stored.current_mode));
  const auto idx = stored.history.size() - 1;
  for (const auto* ep : {&stored.src, &stored.dst}) {
    send(stored.session_id, *ep,
         proto::PathAssignedBody{stored.current_path.id, stored.current_mode}, t);
  }
  return stored.history[idx];
}

std::vector<EventRecord> Controller::tick(const std::string& session_id, double t) {
  auto& s = mutable_session(session_id);
  const auto first_new = s.history.size();

  const auto usable = usable_paths(s, t);
  if (!usable.empty() && monitor_->has_samples(s.current_path.id)) {
    const net::Path* best = usable.front();
    double best_delay = monitor_->current_delay(best->id);
    for (const auto* p : usable) {
      const double d = monitor_->current_delay(p->id);
      if (d < best_delay || (d == best_delay && p->id < best->id)) {
        best = p;
        best_delay = d;
      }
    }
    const double cur = monitor_->current_delay(s.current_path.id);
    if (best->id != s.current_path.id && cur - best_delay >= config_.reroute_threshold_ms - kEps) {
      const std::string old = s.current_path.id;
      s.current_path = *best;
      install_flow_rules(session_id);
      emit(s, t, Action::kRerouting, old, best->id,
           text::fixed(cur) + " ms -> " + text::fixed(best_delay) + " ms");
      for (const auto* ep : {&s.src, &s.dst}) {
        send(session_id, *ep, proto::RerouteNotifyBody{old, best->id}, t);
      }
    }
  }

  if (monitor_->has_samples(s.current_path.id) && !s.pending_mode) {
    const double limit = config_.ept_ms - config_.guard_ms;
    const double d = network_delay(s);
    const double total = blocking(s, s.current_mode);
    if (total + d > limit + kEps) {
      std::vector<audio::AudioMode> lower;
      for (const auto& m : s.candidate_modes) {
        if (blocking(s, m) < total - kEps) lower.push_back(m);
      }
      const auto& tx = profile(s.src);
      const auto& rx = profile(s.dst);
      const auto pick = audio::select_mode(tx, rx, lower, d, config_.ept_ms, config_.guard_ms);
      if (pick) {
        const auto before = s.current_mode;
        if (reconfigure(s, *pick, t)) {
          emit(s, t, Action::kAudioModification, s.current_path.id, s.current_path.id,
               describe_switch(before, s.current_mode));
        }
      } else if (!s.best_effort) {
        const auto floor = audio::min_blocking_mode(tx, rx, s.candidate_modes);
        const auto before = s.current_mode;
        if (blocking(s, floor) < total - kEps) reconfigure(s, floor, t);
        s.best_effort = true;
        for (const auto* ep : {&s.src, &s.dst}) {
          send(session_id, *ep, proto::BestEffortNotifyBody{floor}, t);
        }
        emit(s, t, Action::kBestEffort, s.current_path.id, s.current_path.id,
             before == s.current_mode ? "mode " + audio::to_string(before)
                                      : describe_switch(before, s.current_mode));
      }
    }
    if (s.best_effort && end_to_end(session_id) <= limit + kEps) s.best_effort = false;
  }

  return {s.history.begin() + static_cast<std::ptrdiff_t>(first_new), s.history.end()};
}

std::vector<proto::ControlMessage> Controller::receive(const proto::ControlMessage& msg, double t) {
  note(msg);
  std::vector<proto::ControlMessage> replies;
  auto reply = [&](proto::Body body) {
    proto::ControlMessage r{next_seq_++, id_, msg.from, msg.session, std::move(body)};
    note(r);
    if (msg.session) observe(*msg.session, r, t);
    replies.push_back(std::move(r));
  };

  if (msg.session) {
    auto obs = validator(*msg.session).observe(msg);
    if (obs.verdict == proto::Verdict::kDuplicate) return replies;
    if (obs.verdict == proto::Verdict::kViolation) {
      if (has_session(*msg.session)) record_warning(*msg.session, t, "protocol violation: " + obs.reason);
      return replies;
    }
    if (obs.committed_mode && has_session(*msg.session)) {
      auto& s = mutable_session(*msg.session);
      const auto before = s.current_mode;
      commit_mode(s, *obs.committed_mode);
      emit(s, t, Action::kAudioModification, s.current_path.id, s.current_path.id,
           describe_switch(before, s.current_mode));
    }
  }

  switch (msg.kind()) {
    case proto::MessageKind::kRegister: {
      const auto& b = std::get<proto::RegisterBody>(msg.body);
      try {
        register_endpoint(audio::AudioProfile(b.endpoint_id, b.profile));
        reply(proto::AckBody{msg.seq});
      } catch (const Error& e) {
        reply(proto::ErrorBody{e.what()});
      }
      break;
    }
    case proto::MessageKind::kPathRequest: {
      const auto& b = std::get<proto::PathRequestBody>(msg.body);
      reply(proto::AckBody{msg.seq});
      PathRequest req{msg.session.value_or(""), b.src, b.dst, b.max_delay_ms, b.max_jitter_ms,
                      b.modes};
      try {
        handle_path_request(req, t);
      } catch (const Error& e) {
        reply(proto::ErrorBody{e.what()});
        throw;
      }
      break;
    }
    default:
      break;
  }
  return replies;
}

}  // namespace nmp::sdn
