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

// Session controller: registration and audio profiles, path assignment,
// hysteresis rerouting and audio-mode renegotiation against the ensemble
// performance threshold (EPT).

#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nmp/audio_model.hpp"
#include "nmp/control_proto.hpp"
#include "nmp/monitor.hpp"
#include "nmp/netsim.hpp"

namespace nmp::sdn {

struct ControllerConfig {
  double ept_ms = 25.0;
  double reroute_threshold_ms = 2.0;
  double guard_ms = 0.0;
  double polling_period_s = 1.0;
  /// Use a linear fit over the monitor window, one polling period ahead,
  /// instead of the latest delay when testing against the EPT.
  bool trend_prediction = false;

  void validate() const;
};

struct PathRequest {
  std::string session_id;
  std::string src;
  std::string dst;
  double max_delay_ms = 25.0;
  double max_jitter_ms = std::numeric_limits<double>::infinity();
  /// Highest quality first; empty means default_quality_order().
  std::vector<audio::AudioMode> candidate_modes;
};

enum class Action { kPathAssignment, kRerouting, kAudioModification, kBestEffort, kWarning };

/// "Path assignment", "Rerouting", "Audio modification", "Best effort", "Warning"
std::string_view to_string(Action action) noexcept;

struct EventRecord {
  double t_s = 0.0;
  int event_id = 0;
  std::string current_path;  // "-" before the first assignment
  std::string next_path;
  Action action = Action::kWarning;
  std::string detail;
};

enum class Direction { kForward, kReverse };

struct FlowRule {
  net::NodeId switch_id;
  std::string session_id;
  Direction direction = Direction::kForward;
  net::NodeId next_hop;  // neighbouring switch, or the host at the path end

  friend bool operator==(const FlowRule&, const FlowRule&) = default;
};

/// Rules per switch, in installation order.
using FlowTable = std::map<net::NodeId, std::vector<FlowRule>>;

/// Follows the session's rules hop by hop from the ingress switch and
/// returns the switches visited. Error(kInternal) on a missing rule or loop.
std::vector<net::NodeId> replay_rules(const FlowTable& table, const net::Topology& topology,
                                      const std::string& session_id, const std::string& src_host,
                                      const std::string& dst_host, Direction direction);

struct SessionState {
  std::string session_id;
  std::string src;
  std::string dst;
  net::Path current_path;
  std::vector<net::Path> candidate_paths;
  audio::AudioMode current_mode;
  audio::AudioMode initial_mode;
  std::vector<audio::AudioMode> candidate_modes;
  std::vector<EventRecord> history;
  bool best_effort = false;
  std::optional<audio::AudioMode> pending_mode;  // reconfig sent, not yet acknowledged
};

class ControlTransport {
 public:
  virtual ~ControlTransport() = default;
  /// Delivers one message and returns whatever the recipient answers.
  virtual std::vector<proto::ControlMessage> deliver(const proto::ControlMessage& msg) = 0;
};

/// In-process endpoints that acknowledge every non-Ack message addressed
/// to them. Individual endpoints can be told to swallow their Acks.
class LoopbackEndpoints : public ControlTransport {
 public:
  void add_endpoint(const std::string& id);
  void set_drop_acks(const std::string& id, bool drop);

  std::vector<proto::ControlMessage> deliver(const proto::ControlMessage& msg) override;

  /// Builds a message originating at endpoint `from` with its next seq.
  proto::ControlMessage make(const std::string& from, const std::string& to,
                             std::optional<std::string> session, proto::Body body);

  /// Mode last announced to the endpoint by PathAssigned or AudioReconfig.
  std::optional<audio::AudioMode> mode_of(const std::string& id) const;

 private:
  struct Agent {
    std::uint32_t next_seq = 1;
    bool drop_acks = false;
    std::optional<audio::AudioMode> mode;
  };
  Agent& agent(const std::string& id);

  std::map<std::string, Agent> agents_;
};

class Controller {
 public:
  /// `transport` may be null, in which case reconfigurations commit
  /// immediately and no messages are exchanged.
  Controller(const net::Topology& topology, const monitor::Monitor& monitor,
             ControllerConfig config = {}, ControlTransport* transport = nullptr,
             std::string controller_id = "controller");

  /// Error(kConflict) for a known endpoint id, Error(kInput) for an empty profile.
  void register_endpoint(const audio::AudioProfile& profile);
  const audio::AudioProfile& profile(const std::string& endpoint_id) const;
  bool is_registered(const std::string& endpoint_id) const;

  /// Assigns the cheapest feasible monitored path between src and dst and
  /// the best mode that fits under the EPT. Error(kNotFound) for unknown
  /// endpoints, Error(kRejected) when no path satisfies the request.
  const EventRecord& handle_path_request(const PathRequest& req, double t_s);

  /// One control-loop evaluation: reroute, then renegotiate.
  std::vector<EventRecord> tick(const std::string& session_id, double t_s);

  /// Total blocking of the current mode plus the current path's delay.
  double end_to_end(const std::string& session_id) const;

  /// Replaces the session's rules along its current path.
  std::vector<FlowRule> install_flow_rules(const std::string& session_id);
  const FlowTable& flow_table() const noexcept { return flow_table_; }

  /// Entry point for messages sent by endpoints (Register, PathRequest,
  /// late Acks). Returns the controller's direct replies.
  std::vector<proto::ControlMessage> receive(const proto::ControlMessage& msg, double t_s);

  void record_warning(const std::string& session_id, double t_s, std::string detail);

  const SessionState& session(const std::string& session_id) const;
  bool has_session(const std::string& session_id) const;
  const ControllerConfig& config() const noexcept { return config_; }
  const std::string& id() const noexcept { return id_; }

  /// Every message sent or received, encoded, in order.
  const std::vector<std::string>& transcript() const noexcept { return transcript_; }

 private:
  SessionState& mutable_session(const std::string& session_id);
  proto::SessionValidator& validator(const std::string& session_id);
  EventRecord& emit(SessionState& s, double t, Action action, std::string current,
                    std::string next, std::string detail = {});

  double network_delay(const SessionState& s) const;
  double blocking(const SessionState& s, const audio::AudioMode& mode) const;
  std::vector<const net::Path*> usable_paths(const SessionState& s, double t) const;

  /// Sends `body` to `to`, feeds the exchange through the session
  /// validator and returns the mode it committed, if any.
  std::optional<audio::AudioMode> send(const std::string& session_id, const std::string& to,
                                       proto::Body body, double t);
  void note(const proto::ControlMessage& msg);
  std::optional<audio::AudioMode> observe(const std::string& session_id,
                                          const proto::ControlMessage& msg, double t);
  /// Starts a two-sided reconfiguration; true when it committed at once.
  bool reconfigure(SessionState& s, const audio::AudioMode& mode, double t);
  void commit_mode(SessionState& s, const audio::AudioMode& mode);

  const net::Topology* topology_;
  const monitor::Monitor* monitor_;
  ControllerConfig config_;
  ControlTransport* transport_;
  std::string id_;
  std::uint32_t next_seq_ = 1;

  std::map<std::string, audio::AudioProfile> profiles_;
  std::map<std::string, SessionState> sessions_;
  std::map<std::string, proto::SessionValidator> validators_;
  FlowTable flow_table_;
  std::vector<std::string> transcript_;
};

}  // namespace nmp::sdn
