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

#include "nmp/control_proto.hpp"

#include <array>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "nmp/error.hpp"

namespace nmp::proto {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 8> kKindNames = {
    "Register",   "PathRequest",      "PathAssigned", "RerouteNotify",
    "AudioReconfig", "BestEffortNotify", "Ack",          "Error",
};

void check_finite(double v, const char* field) {
  if (!std::isfinite(v)) {
    fail(ErrorKind::kInternal, std::string("control message: non-finite ") + field);
  }
}

json mode_json(const audio::AudioMode& m) {
  check_finite(m.d0_ms, "d0_ms");
  return {{"sampling_rate", m.sampling_rate}, {"frame_size", m.frame_size}, {"d0_ms", m.d0_ms}};
}

struct BodyWriter {
  json operator()(const RegisterBody& b) const {
    json profile = json::array();
    for (const auto& e : b.profile) {
      json j = mode_json(e.mode);
      check_finite(e.blocking_delay_ms, "blocking_delay_ms");
      j["blocking_delay_ms"] = e.blocking_delay_ms;
      profile.push_back(std::move(j));
    }
    return {{"endpoint_id", b.endpoint_id}, {"profile", std::move(profile)}};
  }
  json operator()(const PathRequestBody& b) const {
    check_finite(b.max_delay_ms, "max_delay_ms");
    json modes = json::array();
    for (const auto& m : b.modes) modes.push_back(mode_json(m));
    json j = {{"src", b.src}, {"dst", b.dst}, {"max_delay_ms", b.max_delay_ms},
              {"modes", std::move(modes)}};
    // An unbounded jitter requirement is sent by leaving the field out.
    if (!(std::isinf(b.max_jitter_ms) && b.max_jitter_ms > 0)) {
      check_finite(b.max_jitter_ms, "max_jitter_ms");
      j["max_jitter_ms"] = b.max_jitter_ms;
    }
    return j;
  }
  json operator()(const PathAssignedBody& b) const {
    json j = mode_json(b.mode);
    j["path"] = b.path;
    return j;
  }
  json operator()(const RerouteNotifyBody& b) const {
    return {{"from_path", b.from_path}, {"to_path", b.to_path}};
  }
  json operator()(const AudioReconfigBody& b) const { return mode_json(b.mode); }
  json operator()(const BestEffortNotifyBody& b) const { return mode_json(b.mode); }
  json operator()(const AckBody& b) const { return {{"ack_seq", b.ack_seq}}; }
  json operator()(const ErrorBody& b) const { return {{"reason", b.reason}}; }
};

[[noreturn]] void bad(const std::string& what) {
  fail(ErrorKind::kDecode, "control message: " + what);
}

const json& field(const json& obj, const char* name, const char* where) {
  auto it = obj.find(name);
  if (it == obj.end()) bad(std::string("missing field '") + name + "' in " + where);
  return *it;
}

std::string get_string(const json& obj, const char* name, const char* where) {
  const auto& v = field(obj, name, where);
  if (!v.is_string()) bad(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

double get_number(const json& obj, const char* name, const char* where) {
  const auto& v = field(obj, name, where);
  if (!v.is_number()) bad(std::string("field '") + name + "' must be a number");
  return v.get<double>();
}

template <typename T>
T get_integer(const json& obj, const char* name, const char* where) {
  const auto& v = field(obj, name, where);
  if (!v.is_number_integer()) bad(std::string("field '") + name + "' must be an integer");
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(std::numeric_limits<T>::max())) {
      bad(std::string("field '") + name + "' out of range");
    }
    return static_cast<T>(u);
  }
  const auto s = v.get<std::int64_t>();
  if (s < static_cast<std::int64_t>(std::numeric_limits<T>::min()) ||
      s > static_cast<std::int64_t>(std::numeric_limits<T>::max())) {
    bad(std::string("field '") + name + "' out of range");
  }
  return static_cast<T>(s);
}

audio::AudioMode read_mode(const json& obj, const char* where) {
  audio::AudioMode m;
  m.sampling_rate = get_integer<int>(obj, "sampling_rate", where);
  m.frame_size = get_integer<int>(obj, "frame_size", where);
  m.d0_ms = obj.contains("d0_ms") ? get_number(obj, "d0_ms", where) : 0.0;
  return m;
}

Body read_body(MessageKind kind, const json& b) {
  switch (kind) {
    case MessageKind::kRegister: {
      RegisterBody r;
      r.endpoint_id = get_string(b, "endpoint_id", "Register body");
      const auto& p = field(b, "profile", "Register body");
      if (!p.is_array()) bad("field 'profile' must be an array");
      for (const auto& e : p) {
        if (!e.is_object()) bad("profile entries must be objects");
        r.profile.push_back({read_mode(e, "profile entry"),
                             get_number(e, "blocking_delay_ms", "profile entry")});
      }
      return r;
    }
    case MessageKind::kPathRequest: {
      PathRequestBody r{get_string(b, "src", "PathRequest body"),
                        get_string(b, "dst", "PathRequest body"),
                        get_number(b, "max_delay_ms", "PathRequest body"),
                        std::numeric_limits<double>::infinity(),
                        {}};
      if (b.contains("max_jitter_ms")) {
        r.max_jitter_ms = get_number(b, "max_jitter_ms", "PathRequest body");
      }
      if (auto it = b.find("modes"); it != b.end()) {
        if (!it->is_array()) bad("field 'modes' must be an array");
        for (const auto& m : *it) {
          if (!m.is_object()) bad("modes entries must be objects");
          r.modes.push_back(read_mode(m, "modes entry"));
        }
      }
      return r;
    }
    case MessageKind::kPathAssigned:
      return PathAssignedBody{get_string(b, "path", "PathAssigned body"),
                              read_mode(b, "PathAssigned body")};
    case MessageKind::kRerouteNotify:
      return RerouteNotifyBody{get_string(b, "from_path", "RerouteNotify body"),
                               get_string(b, "to_path", "RerouteNotify body")};
    case MessageKind::kAudioReconfig:
      return AudioReconfigBody{read_mode(b, "AudioReconfig body")};
    case MessageKind::kBestEffortNotify:
      return BestEffortNotifyBody{read_mode(b, "BestEffortNotify body")};
    case MessageKind::kAck:
      return AckBody{get_integer<std::uint32_t>(b, "ack_seq", "Ack body")};
    case MessageKind::kError:
      return ErrorBody{get_string(b, "reason", "Error body")};
  }
  bad("unhandled kind");
}

}  // namespace

std::string_view to_string(MessageKind kind) noexcept {
  return kKindNames[static_cast<std::size_t>(kind)];
}

std::optional<MessageKind> parse_kind(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<MessageKind>(i);
  }
  return std::nullopt;
}

std::string encode(const ControlMessage& msg) {
  json j;
  j["kind"] = std::string(to_string(msg.kind()));
  j["seq"] = msg.seq;
  j["from"] = msg.from;
  j["to"] = msg.to;
  if (msg.session) j["session"] = *msg.session;
  j["body"] = std::visit(BodyWriter{}, msg.body);
  try {
    return j.dump() + "\n";
  } catch (const json::exception& e) {
    fail(ErrorKind::kInternal, std::string("control message: cannot encode: ") + e.what());
  }
}

ControlMessage decode(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  if (line.empty()) bad("empty line");
  json j;
  try {
    j = json::parse(line.begin(), line.end());
  } catch (const json::parse_error& e) {
    bad(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) bad("line is not a JSON object");

  const auto kind_name = get_string(j, "kind", "message");
  const auto kind = parse_kind(kind_name);
  if (!kind) bad("unknown kind '" + kind_name + "'");

  ControlMessage m;
  m.seq = get_integer<std::uint32_t>(j, "seq", "message");
  m.from = get_string(j, "from", "message");
  m.to = get_string(j, "to", "message");
  if (auto it = j.find("session"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) bad("field 'session' must be a string");
    m.session = it->get<std::string>();
  }
  const auto& body = field(j, "body", "message");
  if (!body.is_object()) bad("field 'body' must be an object");
  m.body = read_body(*kind, body);
  return m;
}

void LineDecoder::feed(std::string_view bytes) { buffer_.append(bytes); }

LineDecoder::Item LineDecoder::decode_line(std::string_view line) {
  Item item;
  item.line_no = ++line_no_;
  try {
    item.message = decode(line);
  } catch (const Error& e) {
    item.error = e.what();
  }
  return item;
}

std::optional<LineDecoder::Item> LineDecoder::next() {
  const auto nl = buffer_.find('\n');
  if (nl == std::string::npos) return std::nullopt;
  const std::string line = buffer_.substr(0, nl);
  buffer_.erase(0, nl + 1);
  return decode_line(line);
}

std::optional<LineDecoder::Item> LineDecoder::finish() {
  if (buffer_.empty()) return std::nullopt;
  const std::string line = std::move(buffer_);
  buffer_.clear();
  auto item = decode_line(line);
  if (item.message) {
    item.message.reset();
    item.error = "control message: truncated line (no terminating newline)";
  }
  return item;
}

SessionValidator::SessionValidator(std::string session_id) : session_id_(std::move(session_id)) {}

void SessionValidator::adopt_request(std::string src, std::string dst) {
  if (phase_ != Phase::kOpen) return;
  src_ = std::move(src);
  dst_ = std::move(dst);
  phase_ = Phase::kRequested;
}

Observation SessionValidator::violation(std::string reason) const {
  return {Verdict::kViolation, "session " + session_id_ + ": " + reason, std::nullopt};
}

bool SessionValidator::is_participant(const std::string& id) const {
  return id == src_ || id == dst_;
}

Observation SessionValidator::check_order(const ControlMessage& msg) const {
  switch (msg.kind()) {
    case MessageKind::kRegister:
      if (phase_ > Phase::kRegistered) return violation("Register after PathRequest");
      break;
    case MessageKind::kPathRequest:
      if (phase_ != Phase::kRegistered) {
        return violation(phase_ == Phase::kOpen ? "PathRequest before Register"
                                                : "repeated PathRequest");
      }
      break;
    case MessageKind::kPathAssigned:
      if (phase_ == Phase::kAssigned && is_participant(msg.to) && !assigned_to_.count(msg.to)) break;
      if (phase_ != Phase::kRequested) return violation("PathAssigned without a pending PathRequest");
      break;
    case MessageKind::kRerouteNotify:
    case MessageKind::kBestEffortNotify:
      if (phase_ != Phase::kAssigned) {
        return violation(std::string(to_string(msg.kind())) + " before PathAssigned");
      }
      break;
    case MessageKind::kAudioReconfig: {
      if (phase_ != Phase::kAssigned) return violation("AudioReconfig before PathAssigned");
      if (!is_participant(msg.to)) return violation("AudioReconfig to non-participant " + msg.to);
      const auto& mode = std::get<AudioReconfigBody>(msg.body).mode;
      if (reconfig_) {
        if (!(reconfig_->mode == mode)) return violation("AudioReconfig while another is in flight");
        if (reconfig_->sent_to.count(msg.to)) return violation("AudioReconfig resent to " + msg.to);
      }
      break;
    }
    case MessageKind::kAck: {
      const auto& ack = std::get<AckBody>(msg.body);
      if (!outstanding_.count({msg.to, msg.from, ack.ack_seq})) {
        return violation("Ack for unknown seq " + std::to_string(ack.ack_seq));
      }
      break;
    }
    case MessageKind::kError:
      break;
  }
  return {};
}

Observation SessionValidator::observe(const ControlMessage& msg) {
  if (msg.session && *msg.session != session_id_) {
    return violation("message for foreign session " + *msg.session);
  }
  if (msg.kind() == MessageKind::kAck) {
    const auto& ack = std::get<AckBody>(msg.body);
    if (seen_acks_.count({msg.from, msg.seq, ack.ack_seq}) ||
        acked_.count({msg.to, msg.from, ack.ack_seq})) {
      return {Verdict::kDuplicate, "duplicate Ack ignored", std::nullopt};
    }
  }
  if (auto it = last_seq_.find(msg.from); it != last_seq_.end() && msg.seq <= it->second) {
    return violation("non-monotonic seq " + std::to_string(msg.seq) + " from " + msg.from);
  }
  if (auto v = check_order(msg); v.verdict != Verdict::kAccepted) return v;

  Observation out;
  last_seq_[msg.from] = msg.seq;
  const auto kind = msg.kind();
  if (kind != MessageKind::kAck) outstanding_[{msg.from, msg.to, msg.seq}] = kind;

  switch (kind) {
    case MessageKind::kRegister:
      phase_ = Phase::kRegistered;
      break;
    case MessageKind::kPathRequest: {
      const auto& body = std::get<PathRequestBody>(msg.body);
      src_ = body.src;
      dst_ = body.dst;
      phase_ = Phase::kRequested;
      break;
    }
    case MessageKind::kPathAssigned:
      phase_ = Phase::kAssigned;
      assigned_to_.insert(msg.to);
      break;
    case MessageKind::kAudioReconfig: {
      if (!reconfig_) reconfig_ = Reconfig{std::get<AudioReconfigBody>(msg.body).mode, {}, {}};
      reconfig_->sent_to.insert(msg.to);
      break;
    }
    case MessageKind::kAck: {
      const auto& ack = std::get<AckBody>(msg.body);
      const Key key{msg.to, msg.from, ack.ack_seq};
      const auto acked_kind = outstanding_.at(key);
      outstanding_.erase(key);
      acked_.insert(key);
      seen_acks_.insert({msg.from, msg.seq, ack.ack_seq});
      if (acked_kind == MessageKind::kAudioReconfig && reconfig_) {
        reconfig_->acked_by.insert(msg.from);
        if (reconfig_->acked_by.count(src_) && reconfig_->acked_by.count(dst_)) {
          out.committed_mode = reconfig_->mode;
          reconfig_.reset();
        }
      }
      break;
    }
    default:
      break;
  }
  return out;
}

}  // namespace nmp::proto
