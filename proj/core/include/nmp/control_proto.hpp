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

// Line-oriented signaling between endpoints and the controller. Every
// message is one JSON object followed by '\n':
//
//   {"body":{...},"from":"ctl","kind":"AudioReconfig","seq":7,"session":"s1","to":"tx"}
//
// Keys are emitted in sorted order so transcripts compare byte-for-byte.
// See docs/control_protocol.md for the per-kind body fields.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

#include "nmp/audio_model.hpp"

namespace nmp::proto {

enum class MessageKind {
  kRegister,
  kPathRequest,
  kPathAssigned,
  kRerouteNotify,
  kAudioReconfig,
  kBestEffortNotify,
  kAck,
  kError,
};

std::string_view to_string(MessageKind kind) noexcept;
std::optional<MessageKind> parse_kind(std::string_view name) noexcept;

struct RegisterBody {
  std::string endpoint_id;
  std::vector<audio::ProfileEntry> profile;
  friend bool operator==(const RegisterBody&, const RegisterBody&) = default;
};

struct PathRequestBody {
  std::string src;
  std::string dst;
  double max_delay_ms = 0.0;
  double max_jitter_ms = 0.0;
  /// Modes the requester is willing to use, highest quality first. Empty
  /// lets the controller pick from the modes both profiles share.
  std::vector<audio::AudioMode> modes;
  friend bool operator==(const PathRequestBody&, const PathRequestBody&) = default;
};

struct PathAssignedBody {
  std::string path;
  audio::AudioMode mode;
  friend bool operator==(const PathAssignedBody&, const PathAssignedBody&) = default;
};

struct RerouteNotifyBody {
  std::string from_path;
  std::string to_path;
  friend bool operator==(const RerouteNotifyBody&, const RerouteNotifyBody&) = default;
};

struct AudioReconfigBody {
  audio::AudioMode mode;
  friend bool operator==(const AudioReconfigBody&, const AudioReconfigBody&) = default;
};

struct BestEffortNotifyBody {
  audio::AudioMode mode;
  friend bool operator==(const BestEffortNotifyBody&, const BestEffortNotifyBody&) = default;
};

struct AckBody {
  std::uint32_t ack_seq = 0;
  friend bool operator==(const AckBody&, const AckBody&) = default;
};

struct ErrorBody {
  std::string reason;
  friend bool operator==(const ErrorBody&, const ErrorBody&) = default;
};

// Alternative order matches MessageKind.
using Body = std::variant<RegisterBody, PathRequestBody, PathAssignedBody, RerouteNotifyBody,
                          AudioReconfigBody, BestEffortNotifyBody, AckBody, ErrorBody>;

struct ControlMessage {
  std::uint32_t seq = 0;
  std::string from;
  std::string to;
  std::optional<std::string> session;
  Body body;

  MessageKind kind() const noexcept { return static_cast<MessageKind>(body.index()); }

  friend bool operator==(const ControlMessage&, const ControlMessage&) = default;
};

/// One newline-terminated line. Error(kInternal) for payloads JSON cannot
/// carry (non-finite numbers, invalid UTF-8).
std::string encode(const ControlMessage& msg);

/// Parses one line (trailing newline optional). Unknown keys are ignored.
/// Error(kDecode) describing the first problem found.
ControlMessage decode(std::string_view line);

/// Splits a byte stream into lines and decodes each one. A bad line is
/// reported and skipped; decoding resumes at the following newline.
class LineDecoder {
 public:
  struct Item {
    std::size_t line_no = 0;
    std::optional<ControlMessage> message;
    std::string error;
  };

  void feed(std::string_view bytes);
  /// Next complete line, if any.
  std::optional<Item> next();
  /// Treats buffered bytes without a final newline as a truncated line.
  std::optional<Item> finish();

  std::size_t buffered() const noexcept { return buffer_.size(); }

 private:
  Item decode_line(std::string_view line);

  std::string buffer_;
  std::size_t line_no_ = 0;
};

enum class Phase { kOpen, kRegistered, kRequested, kAssigned };

enum class Verdict { kAccepted, kDuplicate, kViolation };

struct Observation {
  Verdict verdict = Verdict::kAccepted;
  std::string reason;
  /// Set when this message completed both acknowledgements of a reconfig.
  std::optional<audio::AudioMode> committed_mode;
};

/// Legal message order for one session:
///   Register+ -> PathRequest -> PathAssigned -> (RerouteNotify |
///   AudioReconfig | BestEffortNotify)*, with Acks and Errors anywhere.
/// An AudioReconfig is committed once both session endpoints (the src and
/// dst of the PathRequest) have acknowledged it; only one reconfig may be
/// outstanding. Violating messages leave the state untouched.
class SessionValidator {
 public:
  explicit SessionValidator(std::string session_id);

  Observation observe(const ControlMessage& msg);

  /// For sessions set up through direct calls rather than messages: moves
  /// an untouched validator to the requested phase with the given endpoints.
  void adopt_request(std::string src, std::string dst);

  Phase phase() const noexcept { return phase_; }
  bool reconfig_in_flight() const noexcept { return reconfig_.has_value(); }
  const std::string& session_id() const noexcept { return session_id_; }

 private:
  struct Reconfig {
    audio::AudioMode mode;
    std::set<std::string> sent_to;
    std::set<std::string> acked_by;
  };
  using Key = std::tuple<std::string, std::string, std::uint32_t>;  // from, to, seq

  Observation violation(std::string reason) const;
  Observation check_order(const ControlMessage& msg) const;
  bool is_participant(const std::string& id) const;

  std::string session_id_;
  Phase phase_ = Phase::kOpen;
  std::string src_;
  std::string dst_;
  std::set<std::string> assigned_to_;
  std::map<std::string, std::uint32_t> last_seq_;
  std::map<Key, MessageKind> outstanding_;
  std::set<Key> acked_;
  std::set<std::tuple<std::string, std::uint32_t, std::uint32_t>> seen_acks_;
  std::optional<Reconfig> reconfig_;
};

}  // namespace nmp::proto
