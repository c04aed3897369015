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

// Delay arithmetic for a transmitter/receiver pair: sound-card blocking
// delay, mouth-to-ear composition, gain metrics and audio-mode selection.
// All delays are milliseconds at double precision.

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nmp::audio {

/// One sound-card operating point. Profiles key on (sampling_rate,
/// frame_size); d0_ms only feeds the theoretical blocking formula.
struct AudioMode {
  int sampling_rate = 0;  // Hz
  int frame_size = 0;     // samples per frame
  double d0_ms = 0.0;     // constant hardware delay

  friend bool operator==(const AudioMode&, const AudioMode&) = default;
};

/// True when both modes name the same (rate, frame) operating point.
bool same_operating_point(const AudioMode& a, const AudioMode& b) noexcept;

/// "44100Hz/64"
std::string to_string(const AudioMode& mode);

/// Throws Error(kInput) unless rate > 0, frame > 0 and d0 >= 0.
void validate(const AudioMode& mode);

/// Theoretical blocking delay: 1000 * frame_size / sampling_rate + d0.
double blocking_delay(const AudioMode& mode);

struct ProfileEntry {
  AudioMode mode;
  double blocking_delay_ms = 0.0;

  friend bool operator==(const ProfileEntry&, const ProfileEntry&) = default;
};

/// Measured blocking delays of one endpoint's sound card. Entry order is
/// the quality rank: index 0 is the highest-quality mode.
class AudioProfile {
 public:
  AudioProfile() = default;
  explicit AudioProfile(std::string endpoint_id, std::vector<ProfileEntry> entries = {});

  const std::string& endpoint_id() const noexcept { return endpoint_id_; }
  void set_endpoint_id(std::string id) { endpoint_id_ = std::move(id); }

  std::span<const ProfileEntry> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  /// Appends a measurement. Rejects duplicate operating points and
  /// non-positive delays with Error(kInput).
  void add(const AudioMode& mode, double blocking_delay_ms);

  bool contains(const AudioMode& mode) const noexcept;
  const ProfileEntry* find(const AudioMode& mode) const noexcept;

 private:
  std::string endpoint_id_;
  std::vector<ProfileEntry> entries_;
};

/// Measured value for `mode`; Error(kNotFound) if the profile lacks it.
double lookup_blocking(const AudioProfile& profile, const AudioMode& mode);

/// Copy of `profile` with a theoretical (d0-based formula) entry appended
/// for every mode in `modes` that has no measurement. Measured entries win.
AudioProfile complete_with_theoretical(const AudioProfile& profile,
                                       std::span<const AudioMode> modes);

struct DelayBreakdown {
  double d_sound_trans = 0.0;
  double d_proc_trans = 0.0;
  double d_network = 0.0;
  double d_sound_rec = 0.0;
  double d_proc_rec = 0.0;
};

/// Sum of the five components. Error(kInput) for any negative field.
double mouth_to_ear(const DelayBreakdown& breakdown);

/// 100 * (without - with) / without. Negative when interaction hurt.
double gain_percent(double e2e_without_ms, double e2e_with_ms);

/// Same form as gain_percent, over total (tx + rx) blocking delays.
double gain_audio_percent(double total_blocking_initial_ms, double total_blocking_new_ms);

/// lookup_blocking(tx, mode) + lookup_blocking(rx, mode)
double total_blocking(const AudioProfile& tx, const AudioProfile& rx, const AudioMode& mode);

/// First candidate (in quality order) whose total blocking plus
/// d_network_ms fits under ept_ms - guard_ms, or nullopt when none does.
std::optional<AudioMode> select_mode(const AudioProfile& tx, const AudioProfile& rx,
                                     std::span<const AudioMode> candidates,
                                     double d_network_ms, double ept_ms, double guard_ms);

/// Candidate with the smallest total blocking delay; earliest wins ties.
/// Error(kInput) for an empty candidate list.
AudioMode min_blocking_mode(const AudioProfile& tx, const AudioProfile& rx,
                            std::span<const AudioMode> candidates);

/// Modes present in both profiles, ordered by total blocking delay
/// descending, ties broken by higher sampling rate then larger frame.
std::vector<AudioMode> default_quality_order(const AudioProfile& tx, const AudioProfile& rx);

/// Loads profiles from CSV (header endpoint_id,sampling_rate,frame_size,
/// blocking_delay_ms) or a JSON array of objects with the same keys.
/// Records are grouped by endpoint_id in first-seen order.
std::vector<AudioProfile> parse_profiles(std::string_view text, const std::string& source_name);
std::vector<AudioProfile> load_profiles(const std::string& path);

}  // namespace nmp::audio
