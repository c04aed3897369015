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

#include "nmp/audio_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "nmp/error.hpp"
#include "nmp/text_io.hpp"

namespace nmp::audio {

bool same_operating_point(const AudioMode& a, const AudioMode& b) noexcept {
  return a.sampling_rate == b.sampling_rate && a.frame_size == b.frame_size;
}

std::string to_string(const AudioMode& mode) {
  return std::to_string(mode.sampling_rate) + "Hz/" + std::to_string(mode.frame_size);
}

void validate(const AudioMode& mode) {
  if (mode.sampling_rate <= 0) {
    fail(ErrorKind::kInput, "audio mode: sampling_rate must be positive, got " +
                                std::to_string(mode.sampling_rate));
  }
  if (mode.frame_size <= 0) {
    fail(ErrorKind::kInput,
         "audio mode: frame_size must be positive, got " + std::to_string(mode.frame_size));
  }
  if (!(mode.d0_ms >= 0.0) || !std::isfinite(mode.d0_ms)) {
    fail(ErrorKind::kInput, "audio mode: d0 must be a non-negative number");
  }
}

double blocking_delay(const AudioMode& mode) {
  validate(mode);
  return 1000.0 * static_cast<double>(mode.frame_size) / static_cast<double>(mode.sampling_rate) +
         mode.d0_ms;
}

AudioProfile::AudioProfile(std::string endpoint_id, std::vector<ProfileEntry> entries)
    : endpoint_id_(std::move(endpoint_id)) {
  entries_.reserve(entries.size());
  for (const auto& e : entries) add(e.mode, e.blocking_delay_ms);
}

void AudioProfile::add(const AudioMode& mode, double blocking_delay_ms) {
  validate(mode);
  if (!(blocking_delay_ms > 0.0) || !std::isfinite(blocking_delay_ms)) {
    fail(ErrorKind::kInput, "profile '" + endpoint_id_ + "': blocking delay for " +
                                to_string(mode) + " must be positive");
  }
  if (contains(mode)) {
    fail(ErrorKind::kInput,
         "profile '" + endpoint_id_ + "': duplicate mode " + to_string(mode));
  }
  entries_.push_back({mode, blocking_delay_ms});
}

const ProfileEntry* AudioProfile::find(const AudioMode& mode) const noexcept {
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const ProfileEntry& e) {
    return same_operating_point(e.mode, mode);
  });
  return it == entries_.end() ? nullptr : &*it;
}

bool AudioProfile::contains(const AudioMode& mode) const noexcept { return find(mode) != nullptr; }

double lookup_blocking(const AudioProfile& profile, const AudioMode& mode) {
  if (const auto* e = profile.find(mode)) return e->blocking_delay_ms;
  fail(ErrorKind::kNotFound,
       "profile '" + profile.endpoint_id() + "' has no measurement for " + to_string(mode));
}

AudioProfile complete_with_theoretical(const AudioProfile& profile,
                                       std::span<const AudioMode> modes) {
  AudioProfile out = profile;
  for (const auto& m : modes) {
    if (!out.contains(m)) out.add(m, blocking_delay(m));
  }
  return out;
}

double mouth_to_ear(const DelayBreakdown& b) {
  for (double v : {b.d_sound_trans, b.d_proc_trans, b.d_network, b.d_sound_rec, b.d_proc_rec}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      fail(ErrorKind::kInput, "delay breakdown: every component must be a non-negative number");
    }
  }
  return b.d_sound_trans + b.d_proc_trans + b.d_network + b.d_sound_rec + b.d_proc_rec;
}

namespace {

double relative_reduction(double reference, double value, const char* what) {
  if (!(reference > 0.0) || !std::isfinite(reference)) {
    fail(ErrorKind::kInput, std::string(what) + ": reference delay must be positive");
  }
  return 100.0 * (reference - value) / reference;
}

}  // namespace

double gain_percent(double e2e_without_ms, double e2e_with_ms) {
  return relative_reduction(e2e_without_ms, e2e_with_ms, "gain");
}

double gain_audio_percent(double total_blocking_initial_ms, double total_blocking_new_ms) {
  return relative_reduction(total_blocking_initial_ms, total_blocking_new_ms, "audio gain");
}

double total_blocking(const AudioProfile& tx, const AudioProfile& rx, const AudioMode& mode) {
  return lookup_blocking(tx, mode) + lookup_blocking(rx, mode);
}

std::optional<AudioMode> select_mode(const AudioProfile& tx, const AudioProfile& rx,
                                     std::span<const AudioMode> candidates,
                                     double d_network_ms, double ept_ms, double guard_ms) {
  const double budget = ept_ms - guard_ms;
  // Check membership up front so a missing mode fails even when an earlier
  // candidate would already have been selected.
  for (const auto& m : candidates) {
    lookup_blocking(tx, m);
    lookup_blocking(rx, m);
  }
  for (const auto& m : candidates) {
    if (total_blocking(tx, rx, m) + d_network_ms <= budget) return m;
  }
  return std::nullopt;
}

AudioMode min_blocking_mode(const AudioProfile& tx, const AudioProfile& rx,
                            std::span<const AudioMode> candidates) {
  if (candidates.empty()) fail(ErrorKind::kInput, "min_blocking_mode: no candidate modes");
  const AudioMode* best = &candidates.front();
  double best_total = total_blocking(tx, rx, *best);
  for (const auto& m : candidates.subspan(1)) {
    const double total = total_blocking(tx, rx, m);
    if (total < best_total) {
      best = &m;
      best_total = total;
    }
  }
  return *best;
}

std::vector<AudioMode> default_quality_order(const AudioProfile& tx, const AudioProfile& rx) {
  struct Ranked {
    AudioMode mode;
    double total;
  };
  std::vector<Ranked> ranked;
  for (const auto& e : tx.entries()) {
    if (const auto* other = rx.find(e.mode)) {
      ranked.push_back({e.mode, e.blocking_delay_ms + other->blocking_delay_ms});
    }
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.total != b.total) return a.total > b.total;
    if (a.mode.sampling_rate != b.mode.sampling_rate) {
      return a.mode.sampling_rate > b.mode.sampling_rate;
    }
    return a.mode.frame_size > b.mode.frame_size;
  });
  std::vector<AudioMode> out;
  out.reserve(ranked.size());
  for (const auto& r : ranked) out.push_back(r.mode);
  return out;
}

namespace {

struct Record {
  std::string endpoint_id;
  AudioMode mode;
  double blocking_ms;
  std::string where;
};

std::vector<AudioProfile> group(const std::vector<Record>& records) {
  std::vector<AudioProfile> out;
  std::map<std::string, std::size_t> index;
  for (const auto& r : records) {
    auto [it, inserted] = index.emplace(r.endpoint_id, out.size());
    if (inserted) out.emplace_back(r.endpoint_id);
    try {
      out[it->second].add(r.mode, r.blocking_ms);
    } catch (const Error& e) {
      fail(ErrorKind::kDecode, r.where + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

std::vector<AudioProfile> parse_profiles(std::string_view text, const std::string& source) {
  std::vector<Record> records;
  if (text::looks_like_json(text)) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kDecode, source + ": " + e.what());
    }
    if (!doc.is_array()) fail(ErrorKind::kDecode, source + ": expected a JSON array of records");
    for (std::size_t i = 0; i < doc.size(); ++i) {
      const auto& item = doc[i];
      const std::string where = source + "[" + std::to_string(i) + "]";
      try {
        Record r;
        r.endpoint_id = item.at("endpoint_id").get<std::string>();
        r.mode.sampling_rate = item.at("sampling_rate").get<int>();
        r.mode.frame_size = item.at("frame_size").get<int>();
        r.blocking_ms = item.at("blocking_delay_ms").get<double>();
        r.where = where;
        records.push_back(std::move(r));
      } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::kDecode, where + ": " + e.what());
      }
    }
  } else {
    const auto table = text::parse_csv(text, source);
    const auto c_id = table.column("endpoint_id", source);
    const auto c_rate = table.column("sampling_rate", source);
    const auto c_frame = table.column("frame_size", source);
    const auto c_delay = table.column("blocking_delay_ms", source);
    for (const auto& row : table.rows) {
      const std::string where = source + ":" + std::to_string(row.line);
      Record r;
      r.endpoint_id = row.fields[c_id];
      r.mode.sampling_rate =
          static_cast<int>(text::parse_int(row.fields[c_rate], where + ": sampling_rate"));
      r.mode.frame_size =
          static_cast<int>(text::parse_int(row.fields[c_frame], where + ": frame_size"));
      r.blocking_ms = text::parse_double(row.fields[c_delay], where + ": blocking_delay_ms");
      r.where = where;
      records.push_back(std::move(r));
    }
  }
  return group(records);
}

std::vector<AudioProfile> load_profiles(const std::string& path) {
  return parse_profiles(text::read_file(path), path);
}

}  // namespace nmp::audio
