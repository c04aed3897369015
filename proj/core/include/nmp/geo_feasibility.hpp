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

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nmp::geo {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kSpeedOfLightKmPerS = 299792.458;
/// Signal speed in optical fibre, as a fraction of c.
inline constexpr double kFibreVelocityFactor = 2.0 / 3.0;
/// Legs are composed from measurements at most this far apart in time.
inline constexpr double kMatchWindowS = 300.0;

struct CityNode {
  std::string name;
  std::string country;
  double latitude = 0.0;   // degrees
  double longitude = 0.0;  // degrees
};

/// Error(kInput) unless |lat| <= 90 and |lon| <= 180.
void validate(const CityNode& city);

double haversine_km(const CityNode& a, const CityNode& b);

/// One-way fibre propagation delay for `distance_km`.
double propagation_delay_ms(double distance_km);

/// Longest fibre run whose propagation delay fits in `ept_ms`.
double max_ept_distance_km(double ept_ms);

struct RelayPath {
  std::string path_id;  // "P1", "P2", ... in result order
  CityNode source;
  CityNode relay;
  CityNode destination;
  double total_distance_km = 0.0;
};

/// Every city other than src and dst usable as a relay within the EPT
/// distance budget, shortest total distance first. Error(kNotFound) when
/// src or dst is not in `cities`.
std::vector<RelayPath> enumerate_relays(std::span<const CityNode> cities, const std::string& src,
                                        const std::string& dst, double ept_ms);

struct LatencyRecord {
  std::string src;
  std::string dst;
  double rtt_ms = 0.0;
  double timestamp_s = 0.0;
};

/// Keeps relays whose two legs both appear in `records` (either direction)
/// and renumbers the survivors.
std::vector<RelayPath> restrict_to_measured(std::vector<RelayPath> relays,
                                            std::span<const LatencyRecord> records);

struct LatencyStats {
  double min_ms = 0.0;
  double median_ms = 0.0;
  double max_ms = 0.0;
  std::size_t samples = 0;
};

/// End-to-end samples src->relay + relay->dst, pairing each first-leg
/// record with the nearest-in-time second-leg record within
/// kMatchWindowS. Error(kNotFound) naming the leg when one has no data or
/// when no pair aligns.
std::vector<double> compose_samples(std::span<const LatencyRecord> records, const RelayPath& path);
LatencyStats path_latency_stats(std::span<const LatencyRecord> records, const RelayPath& path);

/// Order statistics of a non-empty sample set; the median of an even
/// count is the mean of the middle two. Error(kInput) when empty.
LatencyStats order_stats(std::vector<double> samples);

/// CSV with header name,country,latitude,longitude.
std::vector<CityNode> parse_cities(std::string_view text, const std::string& source);
std::vector<CityNode> load_cities(const std::string& path);

/// CSV with header src,dst,rtt,timestamp, or a JSON array of objects with
/// those keys (extra keys ignored). Timestamps are seconds.
std::vector<LatencyRecord> parse_latency_records(std::string_view text, const std::string& source);
std::vector<LatencyRecord> load_latency_records(const std::string& path);

/// Relay table, then a min/median/max block for each path id in `stats`.
std::string render_report(std::span<const RelayPath> relays, double ept_ms,
                          const std::map<std::string, LatencyStats>* stats = nullptr,
                          const std::map<std::string, std::string>* stats_errors = nullptr);

}  // namespace nmp::geo
