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

#include "nmp/geo_feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <numbers>

#include "nmp/error.hpp"
#include "nmp/text_io.hpp"

namespace nmp::geo {

namespace {

constexpr double kFibreKmPerMs = kSpeedOfLightKmPerS * kFibreVelocityFactor / 1000.0;

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

bool same_leg(const LatencyRecord& r, const std::string& a, const std::string& b) {
  return (r.src == a && r.dst == b) || (r.src == b && r.dst == a);
}

const CityNode& find_city(std::span<const CityNode> cities, const std::string& name) {
  auto it = std::find_if(cities.begin(), cities.end(),
                         [&](const CityNode& c) { return c.name == name; });
  if (it == cities.end()) fail(ErrorKind::kNotFound, "unknown city: " + name);
  return *it;
}

void renumber(std::vector<RelayPath>& paths) {
  for (std::size_t i = 0; i < paths.size(); ++i) paths[i].path_id = "P" + std::to_string(i + 1);
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string city_label(const CityNode& c) {
  return c.country.empty() ? c.name : c.name + " (" + c.country + ")";
}

}  // namespace

void validate(const CityNode& city) {
  if (!(std::abs(city.latitude) <= 90.0) || !(std::abs(city.longitude) <= 180.0)) {
    fail(ErrorKind::kInput, "city " + city.name + ": coordinates out of range");
  }
}

double haversine_km(const CityNode& a, const CityNode& b) {
  validate(a);
  validate(b);
  const double la1 = radians(a.latitude);
  const double la2 = radians(b.latitude);
  const double dlat = la2 - la1;
  const double dlon = radians(b.longitude - a.longitude);
  const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(la1) * std::cos(la2) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(std::min(1.0, h)));
}

double propagation_delay_ms(double distance_km) {
  if (!(distance_km >= 0.0)) fail(ErrorKind::kInput, "propagation delay: negative distance");
  return distance_km / kFibreKmPerMs;
}

double max_ept_distance_km(double ept_ms) {
  if (!(ept_ms > 0.0)) fail(ErrorKind::kInput, "max EPT distance: ept must be > 0");
  return ept_ms * kFibreKmPerMs;
}

std::vector<RelayPath> enumerate_relays(std::span<const CityNode> cities, const std::string& src,
                                        const std::string& dst, double ept_ms) {
  const auto& s = find_city(cities, src);
  const auto& d = find_city(cities, dst);
  const double budget = max_ept_distance_km(ept_ms);
  std::vector<RelayPath> out;
  for (const auto& r : cities) {
    if (r.name == s.name || r.name == d.name) continue;
    const double total = haversine_km(s, r) + haversine_km(r, d);
    if (total <= budget) out.push_back({{}, s, r, d, total});
  }
  std::stable_sort(out.begin(), out.end(), [](const RelayPath& a, const RelayPath& b) {
    if (a.total_distance_km != b.total_distance_km) return a.total_distance_km < b.total_distance_km;
    return a.relay.name < b.relay.name;
  });
  renumber(out);
  return out;
}

std::vector<RelayPath> restrict_to_measured(std::vector<RelayPath> relays,
                                            std::span<const LatencyRecord> records) {
  auto covered = [&](const std::string& a, const std::string& b) {
    return std::any_of(records.begin(), records.end(),
                       [&](const LatencyRecord& r) { return same_leg(r, a, b); });
  };
  std::erase_if(relays, [&](const RelayPath& p) {
    return !covered(p.source.name, p.relay.name) || !covered(p.relay.name, p.destination.name);
  });
  renumber(relays);
  return relays;
}

std::vector<double> compose_samples(std::span<const LatencyRecord> records, const RelayPath& path) {
  std::vector<const LatencyRecord*> first;
  std::vector<const LatencyRecord*> second;
  for (const auto& r : records) {
    if (same_leg(r, path.source.name, path.relay.name)) first.push_back(&r);
    if (same_leg(r, path.relay.name, path.destination.name)) second.push_back(&r);
  }
  if (first.empty()) {
    fail(ErrorKind::kNotFound, "no measurements for leg " + path.source.name + " - " + path.relay.name);
  }
  if (second.empty()) {
    fail(ErrorKind::kNotFound,
         "no measurements for leg " + path.relay.name + " - " + path.destination.name);
  }
  std::stable_sort(second.begin(), second.end(), [](const auto* a, const auto* b) {
    return a->timestamp_s < b->timestamp_s;
  });
  std::vector<double> out;
  for (const auto* a : first) {
    auto it = std::lower_bound(second.begin(), second.end(), a->timestamp_s,
                               [](const LatencyRecord* r, double t) { return r->timestamp_s < t; });
    const LatencyRecord* best = nullptr;
    if (it != second.end()) best = *it;
    if (it != second.begin()) {
      const auto* prev = *std::prev(it);
      if (!best || a->timestamp_s - prev->timestamp_s <= best->timestamp_s - a->timestamp_s) {
        best = prev;
      }
    }
    if (best && std::abs(best->timestamp_s - a->timestamp_s) <= kMatchWindowS) {
      out.push_back(a->rtt_ms + best->rtt_ms);
    }
  }
  if (out.empty()) {
    fail(ErrorKind::kNotFound, "no time-aligned measurements for " + path.path_id + " via " +
                                   path.relay.name);
  }
  return out;
}

LatencyStats order_stats(std::vector<double> v) {
  if (v.empty()) fail(ErrorKind::kInput, "order statistics of an empty sample set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  const double median = n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
  return {v.front(), median, v.back(), n};
}

LatencyStats path_latency_stats(std::span<const LatencyRecord> records, const RelayPath& path) {
  return order_stats(compose_samples(records, path));
}

std::vector<CityNode> parse_cities(std::string_view text, const std::string& source) {
  const auto table = text::parse_csv(text, source);
  const auto c_name = table.column("name", source);
  const auto c_country = table.column("country", source);
  const auto c_lat = table.column("latitude", source);
  const auto c_lon = table.column("longitude", source);
  std::vector<CityNode> out;
  for (const auto& row : table.rows) {
    const std::string where = source + ":" + std::to_string(row.line);
    CityNode c{text::trim(row.fields[c_name]), text::trim(row.fields[c_country]),
               text::parse_double(row.fields[c_lat], where + " latitude"),
               text::parse_double(row.fields[c_lon], where + " longitude")};
    if (c.name.empty()) fail(ErrorKind::kDecode, where + ": empty city name");
    try {
      validate(c);
    } catch (const Error& e) {
      fail(ErrorKind::kDecode, where + ": " + e.what());
    }
    if (std::any_of(out.begin(), out.end(), [&](const CityNode& o) { return o.name == c.name; })) {
      fail(ErrorKind::kDecode, where + ": duplicate city " + c.name);
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<CityNode> load_cities(const std::string& path) {
  return parse_cities(text::read_file(path), path);
}

std::vector<LatencyRecord> parse_latency_records(std::string_view text, const std::string& source) {
  std::vector<LatencyRecord> out;
  auto check = [&](const LatencyRecord& r, const std::string& where) {
    if (r.src.empty() || r.dst.empty()) fail(ErrorKind::kDecode, where + ": empty src or dst");
    if (!(r.rtt_ms >= 0.0) || !std::isfinite(r.rtt_ms)) {
      fail(ErrorKind::kDecode, where + ": rtt must be >= 0");
    }
  };
  if (text::looks_like_json(text)) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorKind::kDecode, source + ": " + e.what());
    }
    if (!j.is_array()) fail(ErrorKind::kDecode, source + ": expected a JSON array");
    for (std::size_t i = 0; i < j.size(); ++i) {
      const auto& o = j[i];
      const std::string where = source + "[" + std::to_string(i) + "]";
      if (!o.is_object()) fail(ErrorKind::kDecode, where + ": expected an object");
      for (const char* k : {"src", "dst", "rtt", "timestamp"}) {
        if (!o.contains(k)) fail(ErrorKind::kDecode, where + ": missing field '" + k + "'");
      }
      if (!o["src"].is_string() || !o["dst"].is_string()) {
        fail(ErrorKind::kDecode, where + ": src and dst must be strings");
      }
      if (!o["rtt"].is_number() || !o["timestamp"].is_number()) {
        fail(ErrorKind::kDecode, where + ": rtt and timestamp must be numbers");
      }
      LatencyRecord r{o["src"].get<std::string>(), o["dst"].get<std::string>(),
                      o["rtt"].get<double>(), o["timestamp"].get<double>()};
      check(r, where);
      out.push_back(std::move(r));
    }
    return out;
  }
  const auto table = text::parse_csv(text, source);
  const auto c_src = table.column("src", source);
  const auto c_dst = table.column("dst", source);
  const auto c_rtt = table.column("rtt", source);
  const auto c_ts = table.column("timestamp", source);
  for (const auto& row : table.rows) {
    const std::string where = source + ":" + std::to_string(row.line);
    LatencyRecord r{text::trim(row.fields[c_src]), text::trim(row.fields[c_dst]),
                    text::parse_double(row.fields[c_rtt], where + " rtt"),
                    text::parse_double(row.fields[c_ts], where + " timestamp")};
    check(r, where);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<LatencyRecord> load_latency_records(const std::string& path) {
  return parse_latency_records(text::read_file(path), path);
}

std::string render_report(std::span<const RelayPath> relays, double ept_ms,
                          const std::map<std::string, LatencyStats>* stats,
                          const std::map<std::string, std::string>* stats_errors) {
  std::string out;
  out += "EPT " + text::fixed(ept_ms) + " ms, distance budget " +
         text::fixed(max_ept_distance_km(ept_ms)) + " km\n";
  out += std::to_string(relays.size()) + " feasible relay path(s)\n\n";
  std::size_t w_src = 6, w_rel = 5, w_dst = 11;
  for (const auto& p : relays) {
    w_src = std::max(w_src, city_label(p.source).size());
    w_rel = std::max(w_rel, city_label(p.relay).size());
    w_dst = std::max(w_dst, city_label(p.destination).size());
  }
  out += pad("Path ID", 8) + "  " + pad("Source", w_src) + "  " + pad("Relay", w_rel) + "  " +
         pad("Destination", w_dst) + "  Overall distance (km)  Propagation (ms)\n";
  for (const auto& p : relays) {
    out += pad(p.path_id, 8) + "  " + pad(city_label(p.source), w_src) + "  " +
           pad(city_label(p.relay), w_rel) + "  " + pad(city_label(p.destination), w_dst) + "  " +
           pad(text::fixed(p.total_distance_km), 21) + "  " +
           text::fixed(propagation_delay_ms(p.total_distance_km)) + "\n";
  }
  if (stats || stats_errors) {
    out += "\nMeasured end-to-end RTT (ms)\n";
    out += pad("Path ID", 8) + "  " + pad("min", 8) + "  " + pad("median", 8) + "  " +
           pad("max", 8) + "  samples\n";
    for (const auto& p : relays) {
      if (stats) {
        if (auto it = stats->find(p.path_id); it != stats->end()) {
          const auto& s = it->second;
          out += pad(p.path_id, 8) + "  " + pad(text::fixed(s.min_ms), 8) + "  " +
                 pad(text::fixed(s.median_ms), 8) + "  " + pad(text::fixed(s.max_ms), 8) + "  " +
                 std::to_string(s.samples) + "\n";
          continue;
        }
      }
      if (stats_errors) {
        if (auto it = stats_errors->find(p.path_id); it != stats_errors->end()) {
          out += pad(p.path_id, 8) + "  unavailable: " + it->second + "\n";
        }
      }
    }
  }
  return out;
}

}  // namespace nmp::geo
