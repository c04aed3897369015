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

#include <cmath>
#include <array>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace nmp::geo {
namespace {

using nmp::testing::data_path;
using nmp::testing::Gen;
using nmp::testing::throws_kind;

const char* kIssy = "Issy-les-Moulineaux";

const CityNode& city(const std::vector<CityNode>& cities, const std::string& name) {
  for (const auto& c : cities) {
    if (c.name == name) return c;
  }
  throw std::runtime_error("missing city " + name);
}

TEST(Haversine, Basics) {
  const CityNode a{"a", "", 48.2, 16.37};
  EXPECT_DOUBLE_EQ(haversine_km(a, a), 0.0);
  const CityNode n{"n", "", 0.0, 0.0};
  const CityNode s{"s", "", 0.0, 180.0};
  EXPECT_NEAR(haversine_km(n, s), std::numbers::pi * 6371.0, 1e-6);
  EXPECT_NEAR(haversine_km(n, s), 20015.1, 0.05);
  EXPECT_NEAR(haversine_km({"p", "", 90, 0}, {"q", "", -90, 0}), 20015.1, 0.05);
  EXPECT_TRUE(throws_kind([] { haversine_km({"x", "", 91, 0}, {"y", "", 0, 0}); },
                          ErrorKind::kInput));
  EXPECT_TRUE(throws_kind([] { haversine_km({"x", "", 0, 0}, {"y", "", 0, -180.5}); },
                          ErrorKind::kInput));
}

TEST(Haversine, MetricProperties) {
  Gen g(60);
  auto any = [&] { return CityNode{"", "", g.real_in(-90, 90), g.real_in(-180, 180)}; };
  for (int i = 0; i < 5000; ++i) {
    const auto a = any(), b = any(), c = any();
    const double ab = haversine_km(a, b);
    EXPECT_GE(ab, 0.0);
    EXPECT_NEAR(ab, haversine_km(b, a), 1e-9);
    EXPECT_LE(haversine_km(a, c), ab + haversine_km(b, c) + 1e-6);
    EXPECT_LE(ab, std::numbers::pi * kEarthRadiusKm + 1e-6);
  }
}

TEST(Propagation, DistanceAndDelay) {
  EXPECT_DOUBLE_EQ(propagation_delay_ms(0.0), 0.0);
  EXPECT_NEAR(propagation_delay_ms(1999.0), 1000.0 * 1999.0 / 199861.638667, 1e-9);
  EXPECT_NEAR(propagation_delay_ms(1999.0), 10.0, 0.005);
  EXPECT_NEAR(propagation_delay_ms(4996.54), 25.0, 1e-3);
  EXPECT_NEAR(max_ept_distance_km(25.0), 4996.54, 0.01);
  EXPECT_NEAR(max_ept_distance_km(25.0), 299792.458 * 2.0 / 3.0 * 0.025, 1e-9);
  EXPECT_NEAR(max_ept_distance_km(50.0), 2 * max_ept_distance_km(25.0), 1e-9);
  EXPECT_NEAR(max_ept_distance_km(1e-12), 0.0, 1e-6);
  EXPECT_TRUE(throws_kind([] { propagation_delay_ms(-1.0); }, ErrorKind::kInput));
  EXPECT_TRUE(throws_kind([] { max_ept_distance_km(0.0); }, ErrorKind::kInput));
}

TEST(Propagation, InverseRoundTrip) {
  Gen g(61);
  for (int i = 0; i < 1000; ++i) {
    const double ept = g.real_in(1e-3, 500);
    EXPECT_NEAR(propagation_delay_ms(max_ept_distance_km(ept)), ept, 1e-9 * ept);
  }
}

TEST(Relays, FixtureCityDistances) {
  const auto cities = load_cities(data_path("geo/cities.csv"));
  EXPECT_EQ(cities.size(), 19u);
  const auto& vienna = city(cities, "Vienna");
  const auto& issy = city(cities, kIssy);
  const std::vector<std::pair<std::string, double>> printed = {
      {"Kosice", 1756.34}, {"Poplar", 1571.69}, {"Ljubljana", 1250.31}};
  for (const auto& [relay, km] : printed) {
    const auto& r = city(cities, relay);
    const double total = haversine_km(vienna, r) + haversine_km(r, issy);
    EXPECT_NEAR(total, km, 0.02 * km) << relay;
  }
}

TEST(Relays, AllWithinBudgetAndSorted) {
  const auto cities = load_cities(data_path("geo/cities.csv"));
  const auto relays = enumerate_relays(cities, "Vienna", kIssy, 25.0);
  ASSERT_FALSE(relays.empty());
  std::set<std::string> names;
  for (std::size_t i = 0; i < relays.size(); ++i) {
    const auto& p = relays[i];
    EXPECT_EQ(p.path_id, "P" + std::to_string(i + 1));
    EXPECT_LE(propagation_delay_ms(p.total_distance_km), 25.0);
    EXPECT_NEAR(p.total_distance_km,
                haversine_km(p.source, p.relay) + haversine_km(p.relay, p.destination), 1e-9);
    EXPECT_NE(p.relay.name, "Vienna");
    EXPECT_NE(p.relay.name, kIssy);
    if (i) EXPECT_LE(relays[i - 1].total_distance_km, p.total_distance_km);
    names.insert(p.relay.name);
  }
  for (const char* n : {"Kosice", "Poplar", "Ljubljana"}) EXPECT_TRUE(names.count(n)) << n;
  EXPECT_TRUE(enumerate_relays(cities, "Vienna", kIssy, 1.0).empty());
  EXPECT_TRUE(throws_kind([&] { enumerate_relays(cities, "Atlantis", kIssy, 25.0); },
                          ErrorKind::kNotFound));
}

TEST(Relays, MeasuredCoverageSelectsThree) {
  const auto cities = load_cities(data_path("geo/cities.csv"));
  const auto records = load_latency_records(data_path("geo/measurements.csv"));
  const auto relays = restrict_to_measured(enumerate_relays(cities, "Vienna", kIssy, 25.0), records);
  ASSERT_EQ(relays.size(), 3u);
  EXPECT_EQ(relays[0].relay.name, "Ljubljana");
  EXPECT_EQ(relays[1].relay.name, "Poplar");
  EXPECT_EQ(relays[2].relay.name, "Kosice");
  EXPECT_EQ(relays[2].path_id, "P3");
}

TEST(Relays, RandomCitySetsRespectBudget) {
  Gen g(62);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<CityNode> cities;
    for (int i = 0; i < g.int_in(2, 30); ++i) {
      cities.push_back({"c" + std::to_string(i), "", g.real_in(35, 60), g.real_in(-10, 30)});
    }
    const double ept = g.real_in(0.5, 40);
    const auto relays = enumerate_relays(cities, "c0", "c1", ept);
    std::size_t expected = 0;
    for (std::size_t i = 2; i < cities.size(); ++i) {
      const double d = haversine_km(cities[0], cities[i]) + haversine_km(cities[i], cities[1]);
      expected += d <= max_ept_distance_km(ept);
    }
    EXPECT_EQ(relays.size(), expected);
    for (const auto& r : relays) EXPECT_LE(propagation_delay_ms(r.total_distance_km), ept + 1e-12);
  }
}

TEST(Stats, OrderStatistics) {
  const auto one = order_stats({12.5});
  EXPECT_EQ(one.min_ms, 12.5);
  EXPECT_EQ(one.median_ms, 12.5);
  EXPECT_EQ(one.max_ms, 12.5);
  const auto four = order_stats({40, 10, 30, 20});
  EXPECT_EQ(four.min_ms, 10);
  EXPECT_EQ(four.median_ms, 25);
  EXPECT_EQ(four.max_ms, 40);
  EXPECT_EQ(four.samples, 4u);
  EXPECT_TRUE(throws_kind([] { order_stats({}); }, ErrorKind::kInput));
}

RelayPath triple(const std::string& a, const std::string& r, const std::string& b) {
  return {"P1", {a, "", 0, 0}, {r, "", 0, 0}, {b, "", 0, 0}, 0};
}

TEST(Stats, NearestTimestampPairing) {
  const std::vector<LatencyRecord> records = {
      {"A", "R", 10, 1000}, {"A", "R", 11, 2000}, {"A", "R", 99, 9000},
      {"B", "R", 1, 1100},  {"R", "B", 2, 1900},  {"R", "B", 3, 2100}, {"R", "B", 4, 5000}};
  const auto samples = compose_samples(records, triple("A", "R", "B"));
  ASSERT_EQ(samples.size(), 2u);
  EXPECT_DOUBLE_EQ(samples[0], 11.0);
  EXPECT_DOUBLE_EQ(samples[1], 13.0);
}

TEST(Stats, MissingLegNamesTheLeg) {
  const std::vector<LatencyRecord> records = {{"A", "R", 10, 0}};
  try {
    compose_samples(records, triple("A", "R", "B"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNotFound);
    EXPECT_NE(std::string(e.what()).find("R - B"), std::string::npos) << e.what();
  }
}

TEST(Stats, ConstantLegShiftsEverything) {
  Gen g(63);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<LatencyRecord> base, shifted;
    const double c = g.real_in(0, 20);
    for (int i = 0; i < g.int_in(1, 20); ++i) {
      const double t = i * 600.0;
      const double r1 = g.real_in(1, 30), r2 = g.real_in(1, 30);
      base.push_back({"A", "R", r1, t});
      base.push_back({"R", "B", r2, t + g.real_in(-200, 200)});
      shifted.push_back(base[base.size() - 2]);
      shifted.push_back(base.back());
      shifted.back().rtt_ms += c;
    }
    const auto s0 = path_latency_stats(base, triple("A", "R", "B"));
    const auto s1 = path_latency_stats(shifted, triple("A", "R", "B"));
    EXPECT_LE(s0.min_ms, s0.median_ms);
    EXPECT_LE(s0.median_ms, s0.max_ms);
    EXPECT_NEAR(s1.min_ms, s0.min_ms + c, 1e-9);
    EXPECT_NEAR(s1.median_ms, s0.median_ms + c, 1e-9);
    EXPECT_NEAR(s1.max_ms, s0.max_ms + c, 1e-9);
  }
}

// Values produced by tests/oracles/geo_stats.py over the shipped fixture.
TEST(Stats, PinnedFixtureGoldens) {
  const auto cities = load_cities(data_path("geo/cities.csv"));
  const auto records = load_latency_records(data_path("geo/measurements.csv"));
  const std::map<std::string, std::array<double, 3>> golden = {
      {"Ljubljana", {24.745, 27.1955, 30.305}},
      {"Poplar", {29.178, 30.7735, 35.623}},
      {"Kosice", {25.763, 28.1425, 32.933}}};
  for (const auto& p : restrict_to_measured(enumerate_relays(cities, "Vienna", kIssy, 25), records)) {
    const auto s = path_latency_stats(records, p);
    const auto& want = golden.at(p.relay.name);
    EXPECT_NEAR(s.min_ms, want[0], 1e-9) << p.relay.name;
    EXPECT_NEAR(s.median_ms, want[1], 1e-9) << p.relay.name;
    EXPECT_NEAR(s.max_ms, want[2], 1e-9) << p.relay.name;
    EXPECT_EQ(s.samples, 24u);
  }
}

TEST(Ingest, CsvAndJsonAgree) {
  const auto csv = load_latency_records(data_path("geo/measurements.csv"));
  const auto json = load_latency_records(data_path("geo/measurements.json"));
  ASSERT_EQ(csv.size(), json.size());
  ASSERT_EQ(csv.size(), 792u);
  for (std::size_t i = 0; i < csv.size(); ++i) {
    EXPECT_EQ(csv[i].src, json[i].src);
    EXPECT_EQ(csv[i].dst, json[i].dst);
    EXPECT_DOUBLE_EQ(csv[i].rtt_ms, json[i].rtt_ms);
    EXPECT_DOUBLE_EQ(csv[i].timestamp_s, json[i].timestamp_s);
  }
}

TEST(Ingest, Diagnostics) {
  EXPECT_TRUE(throws_kind([] { parse_cities("name,country,latitude\nA,B,1\n", "c.csv"); },
                          ErrorKind::kDecode));
  try {
    parse_cities("name,country,latitude,longitude\nA,X,10,10\nB,Y,95,0\n", "c.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDecode);
    EXPECT_NE(std::string(e.what()).find("c.csv:3"), std::string::npos) << e.what();
  }
  EXPECT_TRUE(throws_kind(
      [] { parse_latency_records(R"([{"src":"A","dst":"B","rtt":-1,"timestamp":0}])", "m.json"); },
      ErrorKind::kDecode));
  const auto ok = parse_latency_records(
      R"([{"src":"A","dst":"B","rtt":1.5,"timestamp":7,"msm_id":3,"type":"ping"}])", "m.json");
  ASSERT_EQ(ok.size(), 1u);
  EXPECT_DOUBLE_EQ(ok[0].rtt_ms, 1.5);
}

TEST(Report, ListsRelaysAndStats) {
  const auto cities = load_cities(data_path("geo/cities.csv"));
  const auto records = load_latency_records(data_path("geo/measurements.csv"));
  const auto relays = restrict_to_measured(enumerate_relays(cities, "Vienna", kIssy, 25), records);
  std::map<std::string, LatencyStats> stats;
  for (const auto& p : relays) stats[p.path_id] = path_latency_stats(records, p);
  const auto text = render_report(relays, 25.0, &stats);
  for (const char* s : {"Kosice", "Poplar", "Ljubljana", "P1", "P3", "27.20"}) {
    EXPECT_NE(text.find(s), std::string::npos) << s << "\n" << text;
  }
  const auto bare = render_report(relays, 25.0);
  EXPECT_EQ(bare.find("27.20"), std::string::npos);
}

}  // namespace
}  // namespace nmp::geo
