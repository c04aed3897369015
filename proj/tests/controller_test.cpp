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
#include <memory>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace nmp::sdn {
namespace {

using audio::AudioMode;
using net::DelaySchedule;
using net::Link;
using net::Path;
using net::ScheduleSegment;
using net::SegmentKind;
using nmp::testing::Gen;
using nmp::testing::lab_profile;
using nmp::testing::throws_kind;

constexpr AudioMode k22_128{22050, 128};
constexpr AudioMode k44_64{44100, 64};

// Transmitter on switch 1, receiver on switch 5, three two-link paths
// through switches 2, 3 and 4. Only the 1-m links carry delay.
class Rig {
 public:
  explicit Rig(std::vector<DelaySchedule> schedules, std::vector<double> base,
               ControllerConfig cfg = {}, bool with_transport = true) {
    for (const char* s : {"1", "2", "3", "4", "5"}) topo_.add_switch(s);
    const char* mids[] = {"2", "3", "4"};
    for (std::size_t i = 0; i < 3; ++i) {
      topo_.add_link({"1", mids[i], base[i], schedules[i]});
      topo_.add_link({mids[i], "5", 0.0, {}});
    }
    topo_.add_host("tx", "1");
    topo_.add_host("rx", "5");
    monitor::MonitorConfig mcfg;
    mcfg.polling_period_s = cfg.polling_period_s;
    monitor_ = std::make_unique<monitor::Monitor>(
        topo_, std::vector<Path>{Path::parse("1-2-5"), Path::parse("1-3-5"), Path::parse("1-4-5")},
        mcfg);
    endpoints_.add_endpoint("tx");
    endpoints_.add_endpoint("rx");
    ctl_ = std::make_unique<Controller>(topo_, *monitor_, cfg, with_transport ? &endpoints_ : nullptr);
    ctl_->register_endpoint(lab_profile("tx"));
    ctl_->register_endpoint(lab_profile("rx"));
  }
  Rig(std::vector<double> base, ControllerConfig cfg = {}) : Rig({{}, {}, {}}, base, cfg) {}
  Rig(const Rig&) = delete;

  const EventRecord& request(double t, std::vector<AudioMode> modes = {},
                             double max_delay = 25.0) {
    monitor_->poll(t);
    PathRequest req{"s1", "tx", "rx", max_delay, std::numeric_limits<double>::infinity(),
                    std::move(modes)};
    return ctl_->handle_path_request(req, t);
  }
  std::vector<EventRecord> step(double t) {
    monitor_->poll(t);
    return ctl_->tick("s1", t);
  }
  double delay(const std::string& path, double t) const {
    return net::path_delay(topo_, Path::parse(path), t);
  }

  net::Topology topo_;
  std::unique_ptr<monitor::Monitor> monitor_;
  LoopbackEndpoints endpoints_;
  std::unique_ptr<Controller> ctl_;
};

DelaySchedule step_at(double t, double v) { return DelaySchedule({{t, SegmentKind::kStep, v}}); }

TEST(Register, StoresProfile) {
  Rig rig({1, 2, 3});
  EXPECT_EQ(rig.ctl_->profile("tx").size(), 8u);
  EXPECT_TRUE(rig.ctl_->is_registered("rx"));
  EXPECT_TRUE(throws_kind([&] { rig.ctl_->register_endpoint(lab_profile("tx")); },
                          ErrorKind::kConflict));
  EXPECT_TRUE(throws_kind([&] { rig.ctl_->register_endpoint(audio::AudioProfile("empty")); },
                          ErrorKind::kInput));
  EXPECT_TRUE(throws_kind([&] { rig.ctl_->profile("nobody"); }, ErrorKind::kNotFound));
}

TEST(PathRequestTest, AssignsCheapestPath) {
  Rig rig({3.0, 2.0, 2.5});
  const auto& e = rig.request(161, {k22_128, k44_64});
  EXPECT_EQ(e.event_id, 1);
  EXPECT_EQ(e.action, Action::kPathAssignment);
  EXPECT_EQ(e.current_path, "-");
  EXPECT_EQ(e.next_path, "1-3-5");
  EXPECT_DOUBLE_EQ(e.t_s, 161.0);
  EXPECT_EQ(rig.ctl_->session("s1").current_mode, k22_128);
  EXPECT_EQ(rig.endpoints_.mode_of("tx"), std::optional<AudioMode>(k22_128));
  EXPECT_EQ(rig.endpoints_.mode_of("rx"), std::optional<AudioMode>(k22_128));
}

TEST(PathRequestTest, TieGoesToSmallerLabel) {
  Rig rig({2.0, 2.0, 2.0});
  EXPECT_EQ(rig.request(0).next_path, "1-2-5");
}

TEST(PathRequestTest, RejectsWhenNothingFits) {
  Rig rig({30, 31, 32});
  try {
    rig.request(0);
    FAIL() << "expected rejection";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kRejected);
    const std::string what = e.what();
    for (const char* p : {"1-2-5", "1-3-5", "1-4-5"}) EXPECT_NE(what.find(p), std::string::npos);
  }
  EXPECT_FALSE(rig.ctl_->has_session("s1"));
}

TEST(PathRequestTest, UnknownEndpointIsNotFound) {
  Rig rig({1, 2, 3});
  rig.monitor_->poll(0);
  PathRequest req{"s1", "tx", "carol", 25.0, 5.0, {}};
  EXPECT_TRUE(throws_kind([&] { rig.ctl_->handle_path_request(req, 0); }, ErrorKind::kNotFound));
}

TEST(PathRequestTest, ModeFallsBackToMinimumBlocking) {
  Rig rig({24.0, 24.0, 24.0});
  rig.request(0, {k22_128, k44_64}, 25.0);
  EXPECT_EQ(rig.ctl_->session("s1").current_mode, k44_64);
}

TEST(Tick, ImprovementBelowThresholdIsIgnored) {
  Rig rig({step_at(10, -2.9), {}, {}}, {4.0, 3.0, 6.0});
  rig.request(0);
  EXPECT_EQ(rig.ctl_->session("s1").current_path.id, "1-3-5");
  rig.step(9);
  for (int t = 10; t < 20; ++t) EXPECT_TRUE(rig.step(t).empty()) << t;
  EXPECT_EQ(rig.ctl_->session("s1").current_path.id, "1-3-5");
}

TEST(Tick, ImprovementAtThresholdReroutes) {
  Rig rig({step_at(10, -3.0), {}, {}}, {4.0, 3.0, 6.0});
  rig.request(0);
  const auto ev = rig.step(10);
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].action, Action::kRerouting);
  EXPECT_EQ(ev[0].current_path, "1-3-5");
  EXPECT_EQ(ev[0].next_path, "1-2-5");
  EXPECT_EQ(ev[0].event_id, 2);
}

TEST(FlowRules, AlongCurrentPathBothWays) {
  Rig rig({step_at(5, 5.0), {}, {}}, {4.0, 2.0, 3.0});
  rig.request(0);
  const auto& table = rig.ctl_->flow_table();
  std::size_t total = 0;
  for (const auto& [sw, rules] : table) total += rules.size();
  EXPECT_EQ(total, 6u);
  for (const char* sw : {"1", "3", "5"}) EXPECT_EQ(table.at(sw).size(), 2u) << sw;
  EXPECT_EQ(replay_rules(table, rig.topo_, "s1", "tx", "rx", Direction::kForward),
            (std::vector<net::NodeId>{"1", "3", "5"}));
  EXPECT_EQ(replay_rules(table, rig.topo_, "s1", "tx", "rx", Direction::kReverse),
            (std::vector<net::NodeId>{"5", "3", "1"}));
}

TEST(FlowRules, RerouteReplacesRules) {
  Rig rig({{}, step_at(5, 5.0), {}}, {4.0, 2.0, 3.0});
  rig.request(0);
  const auto ev = rig.step(5);
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].next_path, "1-4-5");
  const auto& table = rig.ctl_->flow_table();
  EXPECT_EQ(table.count("3"), 0u);
  EXPECT_EQ(table.at("4").size(), 2u);
  EXPECT_EQ(replay_rules(table, rig.topo_, "s1", "tx", "rx", Direction::kForward),
            (std::vector<net::NodeId>{"1", "4", "5"}));
}

TEST(FlowRules, ReplayDetectsDamage) {
  Rig rig({4.0, 2.0, 3.0});
  rig.request(0);
  auto table = rig.ctl_->flow_table();
  table.erase("3");
  EXPECT_TRUE(throws_kind(
      [&] { replay_rules(table, rig.topo_, "s1", "tx", "rx", Direction::kForward); },
      ErrorKind::kInternal));
  auto looped = rig.ctl_->flow_table();
  looped["3"] = {{"3", "s1", Direction::kForward, "1"}};
  EXPECT_TRUE(throws_kind(
      [&] { replay_rules(looped, rig.topo_, "s1", "tx", "rx", Direction::kForward); },
      ErrorKind::kInternal));
}

TEST(EndToEnd, BlockingPlusNetwork) {
  Rig a({9.18, 10.0, 11.0});
  a.request(0, {k22_128});
  EXPECT_NEAR(a.ctl_->end_to_end("s1"), 20.00, 1e-9);
  Rig b({19.18, 21.0, 21.0});
  b.request(0, {k22_128, k44_64});
  EXPECT_EQ(b.ctl_->session("s1").current_mode, k44_64);
  EXPECT_NEAR(b.ctl_->end_to_end("s1"), 21.28, 1e-9);
  Rig c({0.0, 1.0, 1.0});
  c.request(0, {k44_64});
  EXPECT_DOUBLE_EQ(c.ctl_->end_to_end("s1"), 2.10);
}

TEST(Renegotiation, SwitchesToFirstFittingLowerMode) {
  Rig rig({step_at(10, 10.0), step_at(10, 10.0), step_at(10, 10.0)}, {9.18, 9.5, 9.8});
  rig.request(0, {k22_128, k44_64});
  EXPECT_EQ(rig.ctl_->session("s1").current_mode, k22_128);
  const auto ev = rig.step(10);
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].action, Action::kAudioModification);
  EXPECT_EQ(ev[0].current_path, ev[0].next_path);
  EXPECT_EQ(rig.ctl_->session("s1").current_mode, k44_64);
  EXPECT_EQ(rig.endpoints_.mode_of("tx"), std::optional<AudioMode>(k44_64));
  EXPECT_EQ(rig.endpoints_.mode_of("rx"), std::optional<AudioMode>(k44_64));
  EXPECT_NEAR(rig.ctl_->end_to_end("s1"), 21.28, 1e-9);
}

TEST(Renegotiation, ModeCommitsOnlyAfterBothAcks) {
  Rig rig({step_at(10, 10.0), step_at(10, 10.0), step_at(10, 10.0)}, {9.18, 9.5, 9.8});
  rig.request(0, {k22_128, k44_64});
  rig.endpoints_.set_drop_acks("rx", true);
  EXPECT_TRUE(rig.step(10).empty());
  const auto& s = rig.ctl_->session("s1");
  EXPECT_EQ(s.current_mode, k22_128);
  ASSERT_TRUE(s.pending_mode.has_value());
  EXPECT_EQ(*s.pending_mode, k44_64);
  EXPECT_TRUE(rig.step(11).empty());
  EXPECT_EQ(s.current_mode, k22_128);

  std::uint32_t reconfig_seq = 0;
  for (const auto& line : rig.ctl_->transcript()) {
    const auto m = proto::decode(line);
    if (m.kind() == proto::MessageKind::kAudioReconfig && m.to == "rx") reconfig_seq = m.seq;
  }
  ASSERT_NE(reconfig_seq, 0u);
  auto late = rig.endpoints_.make("rx", rig.ctl_->id(), std::string("s1"),
                                  proto::AckBody{reconfig_seq});
  rig.ctl_->receive(late, 11.5);
  EXPECT_EQ(s.current_mode, k44_64);
  EXPECT_FALSE(s.pending_mode.has_value());
  ASSERT_FALSE(s.history.empty());
  EXPECT_EQ(s.history.back().action, Action::kAudioModification);
  rig.ctl_->receive(late, 11.6);
  EXPECT_EQ(std::count_if(s.history.begin(), s.history.end(),
                          [](const EventRecord& e) { return e.action == Action::kAudioModification; }),
            1);
}

TEST(BestEffort, EmittedOnceWhileCongested) {
  const DelaySchedule ramp({{5, SegmentKind::kRamp, 1.0}});
  Rig rig({ramp, ramp, ramp}, {2.0, 2.0, 2.0});
  rig.request(0, {k22_128, k44_64});
  int best_effort = 0;
  for (int t = 1; t < 60; ++t) {
    for (const auto& e : rig.step(t)) best_effort += e.action == Action::kBestEffort;
  }
  EXPECT_EQ(best_effort, 1);
  EXPECT_TRUE(rig.ctl_->session("s1").best_effort);
  EXPECT_EQ(rig.ctl_->session("s1").current_mode, k44_64);
}

TEST(BestEffort, RearmsAfterRecovery) {
  const DelaySchedule bump({{5, SegmentKind::kStep, 30.0}, {10, SegmentKind::kStep, -30.0},
                            {15, SegmentKind::kStep, 30.0}});
  Rig rig({bump, bump, bump}, {1.0, 1.0, 1.0});
  rig.request(0, {k44_64});
  int best_effort = 0;
  for (int t = 1; t < 20; ++t) {
    for (const auto& e : rig.step(t)) best_effort += e.action == Action::kBestEffort;
  }
  EXPECT_EQ(best_effort, 2);
}

TEST(Config, Validation) {
  ControllerConfig c;
  EXPECT_NO_THROW(c.validate());
  c.guard_ms = 25.0;
  EXPECT_TRUE(throws_kind([&] { c.validate(); }, ErrorKind::kConfig));
  c = {};
  c.reroute_threshold_ms = 0.0;
  EXPECT_TRUE(throws_kind([&] { c.validate(); }, ErrorKind::kConfig));
  c = {};
  c.ept_ms = -1;
  EXPECT_TRUE(throws_kind([&] { c.validate(); }, ErrorKind::kConfig));
}

// ---- properties over random delay schedules ----

DelaySchedule random_schedule(Gen& g, double horizon) {
  std::vector<ScheduleSegment> segs;
  double t = g.real_in(0, 10);
  while (t < horizon && segs.size() < 8) {
    if (g.coin()) {
      segs.push_back({t, SegmentKind::kStep, g.real_in(-4, 6)});
    } else {
      segs.push_back({t, SegmentKind::kRamp, g.real_in(-0.3, 0.4)});
    }
    t += g.real_in(1, 25);
  }
  return DelaySchedule(segs);
}

struct Trace {
  std::vector<EventRecord> events;
  std::vector<std::string> transcript;
};

TEST(Properties, HysteresisMonotonicityAndSoundness) {
  Gen g(8128);
  const auto lab = lab_profile();
  for (int trial = 0; trial < 120; ++trial) {
    const double horizon = 120;
    Rig rig({random_schedule(g, horizon), random_schedule(g, horizon), random_schedule(g, horizon)},
            {g.real_in(0, 8), g.real_in(0, 8), g.real_in(0, 8)});
    try {
      rig.request(0);
    } catch (const Error& e) {
      ASSERT_EQ(e.kind(), ErrorKind::kRejected);
      continue;
    }
    const auto& s = rig.ctl_->session("s1");
    int last_id = s.history.back().event_id;
    double last_t = 0;
    for (int t = 1; t <= horizon; ++t) {
      const auto before_mode = s.current_mode;
      const auto events = rig.step(t);
      for (const auto& e : events) {
        EXPECT_GT(e.event_id, last_id);
        EXPECT_GE(e.t_s, last_t);
        last_id = e.event_id;
        last_t = e.t_s;
        if (e.action == Action::kRerouting) {
          EXPECT_GE(rig.delay(e.current_path, t) - rig.delay(e.next_path, t), 2.0 - 1e-9)
              << "trial " << trial << " t=" << t;
        }
        if (e.action == Action::kAudioModification) {
          EXPECT_LT(audio::total_blocking(lab, lab, s.current_mode),
                    audio::total_blocking(lab, lab, before_mode));
        }
      }
      EXPECT_LE(audio::total_blocking(lab, lab, s.current_mode),
                audio::total_blocking(lab, lab, before_mode));
      const auto& table = rig.ctl_->flow_table();
      EXPECT_EQ(replay_rules(table, rig.topo_, "s1", "tx", "rx", Direction::kForward),
                s.current_path.hops);
      auto reversed = s.current_path.hops;
      std::reverse(reversed.begin(), reversed.end());
      EXPECT_EQ(replay_rules(table, rig.topo_, "s1", "tx", "rx", Direction::kReverse), reversed);
    }
  }
}

TEST(Properties, EventualOptimalityAndNoFlapping) {
  Gen g(31337);
  for (int trial = 0; trial < 200; ++trial) {
    const double change_at = g.int_in(5, 30);
    std::vector<DelaySchedule> scheds;
    for (int i = 0; i < 3; ++i) scheds.push_back(step_at(change_at, g.real_in(-3, 8)));
    Rig rig(scheds, {g.real_in(3, 9), g.real_in(3, 9), g.real_in(3, 9)});
    rig.request(0);
    const auto& s = rig.ctl_->session("s1");
    int reroutes_after_change = 0;
    for (int t = 1; t <= change_at + 40; ++t) {
      for (const auto& e : rig.step(t)) {
        if (e.action != Action::kRerouting) continue;
        if (t >= change_at) ++reroutes_after_change;
        EXPECT_LE(t, change_at + 1.0) << "late reroute, trial " << trial;
      }
      if (t >= change_at + 1) {
        double best = 1e9;
        for (const char* p : {"1-2-5", "1-3-5", "1-4-5"}) best = std::min(best, rig.delay(p, t));
        EXPECT_LT(rig.delay(s.current_path.id, t) - best, 2.0 + 1e-9) << "trial " << trial;
      }
    }
    EXPECT_LE(reroutes_after_change, 3);
  }
}

TEST(Properties, StaticDelaysNeverReroute) {
  Gen g(4242);
  for (int trial = 0; trial < 200; ++trial) {
    Rig rig({g.real_in(0, 10), g.real_in(0, 10), g.real_in(0, 10)});
    rig.request(0);
    int reroutes = 0;
    for (int t = 1; t < 50; ++t) {
      for (const auto& e : rig.step(t)) reroutes += e.action == Action::kRerouting;
    }
    EXPECT_EQ(reroutes, 0);
  }
}

// With the hysteresis threshold a strictly better path may be declined,
// so the delay guarantee is checked against the paths the controller is
// allowed to prefer: the current one, or one at least threshold better.
TEST(Properties, EptGuaranteeOutsideHysteresisBand) {
  Gen g(777);
  const auto lab = lab_profile();
  const auto modes = audio::default_quality_order(lab, lab);
  int checked = 0;
  int band_cases = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const double change_at = g.int_in(5, 20);
    std::vector<DelaySchedule> scheds;
    for (int i = 0; i < 3; ++i) scheds.push_back(step_at(change_at, g.real_in(-2, 20)));
    Rig rig(scheds, {g.real_in(1, 6), g.real_in(1, 6), g.real_in(1, 6)});
    rig.request(0);
    const auto& s = rig.ctl_->session("s1");
    for (int t = 1; t <= change_at + 10; ++t) {
      rig.step(t);
      if (t < change_at + 1) continue;
      bool any_feasible = false;
      double best = 1e9;
      for (const char* p : {"1-2-5", "1-3-5", "1-4-5"}) {
        best = std::min(best, rig.delay(p, t));
        for (const auto& m : modes) {
          any_feasible |= audio::total_blocking(lab, lab, m) + rig.delay(p, t) <= 25.0;
        }
      }
      if (!any_feasible) continue;
      const double cur = rig.delay(s.current_path.id, t);
      if (cur - best >= 2.0 - 1e-9) {
        ADD_FAILURE() << "controller stayed on a path the threshold allows leaving";
        continue;
      }
      bool fits_current = false;
      for (const auto& m : modes) fits_current |= audio::total_blocking(lab, lab, m) + cur <= 25.0;
      if (!fits_current) {
        ++band_cases;
        continue;
      }
      ++checked;
      EXPECT_LE(rig.ctl_->end_to_end("s1"), 25.0 + 1e-9) << "trial " << trial << " t=" << t;
    }
  }
  EXPECT_GT(checked, 500);
  RecordProperty("hysteresis_band_cases", band_cases);
}

TEST(Properties, DeterministicReplay) {
  auto run = [](std::uint64_t seed) {
    Gen g(seed);
    const double horizon = 90;
    Rig rig({random_schedule(g, horizon), random_schedule(g, horizon), random_schedule(g, horizon)},
            {g.real_in(0, 6), g.real_in(0, 6), g.real_in(0, 6)});
    Trace tr;
    try {
      rig.request(0);
    } catch (const Error&) {
      return tr;
    }
    for (int t = 1; t <= horizon; ++t) rig.step(t);
    tr.events = rig.ctl_->session("s1").history;
    tr.transcript = rig.ctl_->transcript();
    return tr;
  };
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto a = run(seed);
    const auto b = run(seed);
    EXPECT_EQ(a.transcript, b.transcript);
    ASSERT_EQ(a.events.size(), b.events.size());
    for (std::size_t i = 0; i < a.events.size(); ++i) {
      EXPECT_EQ(a.events[i].t_s, b.events[i].t_s);
      EXPECT_EQ(a.events[i].detail, b.events[i].detail);
      EXPECT_EQ(a.events[i].next_path, b.events[i].next_path);
    }
  }
}

TEST(Transport, NullTransportCommitsImmediately) {
  ControllerConfig cfg;
  Rig rig({step_at(10, 10.0), step_at(10, 10.0), step_at(10, 10.0)}, {9.18, 9.5, 9.8}, cfg, false);
  rig.request(0, {k22_128, k44_64});
  const auto ev = rig.step(10);
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(rig.ctl_->session("s1").current_mode, k44_64);
}

}  // namespace
}  // namespace nmp::sdn
