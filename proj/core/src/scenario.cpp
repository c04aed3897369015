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

#include "nmp/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <json.hpp>
#include <set>

#include "nmp/error.hpp"
#include "nmp/text_io.hpp"

namespace nmp::scenario {

using nlohmann::json;

namespace {

constexpr double kEps = 1e-9;

class Field {
 public:
  Field(const json& j, std::string path, const std::string* source)
      : j_(&j), path_(std::move(path)), source_(source) {}

  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorKind::kConfig, *source_ + ": " + (path_.empty() ? "<root>" : path_) + ": " + what);
  }

  const json& raw() const { return *j_; }
  const std::string& path() const { return path_; }

  bool has(const char* key) const { return j_->is_object() && j_->contains(key); }

  Field operator[](const char* key) const {
    if (!j_->is_object()) error("expected an object");
    auto it = j_->find(key);
    if (it == j_->end()) Field(*j_, child(key), source_).error("missing required field");
    return Field(*it, child(key), source_);
  }

  std::optional<Field> optional(const char* key) const {
    if (!j_->is_object()) error("expected an object");
    auto it = j_->find(key);
    if (it == j_->end() || it->is_null()) return std::nullopt;
    return Field(*it, child(key), source_);
  }

  std::vector<Field> items() const {
    if (!j_->is_array()) error("expected an array");
    std::vector<Field> out;
    for (std::size_t i = 0; i < j_->size(); ++i) {
      out.emplace_back((*j_)[i], path_ + "[" + std::to_string(i) + "]", source_);
    }
    return out;
  }

  void only(std::initializer_list<const char*> keys) const {
    if (!j_->is_object()) error("expected an object");
    for (auto it = j_->begin(); it != j_->end(); ++it) {
      const bool known = std::any_of(keys.begin(), keys.end(),
                                     [&](const char* k) { return it.key() == k; });
      if (!known) Field(it.value(), child(it.key().c_str()), source_).error("unknown field");
    }
  }

  std::string str() const {
    if (!j_->is_string()) error("expected a string");
    return j_->get<std::string>();
  }
  double num() const {
    if (!j_->is_number()) error("expected a number");
    const double v = j_->get<double>();
    if (!std::isfinite(v)) error("expected a finite number");
    return v;
  }
  long long integer() const {
    if (!j_->is_number_integer()) error("expected an integer");
    return j_->get<long long>();
  }
  bool boolean() const {
    if (!j_->is_boolean()) error("expected true or false");
    return j_->get<bool>();
  }
  /// Accepts "7" or 7 for node ids.
  std::string id() const {
    if (j_->is_string()) return j_->get<std::string>();
    if (j_->is_number_integer()) return std::to_string(j_->get<long long>());
    error("expected a node id (string or integer)");
  }

 private:
  std::string child(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* j_;
  std::string path_;
  const std::string* source_;
};

audio::AudioMode read_mode(const Field& f) {
  f.only({"sampling_rate", "frame_size", "d0_ms"});
  audio::AudioMode m;
  m.sampling_rate = static_cast<int>(f["sampling_rate"].integer());
  m.frame_size = static_cast<int>(f["frame_size"].integer());
  if (auto d0 = f.optional("d0_ms")) m.d0_ms = d0->num();
  try {
    audio::validate(m);
  } catch (const Error& e) {
    f.error(e.what());
  }
  return m;
}

net::DelaySchedule read_schedule(const Field& f) {
  std::vector<net::ScheduleSegment> segs;
  for (const auto& s : f.items()) {
    s.only({"start_s", "kind", "value"});
    net::ScheduleSegment seg;
    seg.start_s = s["start_s"].num();
    const auto kind = s["kind"].str();
    if (kind == "step") {
      seg.kind = net::SegmentKind::kStep;
    } else if (kind == "ramp") {
      seg.kind = net::SegmentKind::kRamp;
    } else {
      s["kind"].error("expected \"step\" or \"ramp\"");
    }
    seg.value = s["value"].num();
    segs.push_back(seg);
  }
  try {
    return net::DelaySchedule(std::move(segs));
  } catch (const Error& e) {
    f.error(e.what());
  }
}

EndpointSpec read_endpoint(const Field& f) {
  f.only({"host", "switch", "profile", "drop_acks"});
  EndpointSpec e;
  e.host = f["host"].id();
  e.attach = f["switch"].id();
  e.profile = f.has("profile") ? f["profile"].str() : e.host;
  if (auto d = f.optional("drop_acks")) e.drop_acks = d->boolean();
  return e;
}

std::vector<audio::AudioProfile> read_profiles(const Field& f, const std::string& base_dir) {
  f.only({"file", "inline", "fill_theoretical"});
  if (f.has("file") == f.has("inline")) f.error("give exactly one of \"file\" or \"inline\"");
  try {
    if (f.has("file")) {
      std::filesystem::path p = f["file"].str();
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      try {
        return audio::load_profiles(p.string());
      } catch (const Error& e) {
        f["file"].error(e.what());
      }
    }
    return audio::parse_profiles(f["inline"].raw().dump(), f.path() + ".inline");
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kConfig) throw;
    f.error(e.what());
  }
}

const audio::AudioProfile& pick_profile(const std::vector<audio::AudioProfile>& all,
                                        const std::string& id, const Field& where) {
  for (const auto& p : all) {
    if (p.endpoint_id() == id) return p;
  }
  (where.has("profile") ? where["profile"] : where).error("no profile for endpoint id '" + id + "'");
}

std::string join_ids(const std::vector<int>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(ids[i]);
  }
  return s;
}

std::string opt_fixed(const std::optional<double>& v) { return v ? text::fixed(*v) : ""; }

}  // namespace

namespace {

struct Assembly {
  net::Topology topology;
  std::vector<net::Path> paths;
};

Assembly assemble(const ScenarioConfig& c, const std::string& prefix) {
  Assembly a;
  try {
    for (const auto& s : c.switches) a.topology.add_switch(s);
    for (const auto& l : c.links) a.topology.add_link(l);
  } catch (const Error& e) {
    fail(ErrorKind::kConfig, prefix + ": topology: " + e.what());
  }
  for (const auto* ep : {&c.transmitter, &c.receiver}) {
    try {
      a.topology.add_host(ep->host, ep->attach);
    } catch (const Error& e) {
      fail(ErrorKind::kConfig, prefix + ": " + (ep == &c.transmitter ? "transmitter" : "receiver") +
                                   ".switch: " + e.what());
    }
  }
  if (c.paths.empty()) {
    a.paths = net::enumerate_paths(a.topology, c.transmitter.host, c.receiver.host, c.hop_limit);
    if (a.paths.empty()) {
      fail(ErrorKind::kConfig, prefix + ": no path joins " + c.transmitter.host + " and " +
                                   c.receiver.host + " within hop_limit");
    }
  } else {
    for (std::size_t i = 0; i < c.paths.size(); ++i) {
      const std::string where = prefix + ": paths[" + std::to_string(i) + "]";
      net::Path p;
      try {
        p = net::Path::parse(c.paths[i]);
        net::validate_path(a.topology, p);
      } catch (const Error& e) {
        fail(ErrorKind::kConfig, where + ": " + e.what());
      }
      if (p.hops.front() != c.transmitter.attach || p.hops.back() != c.receiver.attach) {
        fail(ErrorKind::kConfig, where + ": path must run from switch " + c.transmitter.attach +
                                     " to switch " + c.receiver.attach);
      }
      a.paths.push_back(std::move(p));
    }
  }
  return a;
}

}  // namespace

ScenarioConfig parse_config(std::string_view text, const std::string& source,
                            const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kConfig, source + ": malformed JSON: " + e.what());
  }
  const Field root(doc, "", &source);
  root.only({"name", "session", "seed", "topology", "transmitter", "receiver", "profiles",
             "paths", "hop_limit", "modes", "request", "controller", "monitor", "noise",
             "timeline", "notes"});

  ScenarioConfig c;
  c.name = root.has("name") ? root["name"].str() : std::filesystem::path(source).stem().string();
  if (auto s = root.optional("session")) c.session_id = s->str();
  if (auto s = root.optional("seed")) {
    const auto v = s->integer();
    if (v < 0) s->error("seed must be >= 0");
    c.seed = static_cast<std::uint64_t>(v);
  }

  const auto topo = root["topology"];
  topo.only({"switches", "links"});
  for (const auto& s : topo["switches"].items()) c.switches.push_back(s.id());
  for (const auto& l : topo["links"].items()) {
    l.only({"a", "b", "base_delay_ms", "schedule"});
    net::Link link;
    link.a = l["a"].id();
    link.b = l["b"].id();
    link.base_delay_ms = l.has("base_delay_ms") ? l["base_delay_ms"].num() : 0.0;
    if (link.base_delay_ms < 0) l["base_delay_ms"].error("must be >= 0");
    if (auto s = l.optional("schedule")) link.schedule = read_schedule(*s);
    c.links.push_back(std::move(link));
  }

  c.transmitter = read_endpoint(root["transmitter"]);
  c.receiver = read_endpoint(root["receiver"]);
  if (c.transmitter.host == c.receiver.host) root["receiver"]["host"].error("must differ from transmitter host");

  if (auto p = root.optional("paths")) {
    for (const auto& item : p->items()) c.paths.push_back(item.str());
  }
  if (auto h = root.optional("hop_limit")) {
    c.hop_limit = static_cast<int>(h->integer());
    if (c.hop_limit < 1) h->error("must be >= 1");
  }
  if (auto m = root.optional("modes")) {
    for (const auto& item : m->items()) c.modes.push_back(read_mode(item));
  }

  const auto prof = root["profiles"];
  const auto all = read_profiles(prof, base_dir);
  c.tx_profile = pick_profile(all, c.transmitter.profile, root["transmitter"]);
  c.rx_profile = pick_profile(all, c.receiver.profile, root["receiver"]);
  c.tx_profile.set_endpoint_id(c.transmitter.host);
  c.rx_profile.set_endpoint_id(c.receiver.host);
  if (auto fill = prof.optional("fill_theoretical"); fill && fill->boolean()) {
    c.tx_profile = audio::complete_with_theoretical(c.tx_profile, c.modes);
    c.rx_profile = audio::complete_with_theoretical(c.rx_profile, c.modes);
  }
  if (auto m = root.optional("modes")) {
    const auto items = m->items();
    for (std::size_t i = 0; i < c.modes.size(); ++i) {
      if (!c.tx_profile.contains(c.modes[i]) || !c.rx_profile.contains(c.modes[i])) {
        items[i].error("mode " + audio::to_string(c.modes[i]) + " missing from an endpoint profile");
      }
    }
  }

  if (auto r = root.optional("request")) {
    r->only({"max_delay_ms", "max_jitter_ms"});
    if (auto v = r->optional("max_delay_ms")) c.max_delay_ms = v->num();
    if (auto v = r->optional("max_jitter_ms")) c.max_jitter_ms = v->num();
    if (!(c.max_delay_ms > 0)) (*r)["max_delay_ms"].error("must be > 0");
    if (!(c.max_jitter_ms >= 0)) (*r)["max_jitter_ms"].error("must be >= 0");
  }

  if (auto k = root.optional("controller")) {
    k->only({"ept_ms", "reroute_threshold_ms", "guard_ms", "polling_period_s", "trend_prediction"});
    if (auto v = k->optional("ept_ms")) c.controller.ept_ms = v->num();
    if (auto v = k->optional("reroute_threshold_ms")) c.controller.reroute_threshold_ms = v->num();
    if (auto v = k->optional("guard_ms")) c.controller.guard_ms = v->num();
    if (auto v = k->optional("polling_period_s")) c.controller.polling_period_s = v->num();
    if (auto v = k->optional("trend_prediction")) c.controller.trend_prediction = v->boolean();
    try {
      c.controller.validate();
    } catch (const Error& e) {
      k->error(e.what());
    }
  }
  c.monitor.polling_period_s = c.controller.polling_period_s;

  if (auto m = root.optional("monitor")) {
    m->only({"window", "one_way_is_half_rtt", "ewma_alpha", "stale_after_periods", "outages"});
    if (auto v = m->optional("window")) {
      if (v->integer() < 1) v->error("must be >= 1");
      c.monitor.window = static_cast<std::size_t>(v->integer());
    }
    if (auto v = m->optional("one_way_is_half_rtt")) c.monitor.one_way_is_half_rtt = v->boolean();
    if (auto v = m->optional("ewma_alpha")) c.monitor.ewma_alpha = v->num();
    if (auto v = m->optional("stale_after_periods")) {
      c.monitor.stale_after_periods = static_cast<int>(v->integer());
    }
    try {
      c.monitor.validate();
    } catch (const Error& e) {
      m->error(e.what());
    }
    if (auto o = m->optional("outages")) {
      for (const auto& item : o->items()) {
        item.only({"path", "from_s", "to_s"});
        c.outages.push_back({item["path"].str(), item["from_s"].num(), item["to_s"].num()});
        if (!(c.outages.back().to_s > c.outages.back().from_s)) item.error("to_s must exceed from_s");
      }
    }
  }

  if (auto n = root.optional("noise")) {
    n->only({"low_ms", "high_ms"});
    c.noise = NoiseSpec{(*n)["low_ms"].num(), (*n)["high_ms"].num()};
    if (c.noise->high_ms < c.noise->low_ms) n->error("high_ms must be >= low_ms");
  }

  const auto tl = root["timeline"];
  tl.only({"start_s", "path_request_s", "transmission_start_s", "end_s"});
  c.timeline.start_s = tl["start_s"].num();
  c.timeline.end_s = tl["end_s"].num();
  c.timeline.path_request_s =
      tl.has("path_request_s") ? tl["path_request_s"].num() : c.timeline.start_s;
  c.timeline.transmission_start_s =
      tl.has("transmission_start_s") ? tl["transmission_start_s"].num() : c.timeline.path_request_s;
  if (!(c.timeline.end_s > c.timeline.start_s)) tl["end_s"].error("must be after start_s");
  if (c.timeline.path_request_s < c.timeline.start_s || c.timeline.path_request_s > c.timeline.end_s) {
    tl["path_request_s"].error("must lie within [start_s, end_s]");
  }
  if (c.timeline.transmission_start_s < c.timeline.path_request_s ||
      c.timeline.transmission_start_s > c.timeline.end_s) {
    tl["transmission_start_s"].error("must lie within [path_request_s, end_s]");
  }
  assemble(c, source);
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = text::read_file(path);
  } catch (const Error& e) {
    fail(ErrorKind::kConfig, e.what());
  }
  const auto dir = std::filesystem::path(path).parent_path().string();
  return parse_config(text, path, dir.empty() ? "." : dir);
}

bool RunResult::best_effort() const {
  return std::any_of(events.begin(), events.end(), [](const sdn::EventRecord& e) {
    return e.action == sdn::Action::kBestEffort;
  });
}

int RunResult::exit_code() const {
  return (rejection || best_effort()) ? kExitDegraded : kExitOk;
}


RunResult run_scenario(const ScenarioConfig& c) {
  auto assembly = assemble(c, c.name);
  const auto& topo = assembly.topology;

  std::optional<net::NoiseModel> noise;
  if (c.noise) noise = net::NoiseModel::uniform(c.noise->low_ms, c.noise->high_ms, c.seed);

  auto mon_cfg = c.monitor;
  mon_cfg.polling_period_s = c.controller.polling_period_s;
  std::unique_ptr<monitor::Monitor> mon;
  try {
    mon = std::make_unique<monitor::Monitor>(topo, assembly.paths, mon_cfg, noise);
    for (const auto& o : c.outages) mon->add_outage(o);
  } catch (const Error& e) {
    fail(ErrorKind::kConfig, c.name + ": " + e.what());
  }

  sdn::LoopbackEndpoints endpoints;
  endpoints.add_endpoint(c.transmitter.host);
  endpoints.add_endpoint(c.receiver.host);
  endpoints.set_drop_acks(c.transmitter.host, c.transmitter.drop_acks);
  endpoints.set_drop_acks(c.receiver.host, c.receiver.drop_acks);
  sdn::Controller ctl(topo, *mon, c.controller, &endpoints);

  RunResult r;
  for (const auto& p : assembly.paths) r.path_ids.push_back(p.id);

  const double period = c.controller.polling_period_s;
  const auto& tl = c.timeline;
  const auto polls = static_cast<long long>(std::floor((tl.end_s - tl.start_s) / period + kEps));

  net::EventLoop loop(tl.start_s);
  bool session_open = false;
  double assigned_at = 0.0;
  std::set<std::pair<net::NodeId, net::NodeId>> clamp_reported;
  std::vector<int> pending_ids;
  std::size_t seen_events = 0;
  const std::string& sid = c.session_id;

  auto collect_events = [&] {
    if (!session_open) return;
    const auto& h = ctl.session(sid).history;
    for (; seen_events < h.size(); ++seen_events) pending_ids.push_back(h[seen_events].event_id);
  };

  auto warn = [&](double t, const std::string& what) {
    if (session_open) {
      ctl.record_warning(sid, t, what);
    } else {
      r.warnings.push_back("t=" + text::fixed(t) + " " + what);
    }
  };

  for (long long k = 0; k <= polls; ++k) {
    const double t = tl.start_s + static_cast<double>(k) * period;
    loop.schedule(t, 0, [&](double now) {
      for (const auto& s : mon->poll(now)) {
        const auto& st = mon->stats(s.path_id);
        r.monitor.push_back({now, s.path_id, s.rtt_ms, s.one_way_ms,
                             st.sample_count >= 2 ? std::optional<double>(st.jitter_ms)
                                                  : std::nullopt});
      }
      for (const auto& l : mon->last_clamped_links()) {
        if (clamp_reported.insert(l).second) {
          warn(now, "link " + l.first + "-" + l.second + " delay clamped at 0 ms");
        }
      }
    });
    loop.schedule(t, 3, [&](double now) {
      if (session_open && now > assigned_at + kEps) ctl.tick(sid, now);
    });
    loop.schedule(t, 4, [&](double now) {
      collect_events();
      TimeseriesRow row;
      row.t_s = now;
      for (const auto& p : assembly.paths) {
        row.delays_ms.push_back(mon->has_samples(p.id)
                                    ? std::optional<double>(mon->current_delay(p.id))
                                    : std::nullopt);
      }
      if (session_open) {
        const auto& s = ctl.session(sid);
        row.current_path = s.current_path.id;
        row.mode = audio::to_string(s.current_mode);
        row.total_blocking_ms = audio::total_blocking(c.tx_profile, c.rx_profile, s.current_mode);
        row.e2e_ms = ctl.end_to_end(sid);
      }
      row.event_ids = std::move(pending_ids);
      pending_ids.clear();
      row.streaming = session_open && now + kEps >= tl.transmission_start_s;
      r.timeseries.push_back(std::move(row));
    });
  }

  loop.schedule(tl.start_s, 1, [&](double now) {
    for (const auto* ep : {&c.transmitter, &c.receiver}) {
      const auto& prof = ep == &c.transmitter ? c.tx_profile : c.rx_profile;
      std::vector<audio::ProfileEntry> entries(prof.entries().begin(), prof.entries().end());
      auto msg = endpoints.make(ep->host, ctl.id(), sid, proto::RegisterBody{ep->host, entries});
      ctl.receive(msg, now);
    }
  });

  loop.schedule(tl.path_request_s, 2, [&](double now) {
    auto msg = endpoints.make(
        c.transmitter.host, ctl.id(), sid,
        proto::PathRequestBody{c.transmitter.host, c.receiver.host, c.max_delay_ms,
                               c.max_jitter_ms, c.modes});
    try {
      ctl.receive(msg, now);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kRejected) throw;
      r.rejection = e.what();
      return;
    }
    session_open = ctl.has_session(sid);
    assigned_at = now;
    if (!session_open) r.rejection = "path request was not accepted";
  });

  loop.run_until(tl.end_s + kEps);

  r.transcript = ctl.transcript();
  if (session_open) {
    const auto& s = ctl.session(sid);
    r.events = s.history;
    r.initial_mode = s.initial_mode;
    r.final_mode = s.current_mode;
    if (mon->has_samples(s.current_path.id)) {
      r.final_network_ms = mon->current_delay(s.current_path.id);
      r.final_e2e_ms = ctl.end_to_end(sid);
      r.counterfactual_e2e_ms =
          audio::total_blocking(c.tx_profile, c.rx_profile, s.initial_mode) + *r.final_network_ms;
      r.gain_percent = audio::gain_percent(*r.counterfactual_e2e_ms, *r.final_e2e_ms);
    }
  }
  return r;
}

std::string events_csv(const RunResult& r) {
  std::string out = "time_s,event_id,current_path,next_path,action\n";
  for (const auto& e : r.events) {
    out += text::fixed(e.t_s) + "," + std::to_string(e.event_id) + "," + e.current_path + "," +
           e.next_path + "," + std::string(sdn::to_string(e.action)) + "\n";
  }
  return out;
}

std::string timeseries_csv(const RunResult& r) {
  std::string out = "t_s";
  for (const auto& id : r.path_ids) out += ",delay_" + id + "_ms";
  out += ",current_path,mode,total_blocking_ms,e2e_ms,events,streaming\n";
  for (const auto& row : r.timeseries) {
    out += text::fixed(row.t_s);
    for (const auto& d : row.delays_ms) out += "," + opt_fixed(d);
    out += "," + row.current_path + "," + row.mode + "," + opt_fixed(row.total_blocking_ms) + "," +
           opt_fixed(row.e2e_ms) + "," + join_ids(row.event_ids) + "," +
           (row.streaming ? "1" : "0") + "\n";
  }
  return out;
}

std::string monitor_csv(const RunResult& r) {
  std::string out = "t,path_id,rtt_ms,one_way_ms,jitter_ms\n";
  for (const auto& m : r.monitor) {
    out += text::fixed(m.t_s) + "," + m.path_id + "," + text::fixed(m.rtt_ms) + "," +
           text::fixed(m.one_way_ms) + "," + opt_fixed(m.jitter_ms) + "\n";
  }
  return out;
}

std::string transcript_jsonl(const RunResult& r) {
  std::string out;
  for (const auto& line : r.transcript) out += line + "\n";
  return out;
}

std::string report_text(const ScenarioConfig& c, const RunResult& r) {
  std::string out;
  out += "scenario " + c.name + "\n";
  out += "timeline " + text::fixed(c.timeline.start_s) + " s to " + text::fixed(c.timeline.end_s) +
         " s, polling every " + text::fixed(c.controller.polling_period_s) + " s\n";
  out += "EPT " + text::fixed(c.controller.ept_ms) + " ms, reroute threshold " +
         text::fixed(c.controller.reroute_threshold_ms) + " ms, guard " +
         text::fixed(c.controller.guard_ms) + " ms\n";
  out += "paths";
  for (const auto& p : r.path_ids) out += " " + p;
  out += "\n\n";

  if (r.rejection) out += "path request rejected: " + *r.rejection + "\n\n";
  for (const auto& w : r.warnings) out += "warning: " + w + "\n";

  out += "Time (s)  Event ID  Current Path  Next Path  Action              Detail\n";
  for (const auto& e : r.events) {
    char line[512];
    std::snprintf(line, sizeof line, "%8s  %8d  %-12s  %-9s  %-18s  %s\n",
                  text::fixed(e.t_s).c_str(), e.event_id, e.current_path.c_str(),
                  e.next_path.c_str(), std::string(sdn::to_string(e.action)).c_str(),
                  e.detail.c_str());
    out += line;
  }
  out += "\n";
  if (r.initial_mode) out += "initial mode          " + audio::to_string(*r.initial_mode) + "\n";
  if (r.final_mode) out += "final mode            " + audio::to_string(*r.final_mode) + "\n";
  if (r.final_network_ms) out += "final network delay   " + text::fixed(*r.final_network_ms) + " ms\n";
  if (r.final_e2e_ms) out += "final end-to-end      " + text::fixed(*r.final_e2e_ms) + " ms\n";
  if (r.counterfactual_e2e_ms) {
    out += "without interaction   " + text::fixed(*r.counterfactual_e2e_ms) + " ms\n";
  }
  if (r.gain_percent) out += "gain                  " + text::fixed(*r.gain_percent) + " %\n";
  if (r.initial_mode && r.final_mode) {
    const double b0 = audio::total_blocking(c.tx_profile, c.rx_profile, *r.initial_mode);
    const double b1 = audio::total_blocking(c.tx_profile, c.rx_profile, *r.final_mode);
    out += "audio gain            " + text::fixed(audio::gain_audio_percent(b0, b1)) + " %\n";
  }
  out += "best effort reached   " + std::string(r.best_effort() ? "yes" : "no") + "\n";
  out += "exit status           " + std::to_string(r.exit_code()) + "\n";
  return out;
}

void write_outputs(const ScenarioConfig& c, const RunResult& r, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::kInput, "cannot create output directory " + dir + ": " + ec.message());
  const std::filesystem::path d(dir);
  text::write_file((d / "events.csv").string(), events_csv(r));
  text::write_file((d / "timeseries.csv").string(), timeseries_csv(r));
  text::write_file((d / "monitor.csv").string(), monitor_csv(r));
  text::write_file((d / "transcript.jsonl").string(), transcript_jsonl(r));
  text::write_file((d / "report.txt").string(), report_text(c, r));
}

std::string profile_table(std::span<const int> rates, std::span<const int> frames, double d0_ms) {
  if (rates.empty() || frames.empty()) return {};
  std::string out = "frame_size";
  for (int rate : rates) out += "," + std::to_string(rate) + "Hz_ms";
  out += "\n";
  for (int f : frames) {
    out += std::to_string(f);
    for (int rate : rates) {
      out += "," + text::fixed(audio::blocking_delay({rate, f, d0_ms}));
    }
    out += "\n";
  }
  return out;
}

}  // namespace nmp::scenario
