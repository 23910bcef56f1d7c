#include <doctest.h>

#include "f4ms/builtins.hpp"
#include "f4ms/engine.hpp"
#include "f4ms/sysdesc.hpp"

#include "support/generators.hpp"

using namespace f4ms;
using testsupport::noop_component;

namespace {

SimConfig config_for(const SystemModel& model, std::uint64_t seed = 0) {
  SimConfig c;
  c.seed = seed;
  c.mapping = all_software(model);
  return c;
}

int count_kind(const Trace& t, EventKind kind, const std::string& subject = "") {
  int n = 0;
  for (const auto& e : t.events)
    if (e.kind == kind && (subject.empty() || e.subject == subject)) ++n;
  return n;
}

const Event* first_event(const Trace& t, EventKind kind, const std::string& subject) {
  for (const auto& e : t.events)
    if (e.kind == kind && e.subject == subject) return &e;
  return nullptr;
}

// a(1) -> b(2) -> c(3) in sequence
SystemModel chain3() {
  SystemModel m;
  m.name = "chain3";
  micros_t t = kMicrosPerUnit;
  for (const char* id : {"a", "b", "c"}) {
    m.components.emplace(id, noop_component(id, t));
    m.spg.fsc.insert(id);
    t += kMicrosPerUnit;
  }
  SchedulingConnector s1, s2;
  s1.id = "s1";
  s1.sources = {"a"};
  s1.targets = {"b"};
  s2.id = "s2";
  s2.sources = {"b"};
  s2.targets = {"c"};
  m.spg.connectors = {s1, s2};
  m.spg.initial = "a";
  m.spg.finals = {"c"};
  return m;
}

}  // namespace

TEST_CASE("default mappings") {
  const SystemModel m = drms_model();
  Mapping sw = all_software(m);
  for (const auto& [id, kind] : sw.assignment) CHECK(kind == Kind::Software);

  Mapping hw = all_hardware_where_allowed(m);
  CHECK(hw.assignment.at("keygen") == Kind::Hardware);
  CHECK(hw.assignment.at("content_enc") == Kind::Hardware);
  CHECK(hw.assignment.at("license_enc") == Kind::Hardware);
  CHECK(hw.assignment.at("browser") == Kind::Software);  // sw-only
}

TEST_CASE("sequential chain fires in order with exact times") {
  const SystemModel m = chain3();
  Trace t = run(m, default_registry(), config_for(m));
  CHECK(t.sim_time == 6 * kMicrosPerUnit);
  CHECK(t.final_state.empty());
  CHECK(trace_export(t, TraceFormat::Lines) ==
        "0.000000\tComponentStart\ta\t{}\n"
        "1.000000\tComponentEnd\ta\t{}\n"
        "1.000000\tTokenMove\ts1\t{from \"a\" to \"b\"}\n"
        "1.000000\tComponentStart\tb\t{}\n"
        "3.000000\tComponentEnd\tb\t{}\n"
        "3.000000\tTokenMove\ts2\t{from \"b\" to \"c\"}\n"
        "3.000000\tComponentStart\tc\t{}\n"
        "6.000000\tComponentEnd\tc\t{}\n");
}

TEST_CASE("fork and join wait for the slower branch") {
  SystemModel m;
  const int times[] = {1, 2, 5, 1};
  const char* ids[] = {"a", "b", "c", "d"};
  for (int i = 0; i < 4; ++i) {
    m.components.emplace(ids[i], noop_component(ids[i], times[i] * kMicrosPerUnit));
    m.spg.fsc.insert(ids[i]);
  }
  SchedulingConnector fork, join;
  fork.id = "fork";
  fork.kind = ConnectorKind::Parallel;
  fork.sources = {"a"};
  fork.targets = {"b", "c"};
  join.id = "join";
  join.kind = ConnectorKind::Synchronization;
  join.sources = {"b", "c"};
  join.targets = {"d"};
  m.spg.connectors = {fork, join};
  m.spg.initial = "a";
  m.spg.finals = {"d"};

  Trace t = run(m, default_registry(), config_for(m));
  CHECK(t.sim_time == 7 * kMicrosPerUnit);

  const Event* d_start = first_event(t, EventKind::ComponentStart, "d");
  REQUIRE(d_start != nullptr);
  CHECK(d_start->time == 6 * kMicrosPerUnit);

  const Event* done = first_event(t, EventKind::SyncComplete, "join");
  REQUIRE(done != nullptr);
  CHECK(done->time == 6 * kMicrosPerUnit);
  CHECK(done->detail.find("to")->as_string() == "d");
  CHECK(count_kind(t, EventKind::TokenMove, "join") == 2);  // one per arm
}

TEST_CASE("engine makespan equals the independent longest path") {
  SplitMix64 rng(314);
  for (int i = 0; i < 60; ++i) {
    auto sp = testsupport::random_series_parallel(rng, 8);
    Trace t = run(sp.model, default_registry(), config_for(sp.model));
    CHECK(t.sim_time == sp.longest_path);
    CHECK(t.final_state.empty());
  }
}

TEST_CASE("exclusive choice follows labels, then the default") {
  auto build = [](const char* emitted, bool with_default) {
    SystemModel m;
    ComponentSpec g = noop_component("g", kMicrosPerUnit);
    g.behavior = "route_probe";
    g.ports = {{"route", Direction::Output, {"route_label"}}};
    m.components.emplace("g", g);
    m.components.emplace("x", noop_component("x", kMicrosPerUnit));
    m.components.emplace("y", noop_component("y", kMicrosPerUnit));
    for (const char* id : {"g", "x", "y"}) m.spg.fsc.insert(id);
    SchedulingConnector c;
    c.id = "choice";
    c.kind = ConnectorKind::ExclusiveChoice;
    c.sources = {"g"};
    c.targets = {"x", "y"};
    c.guard_port = std::pair<std::string, std::string>{"g", "route"};
    c.branch_labels = {{"x", "to_x"}, {"y", "to_y"}};
    if (with_default) c.default_target = "y";
    m.spg.connectors = {c};
    m.spg.initial = "g";
    m.spg.finals = {"x", "y"};

    BehaviorRegistry reg;
    Behavior noop;
    noop.name = "noop";
    noop.fire = [](FiringContext&) { return FiringResult{}; };
    reg.add(noop);
    Behavior probe;
    probe.name = "route_probe";
    std::string label = emitted;
    probe.fire = [label](FiringContext&) {
      FiringResult r;
      r.outputs["route"] = to_bytes(label);
      return r;
    };
    reg.add(probe);
    return std::make_pair(m, std::move(reg));
  };

  {
    auto [m, reg] = build("to_x", false);
    Trace t = run(m, reg, config_for(m));
    const Event* choice = first_event(t, EventKind::ChoiceTaken, "choice");
    REQUIRE(choice != nullptr);
    CHECK(choice->detail.find("label")->as_string() == "to_x");
    CHECK(choice->detail.find("to")->as_string() == "x");
    CHECK(count_kind(t, EventKind::ComponentStart, "y") == 0);
  }
  {
    auto [m, reg] = build("elsewhere", true);
    Trace t = run(m, reg, config_for(m));
    const Event* choice = first_event(t, EventKind::ChoiceTaken, "choice");
    REQUIRE(choice != nullptr);
    CHECK(choice->detail.find("to")->as_string() == "y");  // default taken
  }
  {
    auto [m, reg] = build("elsewhere", false);
    try {
      run(m, reg, config_for(m));
      FAIL("expected GuardNoMatch");
    } catch (const EngineError& e) {
      CHECK(e.code == EngineError::Code::GuardNoMatch);
      CHECK(e.subject == "choice");
    }
  }
}

TEST_CASE("cyclic models stop at the step limit") {
  SystemModel m = chain3();
  SchedulingConnector back;
  back.id = "s3";
  back.sources = {"c"};
  back.targets = {"b"};
  m.spg.connectors.push_back(back);

  SimConfig cfg = config_for(m);
  cfg.step_limit = 25;
  try {
    run(m, default_registry(), cfg);
    FAIL("expected StepLimitExceeded");
  } catch (const EngineError& e) {
    CHECK(e.code == EngineError::Code::StepLimitExceeded);
  }

  Engine eng(m, default_registry(), cfg, {});
  int fired = 0;
  while (fired < 25 && eng.step()) ++fired;
  CHECK(fired == 25);
  CHECK_FALSE(eng.quiescent());
}

TEST_CASE("a component whose needed input never arrives stays quiescent") {
  SystemModel m;
  ComponentSpec c = noop_component("only", kMicrosPerUnit);
  c.behavior = "content_enc_v1";  // requires "key"
  c.ports = {{"key", Direction::Input, {"key"}},
             {"ciphertext", Direction::Output, {"ciphertext"}}};
  m.components.emplace("only", c);
  m.spg.fsc.insert("only");
  m.spg.initial = "only";
  m.spg.finals = {"only"};

  Trace t = run(m, default_registry(), config_for(m));
  CHECK(t.events.empty());
  CHECK(t.sim_time == 0);
  CHECK(t.final_state == std::map<std::string, int>{{"only", 1}});
  CHECK(trace_export(t, TraceFormat::Lines).empty());
}

TEST_CASE("initial inputs are validated and delivered at time zero") {
  SystemModel m;
  ComponentSpec c = noop_component("only", kMicrosPerUnit);
  c.behavior = "content_enc_v1";
  c.ports = {{"key", Direction::Input, {"key"}},
             {"ciphertext", Direction::Output, {"ciphertext"}}};
  m.components.emplace("only", c);
  m.spg.fsc.insert("only");
  m.spg.initial = "only";
  m.spg.finals = {"only"};

  Message key_msg;
  key_msg.tag = {"key"};
  key_msg.payload = Bytes(16, 0xab);
  InitialInputs inputs{{{"only", "key"}, key_msg}};
  Trace t = run(m, default_registry(), config_for(m), inputs);
  CHECK(t.sim_time == kMicrosPerUnit);
  REQUIRE(t.outputs.size() == 1);
  CHECK(t.outputs[0].port == "ciphertext");

  InitialInputs bad_port{{{"only", "nope"}, key_msg}};
  CHECK_THROWS_AS(run(m, default_registry(), config_for(m), bad_port), EngineError);

  Message wrong_tag;
  wrong_tag.tag = {"other"};
  InitialInputs bad_tag{{{"only", "key"}, wrong_tag}};
  try {
    run(m, default_registry(), config_for(m), bad_tag);
    FAIL("expected InvalidInput");
  } catch (const EngineError& e) {
    CHECK(e.code == EngineError::Code::InvalidInput);
  }
}

TEST_CASE("mappings must respect allowed kinds and cover the model") {
  SystemModel m = chain3();
  SimConfig cfg = config_for(m);
  cfg.mapping.assignment["b"] = Kind::Hardware;  // b allows sw only
  try {
    run(m, default_registry(), cfg);
    FAIL("expected KindNotAllowed");
  } catch (const EngineError& e) {
    CHECK(e.code == EngineError::Code::KindNotAllowed);
    CHECK(e.subject == "b");
  }

  SimConfig missing = config_for(m);
  missing.mapping.assignment.erase("c");
  CHECK_THROWS_AS(run(m, default_registry(), missing), EngineError);
}

TEST_CASE("behavior outputs must name declared output ports") {
  SystemModel m;
  ComponentSpec c = noop_component("only", kMicrosPerUnit);
  c.behavior = "bad_emitter";
  m.components.emplace("only", c);
  m.spg.fsc.insert("only");
  m.spg.initial = "only";
  m.spg.finals = {"only"};

  BehaviorRegistry reg;
  Behavior bad;
  bad.name = "bad_emitter";
  bad.fire = [](FiringContext&) {
    FiringResult r;
    r.outputs["ghost"] = to_bytes("x");
    return r;
  };
  reg.add(bad);
  try {
    run(m, reg, config_for(m));
    FAIL("expected UnknownPort");
  } catch (const EngineError& e) {
    CHECK(e.code == EngineError::Code::UnknownPort);
  }
}

TEST_CASE("a behavior reading an unfed port is a missing input") {
  SystemModel m;
  ComponentSpec c = noop_component("only", kMicrosPerUnit);
  c.behavior = "greedy_reader";
  m.components.emplace("only", c);
  m.spg.fsc.insert("only");
  m.spg.initial = "only";
  m.spg.finals = {"only"};

  BehaviorRegistry reg;
  Behavior greedy;
  greedy.name = "greedy_reader";
  greedy.fire = [](FiringContext& ctx) {
    ctx.require("never_fed");
    return FiringResult{};
  };
  reg.add(greedy);
  try {
    run(m, reg, config_for(m));
    FAIL("expected MissingInput");
  } catch (const EngineError& e) {
    CHECK(e.code == EngineError::Code::MissingInput);
  }
}

TEST_CASE("fan-in keeps the message latest by arrival, then sender") {
  // p0 fans out; p1 (slow) and p2 (via d2, fast) both feed sink.in
  auto build = [](int p1_time, int d2_time) {
    SystemModel m;
    m.components.emplace("p0", noop_component("p0", kMicrosPerUnit));
    ComponentSpec p1 = noop_component("p1", p1_time * kMicrosPerUnit);
    p1.behavior = "stamp";
    p1.ports = {{"out", Direction::Output, {"data"}}};
    m.components.emplace("p1", p1);
    m.components.emplace("d2", noop_component("d2", d2_time * kMicrosPerUnit));
    ComponentSpec p2 = noop_component("p2", kMicrosPerUnit);
    p2.behavior = "stamp";
    p2.ports = {{"out", Direction::Output, {"data"}}};
    m.components.emplace("p2", p2);
    ComponentSpec sink = noop_component("sink", kMicrosPerUnit);
    sink.behavior = "sink_reader";
    sink.ports = {{"in", Direction::Input, {"data"}}};
    m.components.emplace("sink", sink);
    for (const char* id : {"p0", "p1", "d2", "p2", "sink"}) m.spg.fsc.insert(id);

    SchedulingConnector fork, mid, join;
    fork.id = "fork";
    fork.kind = ConnectorKind::Parallel;
    fork.sources = {"p0"};
    fork.targets = {"p1", "d2"};
    mid.id = "mid";
    mid.sources = {"d2"};
    mid.targets = {"p2"};
    join.id = "join";
    join.kind = ConnectorKind::Synchronization;
    join.sources = {"p1", "p2"};
    join.targets = {"sink"};
    m.spg.connectors = {fork, mid, join};
    m.spg.initial = "p0";
    m.spg.finals = {"sink"};
    m.ig.edges = {{"p1", "out", "sink", "in"}, {"p2", "out", "sink", "in"}};
    return m;
  };

  BehaviorRegistry reg;
  Behavior noop;
  noop.name = "noop";
  noop.fire = [](FiringContext&) { return FiringResult{}; };
  reg.add(noop);
  Behavior stamp;
  stamp.name = "stamp";
  stamp.fire = [](FiringContext& ctx) {
    FiringResult r;
    r.outputs["out"] = to_bytes(ctx.component->id);
    return r;
  };
  reg.add(stamp);
  Behavior sink_reader;
  sink_reader.name = "sink_reader";
  sink_reader.required_inputs = {"in"};
  sink_reader.fire = [](FiringContext& ctx) {
    FiringResult r;
    r.state = ctx.require("in");
    return r;
  };
  reg.add(sink_reader);

  SUBCASE("a later arrival wins and notes what it overwrote") {
    SystemModel m = build(/*p1_time=*/1, /*d2_time=*/2);
    // p1 delivers at 2; p2 delivers at 4 and wins
    Trace t = run(m, reg, config_for(m));
    const Event* e = first_event(t, EventKind::MessageTransfer, "p2");
    REQUIRE(e != nullptr);
    REQUIRE(e->detail.find("overwrites") != nullptr);
    CHECK(e->detail.find("overwrites")->as_string() == "p1");
  }

  SUBCASE("an earlier arrival delivered later is superseded") {
    SystemModel m = build(/*p1_time=*/5, /*d2_time=*/1);
    // p1 fires first (start 1, end 6); p2 ends at 3: older message loses
    Trace t = run(m, reg, config_for(m));
    const Event* e = first_event(t, EventKind::MessageTransfer, "p2");
    REQUIRE(e != nullptr);
    REQUIRE(e->detail.find("superseded_by") != nullptr);
    CHECK(e->detail.find("superseded_by")->as_string() == "p1");
    // the sink consumed p1's payload
    const Event* sink_start = first_event(t, EventKind::ComponentStart, "sink");
    REQUIRE(sink_start != nullptr);
    CHECK(sink_start->time == 6 * kMicrosPerUnit);
  }
}

TEST_CASE("the demo model exercises the state-dependent gate") {
  const SystemModel m = drms_model();
  Trace t = run(m, default_registry(), config_for(m));
  CHECK(t.sim_time == 32 * kMicrosPerUnit);
  CHECK(count_kind(t, EventKind::ComponentStart) == 14);
  CHECK(count_kind(t, EventKind::ComponentStart, "browser") == 3);
  CHECK(count_kind(t, EventKind::ComponentStart, "webapp") == 3);
  CHECK(count_kind(t, EventKind::MessageTransfer) == 16);
  REQUIRE(t.outputs.size() == 1);
  CHECK(t.outputs[0].component == "drm_reader");
  CHECK(t.outputs[0].port == "rendered");
}

TEST_CASE("same seed, same bytes; the seed reaches behavior randomness") {
  const SystemModel m = drms_model();
  const std::string a =
      trace_export(run(m, default_registry(), config_for(m, 5)), TraceFormat::Lines);
  const std::string b =
      trace_export(run(m, default_registry(), config_for(m, 5)), TraceFormat::Lines);
  CHECK(a == b);

  // rendered output embeds key-derived bytes, so distinct seeds diverge
  const Trace t0 = run(m, default_registry(), config_for(m, 0));
  const Trace t1 = run(m, default_registry(), config_for(m, 1));
  CHECK(t0.outputs[0].payload != t1.outputs[0].payload);
}

TEST_CASE("structured traces roundtrip through export and import") {
  for (const SystemModel& m : {drms_model(), chain3()}) {
    Trace t = run(m, default_registry(), config_for(m));
    const std::string text = trace_export(t, TraceFormat::Structured);
    auto imported = trace_import(text, "t.trace");
    REQUIRE(imported.trace.has_value());
    CHECK(trace_export(*imported.trace, TraceFormat::Structured) == text);
    CHECK(imported.trace->sim_time == t.sim_time);
    CHECK(imported.trace->events.size() == t.events.size());
  }

  auto bad = trace_import("sim_time \"zero\"\n", "t.trace");
  CHECK(!bad.trace.has_value());
  CHECK(!bad.diagnostics.empty());
}
