#include <doctest.h>

#include "f4ms/builtins.hpp"
#include "f4ms/graph.hpp"

#include "support/generators.hpp"

using namespace f4ms;
using testsupport::noop_component;

namespace {

bool has(const std::vector<Issue>& issues, IssueCode code) {
  for (const auto& i : issues)
    if (i.code == code) return true;
  return false;
}

SchedulingConnector seq(std::string id, std::string from, std::string to) {
  SchedulingConnector c;
  c.id = std::move(id);
  c.kind = ConnectorKind::Sequence;
  c.sources = {std::move(from)};
  c.targets = {std::move(to)};
  return c;
}

// a --seq--> b --seq--> c
SystemModel chain3() {
  SystemModel m;
  m.name = "chain3";
  for (const char* id : {"a", "b", "c"}) {
    m.components.emplace(id, noop_component(id, kMicrosPerUnit));
    m.spg.fsc.insert(id);
  }
  m.spg.connectors = {seq("s1", "a", "b"), seq("s2", "b", "c")};
  m.spg.initial = "a";
  m.spg.finals = {"c"};
  return m;
}

}  // namespace

TEST_CASE("connector kind names roundtrip") {
  for (auto k : {ConnectorKind::Sequence, ConnectorKind::Parallel,
                 ConnectorKind::ExclusiveChoice, ConnectorKind::Synchronization})
    CHECK(connector_kind_from_string(to_string(k)) == k);
  CHECK(!connector_kind_from_string("loop"));
}

TEST_CASE("reachability follows connectors from the initial component") {
  SystemModel m = chain3();
  CHECK(reachable_components(m.spg) == std::set<std::string>{"a", "b", "c"});

  m.spg.connectors.pop_back();  // drop b -> c
  CHECK(reachable_components(m.spg) == std::set<std::string>{"a", "b"});
}

TEST_CASE("synchronization requires every source to be reachable") {
  SystemModel m;
  for (const char* id : {"a", "b", "x", "d"}) {
    m.components.emplace(id, noop_component(id, kMicrosPerUnit));
    m.spg.fsc.insert(id);
  }
  m.spg.initial = "a";
  m.spg.finals = {"d"};
  m.spg.connectors = {seq("s1", "a", "b")};
  SchedulingConnector join;
  join.id = "j";
  join.kind = ConnectorKind::Synchronization;
  join.sources = {"b", "x"};  // x is fed by nothing
  join.targets = {"d"};
  m.spg.connectors.push_back(join);

  auto reach = reachable_components(m.spg);
  CHECK(reach.count("b") == 1);
  CHECK(reach.count("d") == 0);  // join never completes
}

TEST_CASE("valid models produce no issues") {
  CHECK(validate_system(chain3(), default_registry()).empty());
  CHECK(validate_system(drms_model(), default_registry()).empty());
}

TEST_CASE("fsc must equal the component key set") {
  SystemModel m = chain3();
  m.spg.fsc.insert("phantom");
  CHECK(has(validate_system(m, default_registry()), IssueCode::UnknownComponent));

  SystemModel m2 = chain3();
  m2.spg.fsc.erase("b");
  CHECK(!validate_system(m2, default_registry()).empty());
}

TEST_CASE("initial and finals placement") {
  SystemModel m = chain3();
  m.spg.initial = "ghost";
  CHECK(has(validate_system(m, default_registry()), IssueCode::UnknownComponent));

  SystemModel m2 = chain3();
  m2.spg.finals = {};
  CHECK(has(validate_system(m2, default_registry()), IssueCode::EmptyFinals));

  SystemModel m3 = chain3();
  m3.spg.initial = "b";  // b is the target of s1
  CHECK(has(validate_system(m3, default_registry()), IssueCode::InitialIsTarget));
}

TEST_CASE("connector arity violations") {
  SystemModel m = chain3();
  m.spg.connectors[0].targets = {"b", "c"};  // seq with two targets
  CHECK(has(validate_system(m, default_registry()), IssueCode::ArityViolation));

  SystemModel m2 = chain3();
  m2.spg.connectors[0].kind = ConnectorKind::Parallel;  // par with one target
  CHECK(has(validate_system(m2, default_registry()), IssueCode::ArityViolation));

  SystemModel m3 = chain3();
  m3.spg.connectors[1] = m3.spg.connectors[0];  // duplicate id s1
  CHECK(has(validate_system(m3, default_registry()), IssueCode::DuplicateConnector));
}

TEST_CASE("guard and label checks") {
  SystemModel m = chain3();
  m.spg.connectors[0].guard_port = {"a", "x"};  // guard on a sequence
  CHECK(has(validate_system(m, default_registry()), IssueCode::DanglingGuard));

  // exclusive choice built from the demo model: break each label rule
  SystemModel d = drms_model();
  auto xor_at = [&](SystemModel& model) -> SchedulingConnector& {
    for (auto& c : model.spg.connectors)
      if (c.id == "b_route") return c;
    throw std::logic_error("b_route missing");
  };

  SystemModel d1 = d;
  xor_at(d1).branch_labels.erase("webapp");
  CHECK(has(validate_system(d1, default_registry()), IssueCode::MissingLabel));

  SystemModel d2 = d;
  xor_at(d2).branch_labels["drm_reader"] = "to_webapp";
  CHECK(has(validate_system(d2, default_registry()), IssueCode::DuplicateLabel));

  SystemModel d3 = d;
  xor_at(d3).branch_labels["database"] = "to_db";
  CHECK(has(validate_system(d3, default_registry()), IssueCode::DanglingGuard));

  SystemModel d4 = d;
  xor_at(d4).default_target = "database";
  CHECK(has(validate_system(d4, default_registry()), IssueCode::DanglingGuard));

  SystemModel d5 = d;
  xor_at(d5).guard_port = {"browser", "nonexistent"};
  CHECK(has(validate_system(d5, default_registry()), IssueCode::DanglingGuard));
}

TEST_CASE("flow analysis: reachability and paths to finals") {
  SystemModel m = chain3();
  m.components.emplace("zz", noop_component("zz", kMicrosPerUnit));
  m.spg.fsc.insert("zz");
  auto issues = validate_system(m, default_registry());
  CHECK(has(issues, IssueCode::Unreachable));

  SystemModel m2 = chain3();
  m2.spg.finals = {"a"};
  CHECK(has(validate_system(m2, default_registry()), IssueCode::NoPathToFinal));
}

TEST_CASE("interaction edge checks") {
  SystemModel m = chain3();
  auto& a = m.components.at("a");
  auto& b = m.components.at("b");
  a.ports.push_back({"out", Direction::Output, {"data"}});
  b.ports.push_back({"in", Direction::Input, {"data"}});
  m.ig.edges.push_back({"a", "out", "b", "in"});
  CHECK(validate_system(m, default_registry()).empty());

  SystemModel bad_tag = m;
  bad_tag.components.at("b").ports.back().tag = {"other"};
  CHECK(has(validate_system(bad_tag, default_registry()), IssueCode::TagMismatch));

  SystemModel dup = m;
  dup.ig.edges.push_back({"a", "out", "b", "in"});
  CHECK(has(validate_system(dup, default_registry()), IssueCode::DuplicateEdge));

  SystemModel ghost_port = m;
  ghost_port.ig.edges[0].from_port = "nope";
  CHECK(has(validate_system(ghost_port, default_registry()), IssueCode::UnknownPort));

  SystemModel ghost_comp = m;
  ghost_comp.ig.edges[0].to_component = "nobody";
  CHECK(has(validate_system(ghost_comp, default_registry()), IssueCode::UnknownComponent));

  // direction matters: an edge out of an input port is rejected
  SystemModel wrong_dir = m;
  wrong_dir.ig.edges[0] = {"b", "in", "a", "out"};
  CHECK(has(validate_system(wrong_dir, default_registry()), IssueCode::UnknownPort));
}

TEST_CASE("behavior-required inputs must be fed") {
  // echo requires nothing, so craft a model around content_enc_v1 (requires "key")
  SystemModel m;
  ComponentSpec enc = noop_component("enc", kMicrosPerUnit);
  enc.behavior = "content_enc_v1";
  enc.ports = {{"key", Direction::Input, {"key"}},
               {"plaintext", Direction::Input, {"plaintext"}},
               {"ciphertext", Direction::Output, {"ciphertext"}}};
  m.components.emplace("enc", enc);
  m.spg.fsc.insert("enc");
  m.spg.initial = "enc";
  m.spg.finals = {"enc"};
  auto issues = validate_system(m, default_registry());
  CHECK(has(issues, IssueCode::UnfedInput));
}

TEST_CASE("compatibility report lists one verdict per edge") {
  SystemModel m = chain3();
  auto& a = m.components.at("a");
  auto& b = m.components.at("b");
  a.ports.push_back({"out", Direction::Output, {"data"}});
  b.ports.push_back({"in", Direction::Input, {"other"}});
  m.ig.edges.push_back({"a", "out", "b", "in"});
  m.ig.edges.push_back({"a", "gone", "b", "in"});

  auto report = compatibility_report(m);
  REQUIRE(report.size() == 2);
  CHECK(report[0].syntactic_ok);
  CHECK(report[0].verdict() == "TagMismatch");
  CHECK_FALSE(report[1].syntactic_ok);

  SystemModel ok = chain3();
  ok.components.at("a").ports.push_back({"out", Direction::Output, {"data"}});
  ok.components.at("b").ports.push_back({"in", Direction::Input, {"data"}});
  ok.ig.edges.push_back({"a", "out", "b", "in"});
  auto ok_report = compatibility_report(ok);
  REQUIRE(ok_report.size() == 1);
  CHECK(ok_report[0].verdict() == "TagOk");
}

TEST_CASE("random series-parallel models validate cleanly") {
  SplitMix64 rng(5);
  for (int i = 0; i < 50; ++i) {
    auto sp = testsupport::random_series_parallel(rng, 8);
    CHECK(validate_system(sp.model, default_registry()).empty());
  }
}
