#include <doctest.h>

#include <set>

#include "f4ms/builtins.hpp"
#include "f4ms/partition.hpp"

#include "support/generators.hpp"

using namespace f4ms;

namespace {

PartitionObjective unit_objective(double wt = 1, double wa = 1, double we = 1,
                                  double ws = 1) {
  PartitionObjective o;
  o.w_time = wt;
  o.w_area = wa;
  o.w_energy = we;
  o.w_security = ws;
  return o;
}

Mapping demo_mapping(std::initializer_list<const char*> hardware) {
  Mapping m = all_software(drms_model());
  for (const char* id : hardware) m.assignment.at(id) = Kind::Hardware;
  return m;
}

}  // namespace

TEST_CASE("metrics of the all-software demo mapping") {
  const SystemModel& m = drms_model();
  auto r = evaluate_mapping(m, default_registry(), Scenario{}, all_software(m),
                            unit_objective(), Constraints{});
  CHECK(r.total_time == 32 * kMicrosPerUnit);
  CHECK(r.total_area == 0);
  CHECK(r.total_energy == 22 * kMicrosPerUnit);
  CHECK(r.min_security == 1);  // both encryptors sit at 1 in software
  CHECK(r.feasible);
  // t/1 + a/1 + e/1 - s*1/1 with unit references
  CHECK(r.objective_value == doctest::Approx(32.0 + 0.0 + 22.0 - 1.0));
}

TEST_CASE("objective responds to each dual-kind flip") {
  const SystemModel& m = drms_model();
  const PartitionObjective obj = unit_objective(1, 1, 1, 10);
  auto value = [&](std::initializer_list<const char*> hw) {
    return evaluate_mapping(m, default_registry(), Scenario{}, demo_mapping(hw),
                            obj, Constraints{})
        .objective_value;
  };
  // time + area + energy - 10 * min_security, all in canonical units; the
  // security floor only rises once both encryptors leave software
  CHECK(value({}) == doctest::Approx(44.0));
  CHECK(value({"content_enc"}) == doctest::Approx(41.0));
  CHECK(value({"license_enc"}) == doctest::Approx(42.0));
  CHECK(value({"keygen"}) == doctest::Approx(45.0));
  CHECK(value({"content_enc", "license_enc"}) == doctest::Approx(19.0));
  CHECK(value({"content_enc", "keygen"}) == doctest::Approx(42.0));
  CHECK(value({"license_enc", "keygen"}) == doctest::Approx(43.0));
  CHECK(value({"content_enc", "license_enc", "keygen"}) == doctest::Approx(20.0));
}

TEST_CASE("infeasible mappings are marked, not hidden") {
  const SystemModel& m = drms_model();
  Constraints tight;
  tight.area_budget = 1 * kMicrosPerUnit;  // content_enc alone needs 4
  auto r = evaluate_mapping(m, default_registry(), Scenario{},
                            demo_mapping({"content_enc"}), unit_objective(), tight);
  CHECK(!r.feasible);
  CHECK(r.total_area == 4 * kMicrosPerUnit);

  Constraints floor;
  floor.security_floor = 4;
  auto s = evaluate_mapping(m, default_registry(), Scenario{}, all_software(m),
                            unit_objective(), floor);
  CHECK(!s.feasible);  // several components cap at security 3
}

TEST_CASE("bad inputs are rejected up front") {
  const SystemModel& m = drms_model();
  PartitionObjective bad_ref = unit_objective();
  bad_ref.ref_time = 0;
  CHECK_THROWS_AS(evaluate_mapping(m, default_registry(), Scenario{},
                                   all_software(m), bad_ref, Constraints{}),
                  PartitionError);

  Mapping incomplete = all_software(m);
  incomplete.assignment.erase("browser");
  CHECK_THROWS_AS(evaluate_mapping(m, default_registry(), Scenario{}, incomplete,
                                   unit_objective(), Constraints{}),
                  PartitionError);

  Mapping wrong_kind = all_software(m);
  wrong_kind.assignment.at("browser") = Kind::Hardware;
  CHECK_THROWS_AS(evaluate_mapping(m, default_registry(), Scenario{}, wrong_kind,
                                   unit_objective(), Constraints{}),
                  PartitionError);
}

TEST_CASE("the total order prefers feasible, then value, then fewer hw") {
  EvaluationResult a, b;
  a.feasible = true;
  b.feasible = false;
  a.objective_value = 100;
  b.objective_value = -5;
  CHECK(better_mapping(a, b));
  CHECK(!better_mapping(b, a));

  b.feasible = true;
  CHECK(better_mapping(b, a));

  b.objective_value = 100;
  a.mapping.assignment = {{"x", Kind::Software}, {"y", Kind::Hardware}};
  b.mapping.assignment = {{"x", Kind::Hardware}, {"y", Kind::Hardware}};
  CHECK(better_mapping(a, b));  // one hw beats two at equal value

  b.mapping.assignment = {{"x", Kind::Hardware}, {"y", Kind::Software}};
  // equal hw count: lexicographic assignment map, Software sorts first
  CHECK(better_mapping(a, b) != better_mapping(b, a));
}

TEST_CASE("security-dominant weights move both encryptors to hardware") {
  const SystemModel& m = drms_model();
  const PartitionObjective obj = unit_objective(1, 1, 1, 10);
  for (SearchMethod method : {SearchMethod::Exhaustive, SearchMethod::Greedy}) {
    auto out = optimize(m, default_registry(), Scenario{}, obj, Constraints{}, method);
    CHECK(out.best.mapping.assignment.at("content_enc") == Kind::Hardware);
    CHECK(out.best.mapping.assignment.at("license_enc") == Kind::Hardware);
    CHECK(out.best.mapping.assignment.at("keygen") == Kind::Software);
    CHECK(out.best.objective_value == doctest::Approx(19.0));
    CHECK(out.best.feasible);
  }
}

TEST_CASE("exhaustive search enumerates every free assignment") {
  const SystemModel& m = drms_model();  // 3 dual-kind components
  auto out = optimize(m, default_registry(), Scenario{}, unit_objective(),
                      Constraints{}, SearchMethod::Exhaustive);
  CHECK(out.report.evaluated == 8);
  CHECK(out.report.method == SearchMethod::Exhaustive);
  CHECK(out.report.rows.size() + out.report.rows_omitted == 8);
}

TEST_CASE("parallel exhaustive equals the serial reference") {
  SplitMix64 rng(2024);
  for (int i = 0; i < 12; ++i) {
    SystemModel m = testsupport::random_partition_model(
        rng, /*dual_count=*/2 + static_cast<int>(rng.next_below(4)),
        /*extra_sw=*/static_cast<int>(rng.next_below(3)));
    Constraints cons;
    cons.area_budget = static_cast<micros_t>(rng.next_below(5)) * kMicrosPerUnit;
    const PartitionObjective obj = unit_objective(2, 1, 1, 3);
    try {
      auto par = optimize(m, default_registry(), Scenario{}, obj, cons,
                          SearchMethod::Exhaustive);
      auto ser = optimize_exhaustive_serial(m, default_registry(), Scenario{}, obj, cons);
      CHECK(par.best.mapping.assignment == ser.best.mapping.assignment);
      CHECK(par.best.objective_value == doctest::Approx(ser.best.objective_value));
      CHECK(par.report.evaluated == ser.report.evaluated);
    } catch (const PartitionError& e) {
      CHECK(e.code == PartitionError::Code::NoFeasibleMapping);
      CHECK_THROWS_AS(
          optimize_exhaustive_serial(m, default_registry(), Scenario{}, obj, cons),
          PartitionError);
    }
  }
}

TEST_CASE("greedy flips are strict improvements ending at a local optimum") {
  const SystemModel& m = drms_model();
  const PartitionObjective obj = unit_objective(1, 1, 1, 10);
  auto out = optimize(m, default_registry(), Scenario{}, obj, Constraints{},
                      SearchMethod::Greedy);
  CHECK(out.report.method == SearchMethod::Greedy);
  CHECK(out.report.flips.size() == 2);
  CHECK(std::set<std::string>(out.report.flips.begin(), out.report.flips.end()) ==
        std::set<std::string>{"content_enc", "license_enc"});
  // replaying the flips from all-software reproduces the best value
  auto cur = evaluate_mapping(m, default_registry(), Scenario{}, all_software(m),
                              obj, Constraints{});
  for (const auto& flip : out.report.flips) {
    Mapping next = cur.mapping;
    next.assignment.at(flip) = Kind::Hardware;
    auto stepped =
        evaluate_mapping(m, default_registry(), Scenario{}, next, obj, Constraints{});
    CHECK(stepped.objective_value < cur.objective_value);
    cur = stepped;
  }
  CHECK(cur.objective_value == doctest::Approx(out.best.objective_value));
}

TEST_CASE("no feasible mapping is an explicit failure") {
  const SystemModel& m = drms_model();
  Constraints floor;
  floor.security_floor = 5;  // nothing reaches level 5
  for (SearchMethod method : {SearchMethod::Exhaustive, SearchMethod::Greedy}) {
    try {
      optimize(m, default_registry(), Scenario{}, unit_objective(), floor, method);
      FAIL("expected NoFeasibleMapping");
    } catch (const PartitionError& e) {
      CHECK(e.code == PartitionError::Code::NoFeasibleMapping);
    }
  }
}

TEST_CASE("too many free components is rejected before enumerating") {
  SplitMix64 rng(5);
  SystemModel m = testsupport::random_partition_model(rng, /*dual_count=*/25,
                                                      /*extra_sw=*/0);
  CHECK_THROWS_AS(optimize(m, default_registry(), Scenario{}, unit_objective(),
                           Constraints{}, SearchMethod::Exhaustive),
                  PartitionError);
  // greedy has no such limit
  auto out = optimize(m, default_registry(), Scenario{}, unit_objective(),
                      Constraints{}, SearchMethod::Greedy);
  CHECK(out.best.feasible);
}

TEST_CASE("refinement deltas are pairwise metric differences") {
  const SystemModel& m = drms_model();
  const PartitionObjective obj = unit_objective(1, 1, 1, 10);
  auto d = refinement_delta(m, default_registry(), Scenario{}, all_software(m),
                            demo_mapping({"content_enc"}), obj, Constraints{});
  CHECK(d.d_time == -4 * kMicrosPerUnit);  // 32 -> 28
  CHECK(d.d_area == 4 * kMicrosPerUnit);
  CHECK(d.d_energy == -3 * kMicrosPerUnit);
  CHECK(d.d_security == 0);  // license_enc still pins the minimum at 1
  CHECK(d.a_feasible);
  CHECK(d.b_feasible);
  CHECK(d.d_objective == doctest::Approx(-3.0));
}

TEST_CASE("search reports render as canonical text") {
  const SystemModel& m = drms_model();
  auto out = optimize(m, default_registry(), Scenario{}, unit_objective(1, 1, 1, 10),
                      Constraints{}, SearchMethod::Greedy);
  const std::string text = report_export(out);
  CHECK(text.find("method \"greedy\"") != std::string::npos);
  CHECK(text.find("objective") != std::string::npos);
  CHECK(text.find("content_enc") != std::string::npos);
}
