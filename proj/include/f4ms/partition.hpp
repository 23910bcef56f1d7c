#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "f4ms/engine.hpp"

namespace f4ms {

// Weighted compromise over normalized metrics; security enters negatively
// because a higher level is better. References rescale each metric into
// comparable units and must be positive.
struct PartitionObjective {
  double w_time = 1.0;
  double w_area = 1.0;
  double w_energy = 1.0;
  double w_security = 1.0;
  micros_t ref_time = kMicrosPerUnit;
  micros_t ref_area = kMicrosPerUnit;
  micros_t ref_energy = kMicrosPerUnit;
  micros_t ref_security = kMicrosPerUnit;
};

struct Constraints {
  micros_t area_budget = std::numeric_limits<micros_t>::max();
  int security_floor = 0;  // 0..5
};

// Inputs of the evaluation run the metrics are measured on.
struct Scenario {
  InitialInputs inputs;
  std::uint64_t seed = 0;
  int step_limit = 10000;
};

struct EvaluationResult {
  Mapping mapping;
  micros_t total_time = 0;    // engine makespan under the mapping
  micros_t total_area = 0;    // static sum of hw_area over Hardware components
  micros_t total_energy = 0;  // per-firing energy of the assigned kind
  int min_security = 0;       // min over all components, assigned kind
  double objective_value = 0.0;
  bool feasible = false;
};

struct RefinementDelta {
  micros_t d_time = 0;
  micros_t d_area = 0;
  micros_t d_energy = 0;
  int d_security = 0;
  double d_objective = 0.0;
  bool a_feasible = false;
  bool b_feasible = false;
};

struct PartitionError : std::runtime_error {
  enum class Code {
    InvalidMapping,
    InvalidObjective,
    NoFeasibleMapping,
    TooManyFreeComponents,
  };
  Code code;
  PartitionError(Code c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

std::string to_string(PartitionError::Code c);

enum class SearchMethod { Exhaustive, Greedy };

std::string to_string(SearchMethod m);

struct SearchReport {
  SearchMethod method = SearchMethod::Exhaustive;
  std::size_t evaluated = 0;
  std::vector<std::string> flips;  // greedy: accepted flips in order
  std::vector<EvaluationResult> rows;
  std::size_t rows_omitted = 0;  // exhaustive rows beyond the report cap
};

struct OptimizeOutcome {
  EvaluationResult best;
  SearchReport report;
};

EvaluationResult evaluate_mapping(const SystemModel& model,
                                  const BehaviorRegistry& registry,
                                  const Scenario& scenario, const Mapping& mapping,
                                  const PartitionObjective& objective,
                                  const Constraints& constraints);

// metrics(b) - metrics(a).
RefinementDelta refinement_delta(const SystemModel& model,
                                 const BehaviorRegistry& registry,
                                 const Scenario& scenario, const Mapping& a,
                                 const Mapping& b,
                                 const PartitionObjective& objective,
                                 const Constraints& constraints);

// Exhaustive: every assignment of the dual-kind components (at most 24),
// minimizing (objective, hardware count, lexicographic assignment) over the
// feasible set; evaluations run in parallel and reduce under that total
// order, so the winner matches the serial reference exactly. Greedy: from
// all-Software, repeatedly apply the feasible flip with the largest strict
// objective decrease.
OptimizeOutcome optimize(const SystemModel& model, const BehaviorRegistry& registry,
                         const Scenario& scenario,
                         const PartitionObjective& objective,
                         const Constraints& constraints, SearchMethod method);

// Single-threaded exhaustive search, kept as the comparison baseline.
OptimizeOutcome optimize_exhaustive_serial(const SystemModel& model,
                                           const BehaviorRegistry& registry,
                                           const Scenario& scenario,
                                           const PartitionObjective& objective,
                                           const Constraints& constraints);

// Canonical tree rendering of a search outcome (method, evaluated, best,
// flips, rows).
std::string report_export(const OptimizeOutcome& outcome);

// True when `a` precedes `b` in the search's total order.
bool better_mapping(const EvaluationResult& a, const EvaluationResult& b);

}  // namespace f4ms
