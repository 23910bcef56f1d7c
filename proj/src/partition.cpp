#include "f4ms/partition.hpp"

#include <algorithm>
#include <cmath>

namespace f4ms {

namespace {

constexpr int kMaxFreeExhaustive = 24;
constexpr std::size_t kReportRowCap = 4096;

void check_objective(const PartitionObjective& o) {
  const bool weights_ok = o.w_time >= 0 && o.w_area >= 0 && o.w_energy >= 0 &&
                          o.w_security >= 0 &&
                          (o.w_time > 0 || o.w_area > 0 || o.w_energy > 0 ||
                           o.w_security > 0);
  const bool refs_ok =
      o.ref_time > 0 && o.ref_area > 0 && o.ref_energy > 0 && o.ref_security > 0;
  if (!weights_ok || !refs_ok)
    throw PartitionError(PartitionError::Code::InvalidObjective,
                         "weights must be non-negative with at least one positive "
                         "and references positive");
}

void check_mapping(const SystemModel& model, const Mapping& mapping) {
  for (const auto& [id, spec] : model.components) {
    auto it = mapping.assignment.find(id);
    if (it == mapping.assignment.end())
      throw PartitionError(PartitionError::Code::InvalidMapping,
                           "mapping assigns no kind to component '" + id + "'");
    if (!spec.allowed_kinds.count(it->second))
      throw PartitionError(PartitionError::Code::InvalidMapping,
                           "component '" + id + "' does not allow kind '" +
                               to_string(it->second) + "'");
  }
}

// Dual-kind component ids in lexicographic order: the search's bit layout.
std::vector<std::string> free_components(const SystemModel& model) {
  std::vector<std::string> free;
  for (const auto& [id, spec] : model.components)
    if (spec.allowed_kinds.size() == 2) free.push_back(id);
  return free;
}

Mapping mapping_for_mask(const SystemModel& model,
                         const std::vector<std::string>& free, std::uint32_t mask) {
  Mapping m;
  for (const auto& [id, spec] : model.components)
    m.assignment[id] = spec.allowed_kinds.size() == 1 ? *spec.allowed_kinds.begin()
                                                      : Kind::Software;
  for (std::size_t i = 0; i < free.size(); ++i)
    if (mask & (1u << i)) m.assignment[free[i]] = Kind::Hardware;
  return m;
}

int hardware_count(const Mapping& m) {
  int n = 0;
  for (const auto& [id, k] : m.assignment) {
    (void)id;
    if (k == Kind::Hardware) n += 1;
  }
  return n;
}

tree::Value result_to_tree(const EvaluationResult& r) {
  tree::Value row = tree::Value::object();
  tree::Value mapping = tree::Value::object();
  for (const auto& [id, k] : r.mapping.assignment)
    mapping.push(id, tree::Value::str(to_string(k)));
  row.push("mapping", std::move(mapping));
  row.push("time", tree::Value::num(r.total_time));
  row.push("area", tree::Value::num(r.total_area));
  row.push("energy", tree::Value::num(r.total_energy));
  row.push("security", tree::Value::integer(r.min_security));
  row.push("objective",
           tree::Value::num(static_cast<micros_t>(std::llround(
               r.objective_value * static_cast<double>(kMicrosPerUnit)))));
  row.push("feasible", tree::Value::boolean(r.feasible));
  return row;
}

}  // namespace

std::string to_string(PartitionError::Code c) {
  switch (c) {
    case PartitionError::Code::InvalidMapping: return "InvalidMapping";
    case PartitionError::Code::InvalidObjective: return "InvalidObjective";
    case PartitionError::Code::NoFeasibleMapping: return "NoFeasibleMapping";
    case PartitionError::Code::TooManyFreeComponents: return "TooManyFreeComponents";
  }
  return "?";
}

std::string to_string(SearchMethod m) {
  return m == SearchMethod::Exhaustive ? "exhaustive" : "greedy";
}

bool better_mapping(const EvaluationResult& a, const EvaluationResult& b) {
  if (a.feasible != b.feasible) return a.feasible;
  if (a.objective_value != b.objective_value)
    return a.objective_value < b.objective_value;
  const int ha = hardware_count(a.mapping), hb = hardware_count(b.mapping);
  if (ha != hb) return ha < hb;
  // Lexicographic over component ids in order; Software precedes Hardware.
  auto ai = a.mapping.assignment.begin();
  auto bi = b.mapping.assignment.begin();
  for (; ai != a.mapping.assignment.end() && bi != b.mapping.assignment.end();
       ++ai, ++bi) {
    if (ai->second != bi->second) return ai->second == Kind::Software;
  }
  return false;
}

EvaluationResult evaluate_mapping(const SystemModel& model,
                                  const BehaviorRegistry& registry,
                                  const Scenario& scenario, const Mapping& mapping,
                                  const PartitionObjective& objective,
                                  const Constraints& constraints) {
  check_objective(objective);
  check_mapping(model, mapping);

  SimConfig config{scenario.seed, scenario.step_limit, mapping};
  Trace trace = run(model, registry, config, scenario.inputs);

  EvaluationResult r;
  r.mapping = mapping;
  r.total_time = trace.sim_time;

  for (const auto& [id, spec] : model.components)
    if (mapping.assignment.at(id) == Kind::Hardware) r.total_area += spec.costs.hw_area;

  std::map<std::string, int> firings;
  for (const auto& ev : trace.events)
    if (ev.kind == EventKind::ComponentStart) firings[ev.subject] += 1;
  for (const auto& [id, n] : firings) {
    const auto& spec = model.components.at(id);
    r.total_energy += n * spec.costs.energy(mapping.assignment.at(id));
  }

  r.min_security = 5;
  for (const auto& [id, spec] : model.components)
    r.min_security = std::min(r.min_security,
                              spec.costs.security(mapping.assignment.at(id)));

  const double unit = static_cast<double>(kMicrosPerUnit);
  r.objective_value =
      objective.w_time * (static_cast<double>(r.total_time) /
                          static_cast<double>(objective.ref_time)) +
      objective.w_area * (static_cast<double>(r.total_area) /
                          static_cast<double>(objective.ref_area)) +
      objective.w_energy * (static_cast<double>(r.total_energy) /
                            static_cast<double>(objective.ref_energy)) -
      objective.w_security * (static_cast<double>(r.min_security) * unit /
                              static_cast<double>(objective.ref_security));
  r.feasible = r.total_area <= constraints.area_budget &&
               r.min_security >= constraints.security_floor;
  return r;
}

RefinementDelta refinement_delta(const SystemModel& model,
                                 const BehaviorRegistry& registry,
                                 const Scenario& scenario, const Mapping& a,
                                 const Mapping& b,
                                 const PartitionObjective& objective,
                                 const Constraints& constraints) {
  EvaluationResult ra = evaluate_mapping(model, registry, scenario, a, objective,
                                         constraints);
  EvaluationResult rb = evaluate_mapping(model, registry, scenario, b, objective,
                                         constraints);
  RefinementDelta d;
  d.d_time = rb.total_time - ra.total_time;
  d.d_area = rb.total_area - ra.total_area;
  d.d_energy = rb.total_energy - ra.total_energy;
  d.d_security = rb.min_security - ra.min_security;
  d.d_objective = rb.objective_value - ra.objective_value;
  d.a_feasible = ra.feasible;
  d.b_feasible = rb.feasible;
  return d;
}

namespace {

OptimizeOutcome exhaustive_search(const SystemModel& model,
                                  const BehaviorRegistry& registry,
                                  const Scenario& scenario,
                                  const PartitionObjective& objective,
                                  const Constraints& constraints, bool parallel) {
  check_objective(objective);
  const std::vector<std::string> free = free_components(model);
  if (free.size() > kMaxFreeExhaustive)
    throw PartitionError(PartitionError::Code::TooManyFreeComponents,
                         std::to_string(free.size()) +
                             " dual-kind components exceed the exhaustive cap of " +
                             std::to_string(kMaxFreeExhaustive));
  const std::uint64_t total = 1ull << free.size();
  const std::size_t kept = static_cast<std::size_t>(
      std::min<std::uint64_t>(total, kReportRowCap));

  std::vector<EvaluationResult> rows(kept);
  std::optional<EvaluationResult> best;
  std::exception_ptr failure;

#pragma omp parallel if (parallel)
  {
    std::optional<EvaluationResult> local;
#pragma omp for schedule(dynamic, 8)
    for (std::int64_t mask = 0; mask < static_cast<std::int64_t>(total); ++mask) {
      if (failure) continue;
      try {
        Mapping m = mapping_for_mask(model, free,
                                     static_cast<std::uint32_t>(mask));
        EvaluationResult r =
            evaluate_mapping(model, registry, scenario, m, objective, constraints);
        if (static_cast<std::size_t>(mask) < kept)
          rows[static_cast<std::size_t>(mask)] = r;
        if (!local || better_mapping(r, *local)) local = std::move(r);
      } catch (...) {
#pragma omp critical(f4ms_exhaustive_fail)
        if (!failure) failure = std::current_exception();
      }
    }
#pragma omp critical(f4ms_exhaustive_best)
    if (local && (!best || better_mapping(*local, *best))) best = std::move(local);
  }
  if (failure) std::rethrow_exception(failure);

  if (!best || !best->feasible)
    throw PartitionError(PartitionError::Code::NoFeasibleMapping,
                         "no mapping satisfies the constraints");

  OptimizeOutcome outcome;
  outcome.best = *best;
  outcome.report.method = SearchMethod::Exhaustive;
  outcome.report.evaluated = static_cast<std::size_t>(total);
  outcome.report.rows = std::move(rows);
  outcome.report.rows_omitted = static_cast<std::size_t>(total) - kept;
  return outcome;
}

OptimizeOutcome greedy_search(const SystemModel& model,
                              const BehaviorRegistry& registry,
                              const Scenario& scenario,
                              const PartitionObjective& objective,
                              const Constraints& constraints) {
  check_objective(objective);
  const std::vector<std::string> free = free_components(model);

  OptimizeOutcome outcome;
  outcome.report.method = SearchMethod::Greedy;

  Mapping current = all_software(model);
  EvaluationResult cur = evaluate_mapping(model, registry, scenario, current,
                                          objective, constraints);
  outcome.report.evaluated += 1;
  outcome.report.rows.push_back(cur);
  if (!cur.feasible)
    throw PartitionError(PartitionError::Code::NoFeasibleMapping,
                         "the all-software starting point is infeasible");

  bool improved = true;
  while (improved) {
    improved = false;
    std::optional<EvaluationResult> best_flip;
    std::string best_id;
    for (const auto& id : free) {
      Mapping candidate = current;
      auto& slot = candidate.assignment.at(id);
      slot = slot == Kind::Software ? Kind::Hardware : Kind::Software;
      EvaluationResult r = evaluate_mapping(model, registry, scenario, candidate,
                                            objective, constraints);
      outcome.report.evaluated += 1;
      if (!r.feasible || r.objective_value >= cur.objective_value) continue;
      if (!best_flip || r.objective_value < best_flip->objective_value) {
        best_flip = std::move(r);
        best_id = id;
      }
    }
    if (best_flip) {
      cur = *best_flip;
      current = cur.mapping;
      outcome.report.flips.push_back(best_id);
      outcome.report.rows.push_back(cur);
      improved = true;
    }
  }

  outcome.best = cur;
  return outcome;
}

}  // namespace

OptimizeOutcome optimize(const SystemModel& model, const BehaviorRegistry& registry,
                         const Scenario& scenario,
                         const PartitionObjective& objective,
                         const Constraints& constraints, SearchMethod method) {
  if (method == SearchMethod::Exhaustive)
    return exhaustive_search(model, registry, scenario, objective, constraints, true);
  return greedy_search(model, registry, scenario, objective, constraints);
}

OptimizeOutcome optimize_exhaustive_serial(const SystemModel& model,
                                           const BehaviorRegistry& registry,
                                           const Scenario& scenario,
                                           const PartitionObjective& objective,
                                           const Constraints& constraints) {
  return exhaustive_search(model, registry, scenario, objective, constraints, false);
}

std::string report_export(const OptimizeOutcome& outcome) {
  tree::Value root = tree::Value::object();
  root.push("method", tree::Value::str(to_string(outcome.report.method)));
  root.push("evaluated",
            tree::Value::integer(static_cast<std::int64_t>(outcome.report.evaluated)));
  root.push("best", result_to_tree(outcome.best));
  if (!outcome.report.flips.empty()) {
    tree::Value flips = tree::Value::list();
    for (const auto& f : outcome.report.flips) flips.append(tree::Value::str(f));
    root.push("flips", std::move(flips));
  }
  tree::Value rows = tree::Value::list();
  for (const auto& r : outcome.report.rows) rows.append(result_to_tree(r));
  root.push("rows", std::move(rows));
  if (outcome.report.rows_omitted > 0)
    root.push("rows_omitted",
              tree::Value::integer(static_cast<std::int64_t>(outcome.report.rows_omitted)));
  return tree::write_tree(root);
}

}  // namespace f4ms
