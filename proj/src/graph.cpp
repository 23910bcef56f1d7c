#include "f4ms/graph.hpp"

#include <algorithm>
#include <deque>

namespace f4ms {

std::string to_string(ConnectorKind k) {
  switch (k) {
    case ConnectorKind::Sequence: return "seq";
    case ConnectorKind::Parallel: return "par";
    case ConnectorKind::ExclusiveChoice: return "xor";
    case ConnectorKind::Synchronization: return "sync";
  }
  return "?";
}

std::optional<ConnectorKind> connector_kind_from_string(std::string_view s) {
  if (s == "seq") return ConnectorKind::Sequence;
  if (s == "par") return ConnectorKind::Parallel;
  if (s == "xor") return ConnectorKind::ExclusiveChoice;
  if (s == "sync") return ConnectorKind::Synchronization;
  return std::nullopt;
}

std::set<std::string> reachable_components(const SchedulingGraph& spg) {
  std::set<std::string> reached;
  if (!spg.initial.empty()) reached.insert(spg.initial);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& c : spg.connectors) {
      bool enabled;
      if (c.kind == ConnectorKind::Synchronization) {
        enabled = !c.sources.empty() &&
                  std::all_of(c.sources.begin(), c.sources.end(),
                              [&](const std::string& s) { return reached.count(s) > 0; });
      } else {
        enabled = !c.sources.empty() && reached.count(c.sources.front()) > 0;
      }
      if (!enabled) continue;
      for (const auto& t : c.targets) {
        if (reached.insert(t).second) changed = true;
      }
    }
  }
  return reached;
}

namespace {

// All (source, target) pairs a connector can realize, for path analysis.
void collect_pairs(const SchedulingGraph& spg,
                   std::vector<std::pair<std::string, std::string>>& pairs) {
  for (const auto& c : spg.connectors)
    for (const auto& s : c.sources)
      for (const auto& t : c.targets) pairs.emplace_back(s, t);
}

void check_connector(const SystemModel& model, const SchedulingConnector& c,
                     std::vector<Issue>& issues) {
  auto known = [&](const std::string& id) { return model.spg.fsc.count(id) > 0; };
  for (const auto& s : c.sources)
    if (!known(s))
      issues.push_back({IssueCode::UnknownComponent, c.id,
                        "connector source '" + s + "' is not a component"});
  for (const auto& t : c.targets)
    if (!known(t))
      issues.push_back({IssueCode::UnknownComponent, c.id,
                        "connector target '" + t + "' is not a component"});

  const size_t ns = c.sources.size(), nt = c.targets.size();
  switch (c.kind) {
    case ConnectorKind::Sequence:
      if (ns != 1 || nt != 1)
        issues.push_back({IssueCode::ArityViolation, c.id,
                          "sequence requires exactly one source and one target"});
      break;
    case ConnectorKind::Parallel:
      if (ns != 1 || nt < 2)
        issues.push_back({IssueCode::ArityViolation, c.id,
                          "parallel requires one source and at least two targets"});
      break;
    case ConnectorKind::ExclusiveChoice:
      if (ns != 1 || nt < 2)
        issues.push_back({IssueCode::ArityViolation, c.id,
                          "exclusive choice requires one source and at least two targets"});
      break;
    case ConnectorKind::Synchronization:
      if (ns < 2 || nt != 1)
        issues.push_back({IssueCode::ArityViolation, c.id,
                          "synchronization requires at least two sources and one target"});
      break;
  }

  if (c.kind == ConnectorKind::ExclusiveChoice) {
    if (!c.guard_port) {
      issues.push_back({IssueCode::DanglingGuard, c.id,
                        "exclusive choice requires a guard port"});
    } else {
      const auto& [gc, gp] = *c.guard_port;
      if (ns != 1 || gc != c.sources.front()) {
        issues.push_back({IssueCode::DanglingGuard, c.id,
                          "guard port must belong to the connector source"});
      } else {
        auto it = model.components.find(gc);
        if (it == model.components.end() ||
            it->second.find_port(gp, Direction::Output) == nullptr)
          issues.push_back({IssueCode::DanglingGuard, c.id,
                            "guard port '" + gc + "." + gp + "' is not an output port"});
      }
    }
    std::set<std::string> seen_labels;
    for (const auto& t : c.targets) {
      auto it = c.branch_labels.find(t);
      if (it == c.branch_labels.end()) {
        issues.push_back({IssueCode::MissingLabel, c.id,
                          "target '" + t + "' has no branch label"});
      } else if (!seen_labels.insert(it->second).second) {
        issues.push_back({IssueCode::DuplicateLabel, c.id,
                          "branch label '" + it->second + "' used more than once"});
      }
    }
    for (const auto& [t, label] : c.branch_labels) {
      (void)label;
      if (std::find(c.targets.begin(), c.targets.end(), t) == c.targets.end())
        issues.push_back({IssueCode::DanglingGuard, c.id,
                          "branch label names '" + t + "' which is not a target"});
    }
    if (c.default_target &&
        std::find(c.targets.begin(), c.targets.end(), *c.default_target) == c.targets.end())
      issues.push_back({IssueCode::DanglingGuard, c.id,
                        "default target '" + *c.default_target + "' is not a target"});
  } else {
    if (c.guard_port)
      issues.push_back({IssueCode::DanglingGuard, c.id,
                        "guard port is only valid on an exclusive choice"});
    if (!c.branch_labels.empty())
      issues.push_back({IssueCode::DanglingGuard, c.id,
                        "branch labels are only valid on an exclusive choice"});
    if (c.default_target)
      issues.push_back({IssueCode::DanglingGuard, c.id,
                        "a default target is only valid on an exclusive choice"});
  }
}

}  // namespace

std::vector<Issue> validate_system(const SystemModel& model,
                                   const BehaviorRegistry& registry) {
  std::vector<Issue> issues;

  for (const auto& [id, spec] : model.components) {
    auto sub = validate_component(spec, registry);
    issues.insert(issues.end(), sub.begin(), sub.end());
  }

  // fsc and the component table must name the same set.
  for (const auto& id : model.spg.fsc)
    if (!model.components.count(id))
      issues.push_back({IssueCode::UnknownComponent, id,
                        "listed in the scheduling graph but not declared"});
  for (const auto& [id, spec] : model.components) {
    (void)spec;
    if (!model.spg.fsc.count(id))
      issues.push_back({IssueCode::UnknownComponent, id,
                        "declared but missing from the scheduling graph"});
  }

  if (model.spg.initial.empty() || !model.spg.fsc.count(model.spg.initial))
    issues.push_back({IssueCode::UnknownComponent, model.spg.initial,
                      "initial component is not in the scheduling graph"});
  if (model.spg.finals.empty())
    issues.push_back({IssueCode::EmptyFinals, model.name,
                      "the set of final components is empty"});
  for (const auto& f : model.spg.finals)
    if (!model.spg.fsc.count(f))
      issues.push_back({IssueCode::UnknownComponent, f,
                        "final component is not in the scheduling graph"});

  std::set<std::string> connector_ids;
  for (const auto& c : model.spg.connectors) {
    if (!connector_ids.insert(c.id).second)
      issues.push_back({IssueCode::DuplicateConnector, c.id,
                        "connector id used more than once"});
    check_connector(model, c, issues);
    for (const auto& t : c.targets)
      if (t == model.spg.initial)
        issues.push_back({IssueCode::InitialIsTarget, c.id,
                          "the initial component may not be a connector target"});
  }

  // Only meaningful to analyze flow once the structure above holds.
  if (issues.empty()) {
    auto reached = reachable_components(model.spg);
    for (const auto& id : model.spg.fsc)
      if (!reached.count(id))
        issues.push_back({IssueCode::Unreachable, id,
                          "not reachable from the initial component"});

    std::vector<std::pair<std::string, std::string>> pairs;
    collect_pairs(model.spg, pairs);
    std::set<std::string> to_final(model.spg.finals.begin(), model.spg.finals.end());
    bool grew = true;
    while (grew) {
      grew = false;
      for (const auto& [s, t] : pairs)
        if (to_final.count(t) && to_final.insert(s).second) grew = true;
    }
    for (const auto& id : reached)
      if (!to_final.count(id))
        issues.push_back({IssueCode::NoPathToFinal, id,
                          "no path to any final component"});

    std::set<std::tuple<std::string, std::string, std::string, std::string>> seen_edges;
    for (const auto& e : model.ig.edges) {
      const std::string subj = e.from_component + "." + e.from_port + " -> " +
                               e.to_component + "." + e.to_port;
      auto fi = model.components.find(e.from_component);
      auto ti = model.components.find(e.to_component);
      if (fi == model.components.end()) {
        issues.push_back({IssueCode::UnknownComponent, subj,
                          "edge source component '" + e.from_component + "' not declared"});
        continue;
      }
      if (ti == model.components.end()) {
        issues.push_back({IssueCode::UnknownComponent, subj,
                          "edge target component '" + e.to_component + "' not declared"});
        continue;
      }
      const PortSpec* fp = fi->second.find_port(e.from_port, Direction::Output);
      const PortSpec* tp = ti->second.find_port(e.to_port, Direction::Input);
      if (!fp) {
        issues.push_back({IssueCode::UnknownPort, subj,
                          "'" + e.from_component + "." + e.from_port +
                              "' is not an output port"});
        continue;
      }
      if (!tp) {
        issues.push_back({IssueCode::UnknownPort, subj,
                          "'" + e.to_component + "." + e.to_port +
                              "' is not an input port"});
        continue;
      }
      if (fp->tag.name != tp->tag.name)
        issues.push_back({IssueCode::TagMismatch, subj,
                          "expected '" + tp->tag.name + "', found '" + fp->tag.name + "'"});
      if (!seen_edges.insert({e.from_component, e.from_port, e.to_component, e.to_port}).second)
        issues.push_back({IssueCode::DuplicateEdge, subj, "edge declared more than once"});
    }

    // Behavior contract: every statically required input of a reachable
    // component must exist and be fed by at least one edge.
    std::set<std::pair<std::string, std::string>> fed;
    for (const auto& e : model.ig.edges) fed.insert({e.to_component, e.to_port});
    for (const auto& id : reached) {
      auto ci = model.components.find(id);
      if (ci == model.components.end()) continue;
      const Behavior* b = registry.find(ci->second.behavior);
      if (!b) continue;  // already reported per-component
      for (const auto& port : b->required_inputs) {
        if (ci->second.find_port(port, Direction::Input) == nullptr) {
          issues.push_back({IssueCode::UnknownPort, id,
                            "behavior '" + b->name + "' requires input port '" + port +
                                "' which the component does not declare"});
        } else if (!fed.count({id, port})) {
          issues.push_back({IssueCode::UnfedInput, id,
                            "required input port '" + port + "' is fed by no edge"});
        }
      }
    }
  }

  return issues;
}

std::string EdgeCompatibility::verdict() const {
  if (!failure) return "TagOk";
  switch (failure->code) {
    case IssueCode::TagMismatch: return "TagMismatch";
    case IssueCode::UnknownPort: return "UnknownPort";
    case IssueCode::UnknownComponent: return "UnknownComponent";
    default: return "Invalid";
  }
}

std::vector<EdgeCompatibility> compatibility_report(const SystemModel& model) {
  std::vector<EdgeCompatibility> out;
  out.reserve(model.ig.edges.size());
  for (const auto& e : model.ig.edges) {
    EdgeCompatibility ec;
    ec.edge = e;
    const std::string subj = e.from_component + "." + e.from_port + " -> " +
                             e.to_component + "." + e.to_port;
    auto fi = model.components.find(e.from_component);
    auto ti = model.components.find(e.to_component);
    if (fi == model.components.end() || ti == model.components.end()) {
      const std::string& missing =
          fi == model.components.end() ? e.from_component : e.to_component;
      ec.failure = Issue{IssueCode::UnknownComponent, subj,
                         "component '" + missing + "' not declared"};
      out.push_back(std::move(ec));
      continue;
    }
    const PortSpec* fp = fi->second.find_port(e.from_port, Direction::Output);
    const PortSpec* tp = ti->second.find_port(e.to_port, Direction::Input);
    if (!fp || !tp) {
      const std::string missing = !fp ? e.from_component + "." + e.from_port
                                      : e.to_component + "." + e.to_port;
      ec.failure = Issue{IssueCode::UnknownPort, subj,
                         "port '" + missing + "' not declared with the needed direction"};
      out.push_back(std::move(ec));
      continue;
    }
    ec.syntactic_ok = true;
    if (fp->tag.name != tp->tag.name)
      ec.failure = Issue{IssueCode::TagMismatch, subj,
                         "expected '" + tp->tag.name + "', found '" + fp->tag.name + "'"};
    out.push_back(std::move(ec));
  }
  return out;
}

}  // namespace f4ms
