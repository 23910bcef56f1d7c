#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "f4ms/core.hpp"

namespace f4ms {

enum class ConnectorKind { Sequence, Parallel, ExclusiveChoice, Synchronization };

std::string to_string(ConnectorKind k);  // "seq" / "par" / "xor" / "sync"
std::optional<ConnectorKind> connector_kind_from_string(std::string_view s);

// Control connector. Arity per kind:
//   Sequence         1 source, 1 target
//   Parallel         1 source, >=2 targets
//   ExclusiveChoice  1 source, >=2 targets, guard + distinct branch labels
//   Synchronization  >=2 sources, 1 target
// An exclusive choice routes to the target whose branch label equals the
// payload the source emitted on guard_port, else to default_target.
struct SchedulingConnector {
  std::string id;
  ConnectorKind kind = ConnectorKind::Sequence;
  std::vector<std::string> sources;
  std::vector<std::string> targets;
  std::optional<std::pair<std::string, std::string>> guard_port;  // (component, output port)
  std::map<std::string, std::string> branch_labels;               // target id -> label
  std::optional<std::string> default_target;

  auto operator<=>(const SchedulingConnector&) const = default;
};

// Scheduling and parallelism graph: component set, connectors (which encode
// the transition relation), one initial component, non-empty final set.
// Cycles are permitted everywhere except back into the initial component;
// the engine bounds execution with a step limit instead.
struct SchedulingGraph {
  std::set<std::string> fsc;
  std::vector<SchedulingConnector> connectors;
  std::string initial;
  std::set<std::string> finals;

  auto operator<=>(const SchedulingGraph&) const = default;
};

// Typed data-transfer edge between an output port and an input port.
struct InteractionEdge {
  std::string from_component;
  std::string from_port;
  std::string to_component;
  std::string to_port;

  auto operator<=>(const InteractionEdge&) const = default;
};

// Fan-in to one input port is legal; the engine resolves conflicts
// last-writer-wins.
struct InteractionGraph {
  std::vector<InteractionEdge> edges;
  auto operator<=>(const InteractionGraph&) const = default;
};

struct SystemModel {
  std::string name;
  std::map<std::string, ComponentSpec> components;
  SchedulingGraph spg;
  InteractionGraph ig;

  auto operator<=>(const SystemModel&) const = default;
};

// Least fixed point containing the initial component and closed under
// connector traversal: a synchronization fires only when every source is
// reachable, the other kinds when their single source is.
std::set<std::string> reachable_components(const SchedulingGraph& spg);

// Full structural validation. Empty result means the model is valid:
// component invariants, fsc/components agreement, connector arities and
// guards, initial/finals placement, reachability of every component, a path
// from every reachable component to some final, edge endpoint existence, tag
// compatibility, no duplicate edges, and every behavior-required input fed
// by at least one edge.
std::vector<Issue> validate_system(const SystemModel& model,
                                   const BehaviorRegistry& registry);

// Per-edge compatibility verdict, one entry per edge in declaration order.
struct EdgeCompatibility {
  InteractionEdge edge;
  bool syntactic_ok = false;           // both endpoints exist
  std::optional<Issue> failure;        // unset when fully compatible
  std::string verdict() const;         // "TagOk" or the failure code
};

std::vector<EdgeCompatibility> compatibility_report(const SystemModel& model);

}  // namespace f4ms
