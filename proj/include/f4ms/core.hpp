#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "f4ms/util.hpp"

namespace f4ms {

enum class Kind { Software, Hardware };

std::string to_string(Kind k);                       // "sw" / "hw"
std::optional<Kind> kind_from_string(std::string_view s);

enum class Direction { Input, Output };

// Interface compatibility is by exact tag equality.
struct DataTag {
  std::string name;
  auto operator<=>(const DataTag&) const = default;
};

struct PortSpec {
  std::string name;
  Direction direction = Direction::Input;
  DataTag tag;
  auto operator<=>(const PortSpec&) const = default;
};

// Per-component cost annotations, one column per implementation kind.
// Times, areas and energies are micro-unit decimals; security is a 0-5
// ordinal, higher is better.
struct CostAnnotation {
  micros_t sw_time = 0;
  micros_t hw_time = 0;
  micros_t hw_area = 0;
  micros_t sw_energy = 0;
  micros_t hw_energy = 0;
  int sw_security = 0;
  int hw_security = 0;
  auto operator<=>(const CostAnnotation&) const = default;

  micros_t time(Kind k) const { return k == Kind::Software ? sw_time : hw_time; }
  micros_t energy(Kind k) const {
    return k == Kind::Software ? sw_energy : hw_energy;
  }
  int security(Kind k) const {
    return k == Kind::Software ? sw_security : hw_security;
  }
};

struct ComponentSpec {
  std::string id;
  std::set<Kind> allowed_kinds;
  std::vector<PortSpec> ports;
  CostAnnotation costs;
  std::string behavior;

  auto operator<=>(const ComponentSpec&) const = default;

  const PortSpec* find_port(std::string_view name, Direction dir) const;
  std::vector<const PortSpec*> ports_of(Direction dir) const;
};

struct Message {
  DataTag tag;
  Bytes payload;
  std::string origin_component;
  std::string origin_port;
  auto operator<=>(const Message&) const = default;
};

// ---------------------------------------------------------------------------
// Validation issues. One shared code enum covers component- and system-level
// structural checks; each issue names the offending coordinates.

enum class IssueCode {
  EmptyKinds,
  DuplicatePort,
  UnknownBehavior,
  NegativeCost,
  SecurityRange,
  UnknownComponent,
  UnknownPort,
  ArityViolation,
  DanglingGuard,
  TagMismatch,
  Unreachable,
  NoPathToFinal,
  UnfedInput,
  DuplicateLabel,
  MissingLabel,
  DuplicateEdge,
  DuplicateConnector,
  InitialIsTarget,
  EmptyFinals,
};

std::string to_string(IssueCode code);

struct Issue {
  IssueCode code;
  std::string subject;  // "component", "connector[...]" or "component.port"
  std::string message;
};

std::string format_issue(const Issue& issue);

// ---------------------------------------------------------------------------
// Behaviors. A behavior is a pure function of (consumed input messages,
// component-local state, deterministic randomness); it returns output
// payloads keyed by output-port name plus the updated state.

struct FiringContext {
  const ComponentSpec* component = nullptr;
  std::map<std::string, Message> inputs;
  Bytes state;
  std::uint64_t firing_index = 0;  // 0-based per component per run
  SplitMix64 rng{0};

  // Message payload for a port the behavior relies on; the engine reports a
  // missing one as a behavior/declaration mismatch.
  const Bytes& require(const std::string& port) const;
  const Bytes* maybe(const std::string& port) const;
};

struct FiringResult {
  std::map<std::string, Bytes> outputs;  // output-port name -> payload
  Bytes state;
};

struct Behavior {
  std::string name;
  // Input ports that must be fed by interaction edges (checked at system
  // validation). The default firing gate waits on exactly these.
  std::vector<std::string> required_inputs;
  // Consumed when present but never waited on.
  std::vector<std::string> optional_inputs;
  // State-dependent firing gate; when unset, required_inputs is used. Lets a
  // component participate in multi-round protocols over one port set.
  std::function<std::vector<std::string>(const Bytes& state)> needs;
  std::function<FiringResult(FiringContext&)> fire;

  std::vector<std::string> needs_for(const Bytes& state) const {
    return needs ? needs(state) : required_inputs;
  }
};

struct RegistryError : std::runtime_error {
  enum class Code { DuplicateBehavior, NotFound };
  Code code;
  RegistryError(Code c, const std::string& msg)
      : std::runtime_error(msg), code(c) {}
};

class BehaviorRegistry {
 public:
  // Throws RegistryError{DuplicateBehavior} if the name exists.
  void add(Behavior behavior);
  const Behavior* find(std::string_view name) const;
  // Throws RegistryError{NotFound}.
  const Behavior& resolve(std::string_view name) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, Behavior, std::less<>> entries_;
};

// Collects every invariant violation, not just the first:
// non-empty kinds, per-direction port-name uniqueness, resolvable behavior,
// finite non-negative costs, security levels in [0,5].
std::vector<Issue> validate_component(const ComponentSpec& spec,
                                      const BehaviorRegistry& registry);

}  // namespace f4ms
