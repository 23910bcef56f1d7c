#include "f4ms/core.hpp"

namespace f4ms {

std::string to_string(Kind k) {
  return k == Kind::Software ? "sw" : "hw";
}

std::optional<Kind> kind_from_string(std::string_view s) {
  if (s == "sw") return Kind::Software;
  if (s == "hw") return Kind::Hardware;
  return std::nullopt;
}

const PortSpec* ComponentSpec::find_port(std::string_view name,
                                         Direction dir) const {
  for (const auto& p : ports) {
    if (p.direction == dir && p.name == name) return &p;
  }
  return nullptr;
}

std::vector<const PortSpec*> ComponentSpec::ports_of(Direction dir) const {
  std::vector<const PortSpec*> out;
  for (const auto& p : ports) {
    if (p.direction == dir) out.push_back(&p);
  }
  return out;
}

std::string to_string(IssueCode code) {
  switch (code) {
    case IssueCode::EmptyKinds: return "EmptyKinds";
    case IssueCode::DuplicatePort: return "DuplicatePort";
    case IssueCode::UnknownBehavior: return "UnknownBehavior";
    case IssueCode::NegativeCost: return "NegativeCost";
    case IssueCode::SecurityRange: return "SecurityRange";
    case IssueCode::UnknownComponent: return "UnknownComponent";
    case IssueCode::UnknownPort: return "UnknownPort";
    case IssueCode::ArityViolation: return "ArityViolation";
    case IssueCode::DanglingGuard: return "DanglingGuard";
    case IssueCode::TagMismatch: return "TagMismatch";
    case IssueCode::Unreachable: return "Unreachable";
    case IssueCode::NoPathToFinal: return "NoPathToFinal";
    case IssueCode::UnfedInput: return "UnfedInput";
    case IssueCode::DuplicateLabel: return "DuplicateLabel";
    case IssueCode::MissingLabel: return "MissingLabel";
    case IssueCode::DuplicateEdge: return "DuplicateEdge";
    case IssueCode::DuplicateConnector: return "DuplicateConnector";
    case IssueCode::InitialIsTarget: return "InitialIsTarget";
    case IssueCode::EmptyFinals: return "EmptyFinals";
  }
  return "?";
}

std::string format_issue(const Issue& issue) {
  return to_string(issue.code) + ": " + issue.subject + ": " + issue.message;
}

const Bytes& FiringContext::require(const std::string& port) const {
  auto it = inputs.find(port);
  if (it == inputs.end()) {
    throw std::out_of_range("behavior read unfed port '" + port + "'");
  }
  return it->second.payload;
}

const Bytes* FiringContext::maybe(const std::string& port) const {
  auto it = inputs.find(port);
  return it == inputs.end() ? nullptr : &it->second.payload;
}

void BehaviorRegistry::add(Behavior behavior) {
  auto [it, inserted] = entries_.emplace(behavior.name, behavior);
  (void)it;
  if (!inserted) {
    throw RegistryError(RegistryError::Code::DuplicateBehavior,
                        "behavior '" + behavior.name + "' already registered");
  }
}

const Behavior* BehaviorRegistry::find(std::string_view name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

const Behavior& BehaviorRegistry::resolve(std::string_view name) const {
  const Behavior* b = find(name);
  if (!b) {
    throw RegistryError(RegistryError::Code::NotFound,
                        "behavior '" + std::string(name) + "' not found");
  }
  return *b;
}

std::vector<Issue> validate_component(const ComponentSpec& spec,
                                      const BehaviorRegistry& registry) {
  std::vector<Issue> issues;
  auto add = [&](IssueCode code, std::string subject, std::string msg) {
    issues.push_back(Issue{code, std::move(subject), std::move(msg)});
  };

  if (spec.allowed_kinds.empty()) {
    add(IssueCode::EmptyKinds, spec.id, "allowed_kinds must be non-empty");
  }

  for (Direction dir : {Direction::Input, Direction::Output}) {
    std::set<std::string> seen;
    for (const auto& p : spec.ports) {
      if (p.direction != dir) continue;
      if (!seen.insert(p.name).second) {
        add(IssueCode::DuplicatePort, spec.id + "." + p.name,
            std::string(dir == Direction::Input ? "input" : "output") +
                " port name repeated");
      }
    }
  }

  if (!registry.find(spec.behavior)) {
    add(IssueCode::UnknownBehavior, spec.id,
        "behavior '" + spec.behavior + "' is not registered");
  }

  const auto& c = spec.costs;
  auto check_cost = [&](micros_t v, const char* field) {
    if (v < 0) {
      add(IssueCode::NegativeCost, spec.id,
          std::string(field) + " must be non-negative");
    }
  };
  check_cost(c.sw_time, "sw_time");
  check_cost(c.hw_time, "hw_time");
  check_cost(c.hw_area, "hw_area");
  check_cost(c.sw_energy, "sw_energy");
  check_cost(c.hw_energy, "hw_energy");
  auto check_sec = [&](int v, const char* field) {
    if (v < 0 || v > 5) {
      add(IssueCode::SecurityRange, spec.id,
          std::string(field) + " must be in [0,5]");
    }
  };
  check_sec(c.sw_security, "sw_security");
  check_sec(c.hw_security, "hw_security");

  return issues;
}

}  // namespace f4ms
