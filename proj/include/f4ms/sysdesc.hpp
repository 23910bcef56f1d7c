#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "f4ms/graph.hpp"
#include "f4ms/tree.hpp"

namespace f4ms::sysdesc {

// Result of parsing a system description. `model` is set iff `diagnostics`
// is empty; parsing runs full structural validation, so a returned model is
// always valid against the given registry.
struct ParseOutcome {
  std::optional<SystemModel> model;
  std::vector<tree::Diagnostic> diagnostics;
  bool ok() const { return model.has_value(); }
};

// Wire format (extension .f4ms), canonical tree syntax:
//   name        string
//   components  list of {id, kinds, inputs, outputs, costs, behavior}
//                 kinds   list drawn from {"sw","hw"}
//                 inputs  list of {name, tag}   (optional, default empty)
//                 outputs list of {name, tag}   (optional, default empty)
//                 costs   {sw_time hw_time hw_area sw_energy hw_energy
//                          sw_security hw_security}   all required
//   spg         {initial, finals, connectors}
//                 connector: {id, kind: seq|par|xor|sync, from, to,
//                             guard_port ["comp" "port"], labels
//                             {target label...}, default}  last three xor-only
//   ig          list of {from ["comp" "port"], to ["comp" "port"]}
// `from`/`to` of a connector accept a single string or a list of strings.
// Schema errors are collected exhaustively, not first-error-only.
ParseOutcome parse_system(std::string_view text, std::string_view file_name,
                          const BehaviorRegistry& registry);

// Canonical rendering: top-level key order name/components/spg/ig, components
// sorted by id, fixed key order inside every entry, connectors and edges in
// declaration order. Byte-identical for equal models; roundtrips through
// parse_system.
std::string serialize_system(const SystemModel& model);

// Mapping files assign one kind per component: `<component> "sw"|"hw"` pairs.
struct MappingOutcome {
  std::optional<std::map<std::string, Kind>> mapping;
  std::vector<tree::Diagnostic> diagnostics;
  bool ok() const { return mapping.has_value(); }
};

MappingOutcome parse_mapping(std::string_view text, std::string_view file_name);
std::string serialize_mapping(const std::map<std::string, Kind>& mapping);

}  // namespace f4ms::sysdesc
