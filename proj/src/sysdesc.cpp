#include "f4ms/sysdesc.hpp"

#include <algorithm>

namespace f4ms::sysdesc {

using tree::DiagCategory;
using tree::Diagnostic;
using tree::SourceLocation;
using tree::Value;

namespace {

// Accumulates schema diagnostics while walking the tree; the walk keeps
// going after an error so one pass reports every independent problem.
struct Walk {
  std::string file;
  std::vector<Diagnostic>* out;

  SourceLocation at(const Value& v, std::string path) const {
    SourceLocation loc = v.loc;
    loc.file = file;
    loc.path = std::move(path);
    return loc;
  }

  void schema(const Value& v, const std::string& path, std::string msg) const {
    out->push_back({DiagCategory::Schema, at(v, path), std::move(msg)});
  }

  const Value* key(const Value& obj, const std::string& path,
                   const std::string& name, bool required) const {
    const Value* v = obj.find(name);
    if (!v && required)
      schema(obj, path, "missing required key '" + name + "'");
    return v;
  }

  void reject_unknown(const Value& obj, const std::string& path,
                      std::initializer_list<std::string_view> known) const {
    for (const auto& [k, v] : obj.as_object()) {
      if (std::find(known.begin(), known.end(), k) == known.end())
        schema(v, path + "." + k, "unknown key '" + k + "'");
    }
  }

  std::optional<std::string> want_string(const Value* v, const std::string& path) const {
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      schema(*v, path, "expected a string");
      return std::nullopt;
    }
    return v->as_string();
  }

  std::optional<std::string> want_identifier(const Value* v,
                                             const std::string& path) const {
    auto s = want_string(v, path);
    if (!s) return std::nullopt;
    if (!tree::valid_identifier(*s)) {
      schema(*v, path, "'" + *s + "' is not a valid identifier");
      return std::nullopt;
    }
    return s;
  }

  std::optional<micros_t> want_decimal(const Value* v, const std::string& path,
                                       bool non_negative) const {
    if (!v) return std::nullopt;
    if (!v->is_number()) {
      schema(*v, path, "expected a decimal number");
      return std::nullopt;
    }
    micros_t m = v->as_micros();
    if (non_negative && m < 0) {
      schema(*v, path, "expected a non-negative decimal");
      return std::nullopt;
    }
    return m;
  }

  std::optional<int> want_integer(const Value* v, const std::string& path) const {
    if (!v) return std::nullopt;
    if (!v->is_number() || v->as_micros() % kMicrosPerUnit != 0) {
      schema(*v, path, "expected an integer");
      return std::nullopt;
    }
    return static_cast<int>(v->as_micros() / kMicrosPerUnit);
  }

  // Single string or list of strings; empty result after an error.
  std::vector<std::string> want_string_or_list(const Value* v,
                                               const std::string& path) const {
    std::vector<std::string> result;
    if (!v) return result;
    if (v->is_string()) {
      result.push_back(v->as_string());
      return result;
    }
    if (!v->is_list()) {
      schema(*v, path, "expected a string or a list of strings");
      return result;
    }
    size_t i = 0;
    for (const auto& item : v->as_list()) {
      const std::string ipath = path + "[" + std::to_string(i++) + "]";
      if (!item.is_string())
        schema(item, ipath, "expected a string");
      else
        result.push_back(item.as_string());
    }
    return result;
  }

  // Exactly ["component" "port"].
  std::optional<std::pair<std::string, std::string>> want_endpoint(
      const Value* v, const std::string& path) const {
    if (!v) return std::nullopt;
    if (!v->is_list() || v->as_list().size() != 2 ||
        !v->as_list()[0].is_string() || !v->as_list()[1].is_string()) {
      schema(*v, path, "expected [component port]");
      return std::nullopt;
    }
    return std::make_pair(v->as_list()[0].as_string(), v->as_list()[1].as_string());
  }
};

std::vector<PortSpec> walk_ports(const Walk& w, const Value* v,
                                 const std::string& path, Direction dir) {
  std::vector<PortSpec> ports;
  if (!v) return ports;
  if (!v->is_list()) {
    w.schema(*v, path, "expected a list of ports");
    return ports;
  }
  size_t i = 0;
  for (const auto& entry : v->as_list()) {
    const std::string epath = path + "[" + std::to_string(i++) + "]";
    if (!entry.is_object()) {
      w.schema(entry, epath, "expected a port object {name tag}");
      continue;
    }
    w.reject_unknown(entry, epath, {"name", "tag"});
    auto name = w.want_identifier(w.key(entry, epath, "name", true), epath + ".name");
    auto tag = w.want_identifier(w.key(entry, epath, "tag", true), epath + ".tag");
    if (name && tag) ports.push_back({*name, dir, DataTag{*tag}});
  }
  return ports;
}

CostAnnotation walk_costs(const Walk& w, const Value* v, const std::string& path) {
  CostAnnotation c;
  if (!v) return c;
  if (!v->is_object()) {
    w.schema(*v, path, "expected a costs object");
    return c;
  }
  w.reject_unknown(*v, path,
                   {"sw_time", "hw_time", "hw_area", "sw_energy", "hw_energy",
                    "sw_security", "hw_security"});
  auto dec = [&](const char* k, micros_t& slot) {
    if (auto m = w.want_decimal(w.key(*v, path, k, true), path + "." + k, true))
      slot = *m;
  };
  dec("sw_time", c.sw_time);
  dec("hw_time", c.hw_time);
  dec("hw_area", c.hw_area);
  dec("sw_energy", c.sw_energy);
  dec("hw_energy", c.hw_energy);
  if (auto s = w.want_integer(w.key(*v, path, "sw_security", true), path + ".sw_security"))
    c.sw_security = *s;
  if (auto s = w.want_integer(w.key(*v, path, "hw_security", true), path + ".hw_security"))
    c.hw_security = *s;
  return c;
}

std::optional<ComponentSpec> walk_component(const Walk& w, const Value& v,
                                            const std::string& path) {
  if (!v.is_object()) {
    w.schema(v, path, "expected a component object");
    return std::nullopt;
  }
  w.reject_unknown(v, path, {"id", "kinds", "inputs", "outputs", "costs", "behavior"});
  ComponentSpec spec;
  auto id = w.want_identifier(w.key(v, path, "id", true), path + ".id");
  if (!id) return std::nullopt;
  spec.id = *id;

  if (const Value* kinds = w.key(v, path, "kinds", true)) {
    const std::string kpath = path + ".kinds";
    if (!kinds->is_list()) {
      w.schema(*kinds, kpath, "expected a list of kinds");
    } else {
      size_t i = 0;
      for (const auto& item : kinds->as_list()) {
        const std::string ipath = kpath + "[" + std::to_string(i++) + "]";
        auto s = w.want_string(&item, ipath);
        if (!s) continue;
        auto k = kind_from_string(*s);
        if (!k) {
          w.schema(item, ipath, "kind must be \"sw\" or \"hw\"");
        } else if (!spec.allowed_kinds.insert(*k).second) {
          w.schema(item, ipath, "kind \"" + *s + "\" listed twice");
        }
      }
    }
  }

  auto in = walk_ports(w, v.find("inputs"), path + ".inputs", Direction::Input);
  auto out_ports = walk_ports(w, v.find("outputs"), path + ".outputs", Direction::Output);
  spec.ports = std::move(in);
  spec.ports.insert(spec.ports.end(), out_ports.begin(), out_ports.end());
  spec.costs = walk_costs(w, w.key(v, path, "costs", true), path + ".costs");
  if (auto b = w.want_identifier(w.key(v, path, "behavior", true), path + ".behavior"))
    spec.behavior = *b;
  return spec;
}

std::optional<SchedulingConnector> walk_connector(const Walk& w, const Value& v,
                                                  const std::string& path) {
  if (!v.is_object()) {
    w.schema(v, path, "expected a connector object");
    return std::nullopt;
  }
  w.reject_unknown(v, path, {"id", "kind", "from", "to", "guard_port", "labels", "default"});
  SchedulingConnector c;
  auto id = w.want_identifier(w.key(v, path, "id", true), path + ".id");
  if (!id) return std::nullopt;
  c.id = *id;

  bool shape_ok = true;
  if (auto ks = w.want_string(w.key(v, path, "kind", true), path + ".kind")) {
    auto k = connector_kind_from_string(*ks);
    if (!k) {
      w.schema(*v.find("kind"), path + ".kind",
               "kind must be one of \"seq\", \"par\", \"xor\", \"sync\"");
      shape_ok = false;
    } else {
      c.kind = *k;
    }
  } else {
    shape_ok = false;
  }
  c.sources = w.want_string_or_list(w.key(v, path, "from", true), path + ".from");
  c.targets = w.want_string_or_list(w.key(v, path, "to", true), path + ".to");

  if (auto gp = w.want_endpoint(v.find("guard_port"), path + ".guard_port"))
    c.guard_port = *gp;
  if (const Value* labels = v.find("labels")) {
    const std::string lpath = path + ".labels";
    if (!labels->is_object()) {
      w.schema(*labels, lpath, "expected an object mapping target to label");
    } else {
      for (const auto& [target, label] : labels->as_object()) {
        if (auto s = w.want_identifier(&label, lpath + "." + target))
          c.branch_labels[target] = *s;
      }
    }
  }
  if (auto d = w.want_string(v.find("default"), path + ".default"))
    c.default_target = *d;

  // Structural requirements the schema already fixes: an exclusive choice
  // carries a guard and labels; nothing else may.
  if (shape_ok && c.kind == ConnectorKind::ExclusiveChoice) {
    if (!v.find("guard_port"))
      w.schema(v, path, "exclusive choice requires 'guard_port'");
    if (!v.find("labels"))
      w.schema(v, path, "exclusive choice requires 'labels'");
  }
  return c;
}

Value render_endpoint(const std::string& comp, const std::string& port) {
  Value v = Value::list();
  v.append(Value::str(comp));
  v.append(Value::str(port));
  return v;
}

Value render_names(const std::vector<std::string>& names) {
  if (names.size() == 1) return Value::str(names.front());
  Value v = Value::list();
  for (const auto& n : names) v.append(Value::str(n));
  return v;
}

Value render_ports(const ComponentSpec& c, Direction dir) {
  Value v = Value::list();
  for (const PortSpec* p : c.ports_of(dir)) {
    Value e = Value::object();
    e.push("name", Value::str(p->name));
    e.push("tag", Value::str(p->tag.name));
    v.append(std::move(e));
  }
  return v;
}

}  // namespace

ParseOutcome parse_system(std::string_view text, std::string_view file_name,
                          const BehaviorRegistry& registry) {
  ParseOutcome outcome;
  tree::ParseResult parsed = tree::parse_tree(text, std::string(file_name));
  if (!parsed.root) {
    outcome.diagnostics = std::move(parsed.diagnostics);
    return outcome;
  }

  Walk w{std::string(file_name), &outcome.diagnostics};
  const Value& root = *parsed.root;
  w.reject_unknown(root, "", {"name", "components", "spg", "ig"});

  SystemModel model;
  if (auto name = w.want_identifier(w.key(root, "", "name", true), "name"))
    model.name = *name;

  if (const Value* comps = w.key(root, "", "components", true)) {
    if (!comps->is_list()) {
      w.schema(*comps, "components", "expected a list of components");
    } else {
      size_t i = 0;
      for (const auto& entry : comps->as_list()) {
        const std::string cpath = "components[" + std::to_string(i++) + "]";
        if (auto spec = walk_component(w, entry, cpath)) {
          if (!model.components.emplace(spec->id, *spec).second)
            w.schema(entry, cpath, "duplicate component id '" + spec->id + "'");
        }
      }
    }
  }
  for (const auto& [id, spec] : model.components) {
    (void)spec;
    model.spg.fsc.insert(id);
  }

  if (const Value* spg = w.key(root, "", "spg", true)) {
    if (!spg->is_object()) {
      w.schema(*spg, "spg", "expected an object");
    } else {
      w.reject_unknown(*spg, "spg", {"initial", "finals", "connectors"});
      if (auto init = w.want_string(w.key(*spg, "spg", "initial", true), "spg.initial"))
        model.spg.initial = *init;
      if (const Value* finals = w.key(*spg, "spg", "finals", true)) {
        for (const auto& f :
             w.want_string_or_list(finals, "spg.finals"))
          model.spg.finals.insert(f);
      }
      if (const Value* conns = w.key(*spg, "spg", "connectors", true)) {
        if (!conns->is_list()) {
          w.schema(*conns, "spg.connectors", "expected a list of connectors");
        } else {
          size_t i = 0;
          for (const auto& entry : conns->as_list()) {
            const std::string cpath = "spg.connectors[" + std::to_string(i++) + "]";
            if (auto c = walk_connector(w, entry, cpath))
              model.spg.connectors.push_back(std::move(*c));
          }
        }
      }
    }
  }

  if (const Value* ig = w.key(root, "", "ig", true)) {
    if (!ig->is_list()) {
      w.schema(*ig, "ig", "expected a list of edges");
    } else {
      size_t i = 0;
      for (const auto& entry : ig->as_list()) {
        const std::string epath = "ig[" + std::to_string(i++) + "]";
        if (!entry.is_object()) {
          w.schema(entry, epath, "expected an edge object {from to}");
          continue;
        }
        w.reject_unknown(entry, epath, {"from", "to"});
        auto from = w.want_endpoint(w.key(entry, epath, "from", true), epath + ".from");
        auto to = w.want_endpoint(w.key(entry, epath, "to", true), epath + ".to");
        if (from && to)
          model.ig.edges.push_back({from->first, from->second, to->first, to->second});
      }
    }
  }

  if (!outcome.diagnostics.empty()) return outcome;

  std::vector<Issue> issues = validate_system(model, registry);
  if (!issues.empty()) {
    for (const auto& issue : issues) {
      SourceLocation loc;
      loc.file = std::string(file_name);
      outcome.diagnostics.push_back(
          {DiagCategory::Validation, std::move(loc), format_issue(issue)});
    }
    return outcome;
  }

  outcome.model = std::move(model);
  return outcome;
}

std::string serialize_system(const SystemModel& model) {
  Value root = Value::object();
  root.push("name", Value::str(model.name));

  Value comps = Value::list();
  for (const auto& [id, c] : model.components) {  // std::map: sorted by id
    (void)id;
    Value e = Value::object();
    e.push("id", Value::str(c.id));
    Value kinds = Value::list();
    if (c.allowed_kinds.count(Kind::Software)) kinds.append(Value::str("sw"));
    if (c.allowed_kinds.count(Kind::Hardware)) kinds.append(Value::str("hw"));
    e.push("kinds", std::move(kinds));
    e.push("inputs", render_ports(c, Direction::Input));
    e.push("outputs", render_ports(c, Direction::Output));
    Value costs = Value::object();
    costs.push("sw_time", Value::num(c.costs.sw_time));
    costs.push("hw_time", Value::num(c.costs.hw_time));
    costs.push("hw_area", Value::num(c.costs.hw_area));
    costs.push("sw_energy", Value::num(c.costs.sw_energy));
    costs.push("hw_energy", Value::num(c.costs.hw_energy));
    costs.push("sw_security", Value::integer(c.costs.sw_security));
    costs.push("hw_security", Value::integer(c.costs.hw_security));
    e.push("costs", std::move(costs));
    e.push("behavior", Value::str(c.behavior));
    comps.append(std::move(e));
  }
  root.push("components", std::move(comps));

  Value spg = Value::object();
  spg.push("initial", Value::str(model.spg.initial));
  Value finals = Value::list();
  for (const auto& f : model.spg.finals) finals.append(Value::str(f));
  spg.push("finals", std::move(finals));
  Value conns = Value::list();
  for (const auto& c : model.spg.connectors) {
    Value e = Value::object();
    e.push("id", Value::str(c.id));
    e.push("kind", Value::str(to_string(c.kind)));
    e.push("from", render_names(c.sources));
    e.push("to", render_names(c.targets));
    if (c.guard_port)
      e.push("guard_port", render_endpoint(c.guard_port->first, c.guard_port->second));
    if (!c.branch_labels.empty()) {
      Value labels = Value::object();
      for (const auto& t : c.targets) {  // target declaration order
        auto it = c.branch_labels.find(t);
        if (it != c.branch_labels.end()) labels.push(t, Value::str(it->second));
      }
      e.push("labels", std::move(labels));
    }
    if (c.default_target) e.push("default", Value::str(*c.default_target));
    conns.append(std::move(e));
  }
  spg.push("connectors", std::move(conns));
  root.push("spg", std::move(spg));

  Value ig = Value::list();
  for (const auto& e : model.ig.edges) {
    Value entry = Value::object();
    entry.push("from", render_endpoint(e.from_component, e.from_port));
    entry.push("to", render_endpoint(e.to_component, e.to_port));
    ig.append(std::move(entry));
  }
  root.push("ig", std::move(ig));

  return tree::write_tree(root);
}

MappingOutcome parse_mapping(std::string_view text, std::string_view file_name) {
  MappingOutcome outcome;
  tree::ParseResult parsed = tree::parse_tree(text, std::string(file_name));
  if (!parsed.root) {
    outcome.diagnostics = std::move(parsed.diagnostics);
    return outcome;
  }
  Walk w{std::string(file_name), &outcome.diagnostics};
  std::map<std::string, Kind> mapping;
  for (const auto& [comp, v] : parsed.root->as_object()) {
    auto s = w.want_string(&v, comp);
    if (!s) continue;
    auto k = kind_from_string(*s);
    if (!k) {
      w.schema(v, comp, "kind must be \"sw\" or \"hw\"");
      continue;
    }
    mapping[comp] = *k;
  }
  if (outcome.diagnostics.empty()) outcome.mapping = std::move(mapping);
  return outcome;
}

std::string serialize_mapping(const std::map<std::string, Kind>& mapping) {
  Value root = Value::object();
  for (const auto& [comp, kind] : mapping)
    root.push(comp, Value::str(to_string(kind)));
  return tree::write_tree(root);
}

}  // namespace f4ms::sysdesc
