#include "f4ms/engine.hpp"

#include <algorithm>

namespace f4ms {

namespace {

Kind pick_default(const ComponentSpec& c, Kind preferred) {
  if (c.allowed_kinds.count(preferred)) return preferred;
  return *c.allowed_kinds.begin();
}

tree::Value endpoint_value(const std::string& comp, const std::string& port) {
  tree::Value v = tree::Value::list();
  v.append(tree::Value::str(comp));
  v.append(tree::Value::str(port));
  return v;
}

}  // namespace

Mapping all_software(const SystemModel& model) {
  Mapping m;
  for (const auto& [id, c] : model.components)
    m.assignment[id] = pick_default(c, Kind::Software);
  return m;
}

Mapping all_hardware_where_allowed(const SystemModel& model) {
  Mapping m;
  for (const auto& [id, c] : model.components)
    m.assignment[id] = pick_default(c, Kind::Hardware);
  return m;
}

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::ComponentStart: return "ComponentStart";
    case EventKind::ComponentEnd: return "ComponentEnd";
    case EventKind::TokenMove: return "TokenMove";
    case EventKind::MessageTransfer: return "MessageTransfer";
    case EventKind::ChoiceTaken: return "ChoiceTaken";
    case EventKind::SyncComplete: return "SyncComplete";
  }
  return "?";
}

std::optional<EventKind> event_kind_from_string(std::string_view s) {
  if (s == "ComponentStart") return EventKind::ComponentStart;
  if (s == "ComponentEnd") return EventKind::ComponentEnd;
  if (s == "TokenMove") return EventKind::TokenMove;
  if (s == "MessageTransfer") return EventKind::MessageTransfer;
  if (s == "ChoiceTaken") return EventKind::ChoiceTaken;
  if (s == "SyncComplete") return EventKind::SyncComplete;
  return std::nullopt;
}

std::string to_string(EngineError::Code c) {
  switch (c) {
    case EngineError::Code::GuardNoMatch: return "GuardNoMatch";
    case EngineError::Code::StepLimitExceeded: return "StepLimitExceeded";
    case EngineError::Code::MissingInput: return "MissingInput";
    case EngineError::Code::KindNotAllowed: return "KindNotAllowed";
    case EngineError::Code::UnknownPort: return "UnknownPort";
    case EngineError::Code::InvalidInput: return "InvalidInput";
  }
  return "?";
}

Engine::Engine(const SystemModel& model, const BehaviorRegistry& registry,
               SimConfig config, InitialInputs inputs)
    : model_(model), registry_(registry), config_(std::move(config)) {
  for (const auto& [id, spec] : model_.components) {
    auto it = config_.mapping.assignment.find(id);
    if (it == config_.mapping.assignment.end())
      throw EngineError(EngineError::Code::KindNotAllowed, id,
                        "mapping assigns no kind to component '" + id + "'");
    if (!spec.allowed_kinds.count(it->second))
      throw EngineError(EngineError::Code::KindNotAllowed, id,
                        "component '" + id + "' does not allow kind '" +
                            to_string(it->second) + "'");
    comps_[id];  // default state
  }
  if (config_.step_limit < 1)
    throw EngineError(EngineError::Code::InvalidInput, "step_limit",
                      "step_limit must be at least 1");

  for (auto& [key, msg] : inputs) {
    const auto& [comp, port] = key;
    auto ci = model_.components.find(comp);
    if (ci == model_.components.end())
      throw EngineError(EngineError::Code::InvalidInput, comp,
                        "initial input names unknown component '" + comp + "'");
    const PortSpec* p = ci->second.find_port(port, Direction::Input);
    if (!p)
      throw EngineError(EngineError::Code::InvalidInput, comp + "." + port,
                        "initial input names no input port '" + port + "'");
    if (msg.tag != p->tag)
      throw EngineError(EngineError::Code::InvalidInput, comp + "." + port,
                        "initial input tag '" + msg.tag.name +
                            "' does not match port tag '" + p->tag.name + "'");
    comps_[comp].inbox[port] = PendingMessage{std::move(msg), 0, ""};
  }

  comps_[model_.spg.initial].tokens.push_back(0);
}

micros_t Engine::ready_time(const std::string& id, const ComponentState& cs) const {
  micros_t ready = cs.last_end;
  ready = std::max(ready, cs.tokens.front());
  const Behavior& b = registry_.resolve(model_.components.at(id).behavior);
  for (const auto& port : b.needs_for(cs.state)) {
    auto mi = cs.inbox.find(port);
    if (mi != cs.inbox.end()) ready = std::max(ready, mi->second.arrival);
  }
  return ready;
}

std::optional<std::pair<micros_t, std::string>> Engine::next_firing() const {
  std::optional<std::pair<micros_t, std::string>> best;
  for (const auto& [id, cs] : comps_) {
    if (cs.tokens.empty()) continue;
    const Behavior* b = registry_.find(model_.components.at(id).behavior);
    if (!b) continue;
    bool all_present = true;
    for (const auto& port : b->needs_for(cs.state))
      if (!cs.inbox.count(port)) {
        all_present = false;
        break;
      }
    if (!all_present) continue;
    std::pair<micros_t, std::string> cand{ready_time(id, cs), id};
    if (!best || cand < *best) best = cand;
  }
  return best;
}

bool Engine::quiescent() const { return !next_firing().has_value(); }

void Engine::deliver(const std::string& sender, const std::string& from_port,
                     const std::string& to_comp, const std::string& to_port,
                     const DataTag& tag, const Bytes& payload, micros_t time) {
  Event ev{time, EventKind::MessageTransfer, sender, tree::Value::object()};
  ev.detail.push("tag", tree::Value::str(tag.name));
  ev.detail.push("from", endpoint_value(sender, from_port));
  ev.detail.push("to", endpoint_value(to_comp, to_port));
  ev.detail.push("bytes", tree::Value::integer(static_cast<std::int64_t>(payload.size())));

  auto& inbox = comps_[to_comp].inbox;
  auto existing = inbox.find(to_port);
  PendingMessage incoming{Message{tag, payload, sender, from_port}, time, sender};
  if (existing != inbox.end()) {
    // Fan-in conflict: latest by (arrival, sender) wins; note the loser.
    const auto& old = existing->second;
    if (std::pair(time, sender) >= std::pair(old.arrival, old.sender)) {
      ev.detail.push("overwrites",
                     tree::Value::str(old.sender.empty() ? "input" : old.sender));
      existing->second = std::move(incoming);
    } else {
      ev.detail.push("superseded_by",
                     tree::Value::str(old.sender.empty() ? "input" : old.sender));
    }
  } else {
    inbox.emplace(to_port, std::move(incoming));
  }
  events_.push_back(std::move(ev));
}

void Engine::route_tokens(const std::string& id,
                          const std::map<std::string, Bytes>& outputs,
                          micros_t time) {
  for (const auto& c : model_.spg.connectors) {
    if (std::find(c.sources.begin(), c.sources.end(), id) == c.sources.end())
      continue;
    switch (c.kind) {
      case ConnectorKind::Sequence:
      case ConnectorKind::Parallel:
        for (const auto& t : c.targets) {
          Event ev{time, EventKind::TokenMove, c.id, tree::Value::object()};
          ev.detail.push("from", tree::Value::str(id));
          ev.detail.push("to", tree::Value::str(t));
          events_.push_back(std::move(ev));
          auto& tokens = comps_[t].tokens;
          tokens.insert(std::upper_bound(tokens.begin(), tokens.end(), time), time);
        }
        break;
      case ConnectorKind::ExclusiveChoice: {
        std::string label;
        if (c.guard_port) {
          auto oi = outputs.find(c.guard_port->second);
          if (oi != outputs.end()) label = to_string(oi->second);
        }
        const std::string* target = nullptr;
        for (const auto& t : c.targets) {
          auto li = c.branch_labels.find(t);
          if (li != c.branch_labels.end() && li->second == label) {
            target = &t;
            break;
          }
        }
        if (!target && c.default_target) target = &*c.default_target;
        if (!target)
          throw EngineError(EngineError::Code::GuardNoMatch, c.id,
                            "connector '" + c.id + "': no branch labeled '" +
                                label + "' and no default");
        Event ev{time, EventKind::ChoiceTaken, c.id, tree::Value::object()};
        ev.detail.push("label", tree::Value::str(label));
        ev.detail.push("to", tree::Value::str(*target));
        events_.push_back(std::move(ev));
        auto& tokens = comps_[*target].tokens;
        tokens.insert(std::upper_bound(tokens.begin(), tokens.end(), time), time);
        break;
      }
      case ConnectorKind::Synchronization: {
        Event ev{time, EventKind::TokenMove, c.id, tree::Value::object()};
        ev.detail.push("from", tree::Value::str(id));
        events_.push_back(std::move(ev));
        auto& arms = sync_arms_[c.id];
        auto& queue = arms[id];
        queue.insert(std::upper_bound(queue.begin(), queue.end(), time), time);
        bool complete = std::all_of(
            c.sources.begin(), c.sources.end(),
            [&](const std::string& s) { return !arms[s].empty(); });
        if (complete) {
          // Release when the last of the consumed arrivals is in; sources may
          // be processed out of end-time order, so this is not `time`.
          micros_t release = 0;
          for (const auto& s : c.sources) {
            auto& q = arms[s];
            release = std::max(release, q.front());
            q.erase(q.begin());
          }
          const std::string& t = c.targets.front();
          Event done{release, EventKind::SyncComplete, c.id, tree::Value::object()};
          done.detail.push("to", tree::Value::str(t));
          events_.push_back(std::move(done));
          auto& tokens = comps_[t].tokens;
          tokens.insert(std::upper_bound(tokens.begin(), tokens.end(), release), release);
        }
        break;
      }
    }
  }
}

bool Engine::step() {
  auto pick = next_firing();
  if (!pick) return false;
  const auto& [t_start, id] = *pick;
  const ComponentSpec& spec = model_.components.at(id);
  const Behavior& behavior = registry_.resolve(spec.behavior);
  ComponentState& cs = comps_.at(id);

  events_.push_back({t_start, EventKind::ComponentStart, id, tree::Value::object()});

  FiringContext ctx;
  ctx.component = &spec;
  ctx.state = cs.state;
  ctx.firing_index = cs.firings;
  ctx.rng = SplitMix64{mix64(config_.seed ^ fnv1a64(id) ^ mix64(cs.firings))};

  cs.tokens.erase(cs.tokens.begin());
  for (const auto& port : behavior.needs_for(cs.state)) {
    auto mi = cs.inbox.find(port);
    if (mi == cs.inbox.end())
      throw EngineError(EngineError::Code::MissingInput, id + "." + port,
                        "component '" + id + "' fired without message on '" + port + "'");
    ctx.inputs.emplace(port, std::move(mi->second.message));
    cs.inbox.erase(mi);
  }
  for (const auto& port : behavior.optional_inputs) {
    auto mi = cs.inbox.find(port);
    if (mi != cs.inbox.end() && mi->second.arrival <= t_start) {
      ctx.inputs.emplace(port, std::move(mi->second.message));
      cs.inbox.erase(mi);
    }
  }

  FiringResult result;
  try {
    result = behavior.fire(ctx);
  } catch (const std::out_of_range& e) {
    throw EngineError(EngineError::Code::MissingInput, id,
                      "behavior '" + behavior.name + "' on '" + id + "': " + e.what());
  }
  cs.state = std::move(result.state);
  cs.firings += 1;

  const Kind kind = config_.mapping.assignment.at(id);
  const micros_t t_end = t_start + spec.costs.time(kind);
  cs.last_end = t_end;
  events_.push_back({t_end, EventKind::ComponentEnd, id, tree::Value::object()});

  // Emissions in output-port declaration order; edges in declaration order.
  for (const auto& [port, payload] : result.outputs) {
    (void)payload;
    if (spec.find_port(port, Direction::Output) == nullptr)
      throw EngineError(EngineError::Code::UnknownPort, id + "." + port,
                        "behavior '" + behavior.name + "' emitted on undeclared port '" +
                            port + "'");
  }
  for (const PortSpec* p : spec.ports_of(Direction::Output)) {
    auto oi = result.outputs.find(p->name);
    if (oi == result.outputs.end()) continue;
    bool drained = false;
    for (const auto& e : model_.ig.edges) {
      if (e.from_component != id || e.from_port != p->name) continue;
      drained = true;
      deliver(id, p->name, e.to_component, e.to_port, p->tag, oi->second, t_end);
    }
    if (!drained)
      terminals_[{id, p->name}] = TerminalOutput{id, p->name, p->tag, oi->second, t_end};
  }

  route_tokens(id, result.outputs, t_end);
  steps_ += 1;
  return true;
}

Trace Engine::finish() {
  finished_ = true;
  Trace trace;
  trace.events = std::move(events_);
  std::stable_sort(trace.events.begin(), trace.events.end(),
                   [](const Event& a, const Event& b) { return a.time < b.time; });
  for (const auto& [id, cs] : comps_)
    if (!cs.tokens.empty()) trace.final_state[id] = static_cast<int>(cs.tokens.size());
  for (const auto& [key, out] : terminals_)
    if (model_.spg.finals.count(key.first)) trace.outputs.push_back(out);
  for (const auto& ev : trace.events) trace.sim_time = std::max(trace.sim_time, ev.time);
  return trace;
}

Trace run(const SystemModel& model, const BehaviorRegistry& registry,
          const SimConfig& config, const InitialInputs& inputs) {
  Engine engine(model, registry, config, inputs);
  while (engine.step()) {
    if (engine.steps_taken() >= config.step_limit && !engine.quiescent())
      throw EngineError(EngineError::Code::StepLimitExceeded, model.name,
                        "no quiescence after " + std::to_string(config.step_limit) +
                            " firings");
  }
  return engine.finish();
}

std::string trace_export(const Trace& trace, TraceFormat format) {
  if (format == TraceFormat::Lines) {
    std::string out;
    for (const auto& ev : trace.events) {
      out += format_micros_fixed6(ev.time);
      out += '\t';
      out += to_string(ev.kind);
      out += '\t';
      out += ev.subject;
      out += '\t';
      out += tree::write_inline(ev.detail);
      out += '\n';
    }
    return out;
  }

  tree::Value root = tree::Value::object();
  root.push("sim_time", tree::Value::num(trace.sim_time));
  tree::Value events = tree::Value::list();
  for (const auto& ev : trace.events) {
    tree::Value e = tree::Value::object();
    e.push("time", tree::Value::num(ev.time));
    e.push("kind", tree::Value::str(to_string(ev.kind)));
    e.push("subject", tree::Value::str(ev.subject));
    e.push("detail", ev.detail);
    events.append(std::move(e));
  }
  root.push("events", std::move(events));
  tree::Value final_state = tree::Value::object();
  for (const auto& [id, n] : trace.final_state)
    final_state.push(id, tree::Value::integer(n));
  root.push("final_state", std::move(final_state));
  tree::Value outputs = tree::Value::list();
  for (const auto& o : trace.outputs) {
    tree::Value e = tree::Value::object();
    e.push("component", tree::Value::str(o.component));
    e.push("port", tree::Value::str(o.port));
    e.push("tag", tree::Value::str(o.tag.name));
    e.push("time", tree::Value::num(o.time));
    e.push("data", tree::Value::str(to_hex(o.payload)));
    outputs.append(std::move(e));
  }
  root.push("outputs", std::move(outputs));
  return tree::write_tree(root);
}

namespace {

void import_error(std::vector<tree::Diagnostic>& diags, std::string_view file,
                  const tree::Value& v, const std::string& path, std::string msg) {
  tree::SourceLocation loc = v.loc;
  loc.file = std::string(file);
  loc.path = path;
  diags.push_back({tree::DiagCategory::Schema, std::move(loc), std::move(msg)});
}

}  // namespace

TraceParseOutcome trace_import(std::string_view text, std::string_view file_name) {
  TraceParseOutcome outcome;
  tree::ParseResult parsed = tree::parse_tree(text, std::string(file_name));
  if (!parsed.root) {
    outcome.diagnostics = std::move(parsed.diagnostics);
    return outcome;
  }
  const tree::Value& root = *parsed.root;
  auto& diags = outcome.diagnostics;
  Trace trace;

  if (const tree::Value* t = root.find("sim_time"); t && t->is_number())
    trace.sim_time = t->as_micros();
  else
    import_error(diags, file_name, root, "sim_time", "missing or non-numeric 'sim_time'");

  const tree::Value* events = root.find("events");
  if (!events || !events->is_list()) {
    import_error(diags, file_name, root, "events", "missing 'events' list");
  } else {
    size_t i = 0;
    for (const auto& e : events->as_list()) {
      const std::string path = "events[" + std::to_string(i++) + "]";
      const tree::Value* time = e.is_object() ? e.find("time") : nullptr;
      const tree::Value* kind = e.is_object() ? e.find("kind") : nullptr;
      const tree::Value* subject = e.is_object() ? e.find("subject") : nullptr;
      const tree::Value* detail = e.is_object() ? e.find("detail") : nullptr;
      if (!time || !time->is_number() || !kind || !kind->is_string() ||
          !subject || !subject->is_string() || !detail || !detail->is_object()) {
        import_error(diags, file_name, e, path, "malformed event entry");
        continue;
      }
      auto k = event_kind_from_string(kind->as_string());
      if (!k) {
        import_error(diags, file_name, *kind, path + ".kind",
                     "unknown event kind '" + kind->as_string() + "'");
        continue;
      }
      trace.events.push_back({time->as_micros(), *k, subject->as_string(), *detail});
    }
  }

  if (const tree::Value* fs = root.find("final_state"); fs && fs->is_object()) {
    for (const auto& [id, v] : fs->as_object()) {
      if (v.is_number() && v.as_micros() % kMicrosPerUnit == 0)
        trace.final_state[id] = static_cast<int>(v.as_micros() / kMicrosPerUnit);
      else
        import_error(diags, file_name, v, "final_state." + id, "expected an integer");
    }
  }

  if (const tree::Value* outs = root.find("outputs"); outs && outs->is_list()) {
    size_t i = 0;
    for (const auto& o : outs->as_list()) {
      const std::string path = "outputs[" + std::to_string(i++) + "]";
      if (!o.is_object()) {
        import_error(diags, file_name, o, path, "malformed output entry");
        continue;
      }
      const tree::Value* comp = o.find("component");
      const tree::Value* port = o.find("port");
      const tree::Value* tag = o.find("tag");
      const tree::Value* time = o.find("time");
      const tree::Value* data = o.find("data");
      if (!comp || !comp->is_string() || !port || !port->is_string() || !tag ||
          !tag->is_string() || !time || !time->is_number() || !data ||
          !data->is_string()) {
        import_error(diags, file_name, o, path, "malformed output entry");
        continue;
      }
      auto payload = from_hex(data->as_string());
      if (!payload) {
        import_error(diags, file_name, *data, path + ".data", "invalid hex payload");
        continue;
      }
      trace.outputs.push_back({comp->as_string(), port->as_string(),
                               DataTag{tag->as_string()}, std::move(*payload),
                               time->as_micros()});
    }
  }

  if (diags.empty()) outcome.trace = std::move(trace);
  return outcome;
}

}  // namespace f4ms
