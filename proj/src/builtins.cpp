#include "f4ms/builtins.hpp"

#include "f4ms/crypto.hpp"
#include "f4ms/sysdesc.hpp"

namespace f4ms {

namespace {

Bytes cat(std::initializer_list<Bytes> parts) {
  Bytes out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

// Phase counter stored in the component state byte; drives needs().
int phase_of(const Bytes& state) { return state.empty() ? 0 : state[0]; }
Bytes next_phase(const Bytes& state) {
  return Bytes{static_cast<std::uint8_t>(phase_of(state) + 1)};
}

Behavior make_noop() {
  Behavior b;
  b.name = "noop";
  b.fire = [](FiringContext& ctx) { return FiringResult{{}, ctx.state}; };
  return b;
}

// Copies each consumed input payload to the first output port carrying the
// same tag. With no inputs it is an inert single firing.
Behavior make_echo() {
  Behavior b;
  b.name = "echo";
  b.fire = [](FiringContext& ctx) {
    FiringResult r{{}, ctx.state};
    for (const auto& [port, msg] : ctx.inputs) {
      (void)port;
      for (const PortSpec* out : ctx.component->ports_of(Direction::Output)) {
        if (out->tag == msg.tag && !r.outputs.count(out->name)) {
          r.outputs[out->name] = msg.payload;
          break;
        }
      }
    }
    return r;
  };
  return b;
}

Behavior make_keygen() {
  Behavior b;
  b.name = "keygen_v1";
  b.fire = [](FiringContext& ctx) {
    FiringResult r{{}, ctx.state};
    r.outputs["key"] = test_suite().gen_content_key(ctx.rng);
    return r;
  };
  return b;
}

Behavior make_content_enc() {
  Behavior b;
  b.name = "content_enc_v1";
  b.required_inputs = {"key"};
  b.optional_inputs = {"plaintext"};
  b.fire = [](FiringContext& ctx) {
    const Bytes* plain = ctx.maybe("plaintext");
    Bytes body = plain ? *plain : to_bytes("demo content payload");
    FiringResult r{{}, ctx.state};
    r.outputs["ciphertext"] = test_suite().sym_encrypt(body, ctx.require("key"), ctx.rng);
    return r;
  };
  return b;
}

Behavior make_database() {
  Behavior b;
  b.name = "database_v1";
  b.required_inputs = {"content_in"};
  b.fire = [](FiringContext& ctx) {
    FiringResult r{{}, ctx.state};
    r.outputs["stored"] = ctx.require("content_in");
    return r;
  };
  return b;
}

// Three rounds: request content, send user info, forward the authorized item.
Behavior make_browser() {
  Behavior b;
  b.name = "browser_v1";
  b.required_inputs = {"info_demand_in", "auth_in"};
  b.needs = [](const Bytes& state) -> std::vector<std::string> {
    switch (phase_of(state)) {
      case 0: return {};
      case 1: return {"info_demand_in"};
      default: return {"auth_in"};
    }
  };
  b.fire = [](FiringContext& ctx) {
    FiringResult r{{}, next_phase(ctx.state)};
    switch (phase_of(ctx.state)) {
      case 0:
        r.outputs["request"] = to_bytes(std::string("GET ") + kDemoContentId);
        r.outputs["route"] = to_bytes("to_webapp");
        break;
      case 1:
        r.outputs["info"] = to_bytes(std::string("user=") + kDemoUserId +
                                     ";device=" + kDemoDevice);
        r.outputs["route"] = to_bytes("to_webapp");
        break;
      default:
        r.outputs["item"] = ctx.require("auth_in");
        r.outputs["route"] = to_bytes("to_reader");
        break;
    }
    return r;
  };
  return b;
}

// Counterpart rounds: demand info, order a license, grant authorization.
Behavior make_webapp() {
  Behavior b;
  b.name = "webapp_v1";
  b.required_inputs = {"request", "user_info", "license_in", "rendition_in"};
  b.needs = [](const Bytes& state) -> std::vector<std::string> {
    switch (phase_of(state)) {
      case 0: return {"request"};
      case 1: return {"user_info"};
      default: return {"license_in", "rendition_in"};
    }
  };
  b.fire = [](FiringContext& ctx) {
    FiringResult r{{}, next_phase(ctx.state)};
    switch (phase_of(ctx.state)) {
      case 0:
        r.outputs["info_demand"] = to_bytes("need:user,device");
        r.outputs["route"] = to_bytes("to_browser");
        break;
      case 1:
        r.outputs["license_request"] =
            cat({to_bytes("issue:"), ctx.require("user_info")});
        r.outputs["device_info"] = to_bytes(kDemoDevice);
        r.outputs["route"] = to_bytes("to_license");
        break;
      default:
        r.outputs["auth"] = cat({to_bytes("auth:"), ctx.require("license_in"),
                                 ctx.require("rendition_in")});
        r.outputs["route"] = to_bytes("to_browser");
        break;
    }
    return r;
  };
  return b;
}

Behavior make_adapter() {
  Behavior b;
  b.name = "adapter_v1";
  b.required_inputs = {"content", "device"};
  b.fire = [](FiringContext& ctx) {
    FiringResult r{{}, ctx.state};
    r.outputs["rendition"] =
        cat({to_bytes("rendition:"), ctx.require("device"), to_bytes(":"),
             ctx.require("content")});
    return r;
  };
  return b;
}

Behavior make_license_srv() {
  Behavior b;
  b.name = "license_srv_v1";
  b.required_inputs = {"request", "content_key"};
  b.fire = [](FiringContext& ctx) {
    FiringResult r{{}, ctx.state};
    r.outputs["order"] = cat({to_bytes("order:"), ctx.require("request")});
    r.outputs["key_out"] = ctx.require("content_key");
    return r;
  };
  return b;
}

Behavior make_license_gen() {
  Behavior b;
  b.name = "license_gen_v1";
  b.required_inputs = {"order"};
  b.fire = [](FiringContext& ctx) {
    FiringResult r{{}, ctx.state};
    r.outputs["body"] = cat({to_bytes("license-body:"), ctx.require("order")});
    return r;
  };
  return b;
}

Behavior make_license_enc() {
  Behavior b;
  b.name = "license_enc_v1";
  b.required_inputs = {"body", "key"};
  b.fire = [](FiringContext& ctx) {
    const Bytes& body = ctx.require("body");
    FiringResult r{{}, ctx.state};
    r.outputs["license"] = cat({body, test_suite().sign(body, ctx.require("key"))});
    return r;
  };
  return b;
}

Behavior make_drm_reader() {
  Behavior b;
  b.name = "drm_reader_v1";
  b.required_inputs = {"item"};
  b.fire = [](FiringContext& ctx) {
    FiringResult r{{}, ctx.state};
    r.outputs["rendered"] = cat({to_bytes("rendered:"), ctx.require("item")});
    return r;
  };
  return b;
}

ComponentSpec comp(std::string id, std::set<Kind> kinds,
                   std::vector<PortSpec> ports, CostAnnotation costs,
                   std::string behavior) {
  return ComponentSpec{std::move(id), std::move(kinds), std::move(ports), costs,
                       std::move(behavior)};
}

PortSpec in(std::string name, std::string tag) {
  return {std::move(name), Direction::Input, DataTag{std::move(tag)}};
}
PortSpec out(std::string name, std::string tag) {
  return {std::move(name), Direction::Output, DataTag{std::move(tag)}};
}

// Software-only cost row; hardware columns mirror software with zero area.
CostAnnotation sw_costs(int time, int energy, int security) {
  CostAnnotation c;
  c.sw_time = c.hw_time = time * kMicrosPerUnit;
  c.sw_energy = c.hw_energy = energy * kMicrosPerUnit;
  c.hw_area = 0;
  c.sw_security = c.hw_security = security;
  return c;
}

CostAnnotation dual_costs(int sw_time, int hw_time, int hw_area, int sw_energy,
                          int hw_energy, int sw_security, int hw_security) {
  CostAnnotation c;
  c.sw_time = sw_time * kMicrosPerUnit;
  c.hw_time = hw_time * kMicrosPerUnit;
  c.hw_area = hw_area * kMicrosPerUnit;
  c.sw_energy = sw_energy * kMicrosPerUnit;
  c.hw_energy = hw_energy * kMicrosPerUnit;
  c.sw_security = sw_security;
  c.hw_security = hw_security;
  return c;
}

SchedulingConnector seq(std::string id, std::string from, std::string to) {
  SchedulingConnector c;
  c.id = std::move(id);
  c.kind = ConnectorKind::Sequence;
  c.sources = {std::move(from)};
  c.targets = {std::move(to)};
  return c;
}

SystemModel build_drms_model() {
  SystemModel m;
  m.name = "drms_business_model";
  const std::set<Kind> sw{Kind::Software};
  const std::set<Kind> dual{Kind::Software, Kind::Hardware};

  std::vector<ComponentSpec> comps;
  comps.push_back(comp("browser", sw,
                       {in("info_demand_in", "info_demand"),
                        in("auth_in", "authorization"),
                        out("request", "content_request"),
                        out("info", "user_info"),
                        out("item", "licensed_item"),
                        out("route", "route_label")},
                       sw_costs(1, 1, 3), "browser_v1"));
  comps.push_back(comp("drm_reader", sw,
                       {in("item", "licensed_item"),
                        out("rendered", "rendered_content")},
                       sw_costs(2, 1, 3), "drm_reader_v1"));
  comps.push_back(comp("webapp", sw,
                       {in("request", "content_request"),
                        in("user_info", "user_info"),
                        in("license_in", "license"),
                        in("rendition_in", "rendition"),
                        out("info_demand", "info_demand"),
                        out("license_request", "license_request"),
                        out("device_info", "device_info"),
                        out("auth", "authorization"),
                        out("route", "route_label")},
                       sw_costs(2, 1, 3), "webapp_v1"));
  comps.push_back(comp("database", sw,
                       {in("content_in", "ciphertext"),
                        out("stored", "stored_content")},
                       sw_costs(3, 2, 3), "database_v1"));
  comps.push_back(comp("adapter", sw,
                       {in("content", "stored_content"),
                        in("device", "device_info"),
                        out("rendition", "rendition")},
                       sw_costs(2, 1, 3), "adapter_v1"));
  comps.push_back(comp("keygen", dual, {out("key", "key")},
                       dual_costs(2, 1, 3, 2, 1, 3, 5), "keygen_v1"));
  comps.push_back(comp("content_enc", dual,
                       {in("key", "key"), in("plaintext", "plaintext"),
                        out("ciphertext", "ciphertext")},
                       dual_costs(6, 2, 4, 5, 2, 1, 4), "content_enc_v1"));
  comps.push_back(comp("license_srv", sw,
                       {in("request", "license_request"),
                        in("content_key", "key"),
                        out("order", "license_order"),
                        out("key_out", "key")},
                       sw_costs(2, 1, 3), "license_srv_v1"));
  comps.push_back(comp("license_gen", sw,
                       {in("order", "license_order"),
                        out("body", "license_body")},
                       sw_costs(2, 1, 3), "license_gen_v1"));
  comps.push_back(comp("license_enc", dual,
                       {in("body", "license_body"), in("key", "key"),
                        out("license", "license")},
                       dual_costs(4, 1, 3, 3, 1, 1, 4), "license_enc_v1"));

  for (auto& c : comps) {
    m.spg.fsc.insert(c.id);
    m.components.emplace(c.id, std::move(c));
  }
  m.spg.initial = "keygen";
  m.spg.finals = {"drm_reader"};

  m.spg.connectors.push_back(seq("k1", "keygen", "content_enc"));
  m.spg.connectors.push_back(seq("k2", "content_enc", "database"));
  m.spg.connectors.push_back(seq("k3", "database", "browser"));
  SchedulingConnector b_route;
  b_route.id = "b_route";
  b_route.kind = ConnectorKind::ExclusiveChoice;
  b_route.sources = {"browser"};
  b_route.targets = {"webapp", "drm_reader"};
  b_route.guard_port = {{"browser", "route"}};
  b_route.branch_labels = {{"webapp", "to_webapp"}, {"drm_reader", "to_reader"}};
  m.spg.connectors.push_back(std::move(b_route));
  SchedulingConnector w_route;
  w_route.id = "w_route";
  w_route.kind = ConnectorKind::ExclusiveChoice;
  w_route.sources = {"webapp"};
  w_route.targets = {"browser", "license_srv"};
  w_route.guard_port = {{"webapp", "route"}};
  w_route.branch_labels = {{"browser", "to_browser"}, {"license_srv", "to_license"}};
  m.spg.connectors.push_back(std::move(w_route));
  m.spg.connectors.push_back(seq("l1", "license_srv", "license_gen"));
  m.spg.connectors.push_back(seq("l2", "license_gen", "license_enc"));
  m.spg.connectors.push_back(seq("l3", "license_enc", "adapter"));
  m.spg.connectors.push_back(seq("a1", "adapter", "webapp"));

  auto edge = [&](std::string fc, std::string fp, std::string tc, std::string tp) {
    m.ig.edges.push_back({std::move(fc), std::move(fp), std::move(tc), std::move(tp)});
  };
  edge("keygen", "key", "content_enc", "key");
  edge("keygen", "key", "license_srv", "content_key");
  edge("content_enc", "ciphertext", "database", "content_in");
  edge("database", "stored", "adapter", "content");
  edge("browser", "request", "webapp", "request");
  edge("webapp", "info_demand", "browser", "info_demand_in");
  edge("browser", "info", "webapp", "user_info");
  edge("webapp", "license_request", "license_srv", "request");
  edge("webapp", "device_info", "adapter", "device");
  edge("license_srv", "order", "license_gen", "order");
  edge("license_srv", "key_out", "license_enc", "key");
  edge("license_gen", "body", "license_enc", "body");
  edge("license_enc", "license", "webapp", "license_in");
  edge("adapter", "rendition", "webapp", "rendition_in");
  edge("webapp", "auth", "browser", "auth_in");
  edge("browser", "item", "drm_reader", "item");
  return m;
}

}  // namespace

const BehaviorRegistry& default_registry() {
  static const BehaviorRegistry registry = [] {
    BehaviorRegistry r;
    r.add(make_noop());
    r.add(make_echo());
    r.add(make_keygen());
    r.add(make_content_enc());
    r.add(make_database());
    r.add(make_browser());
    r.add(make_webapp());
    r.add(make_adapter());
    r.add(make_license_srv());
    r.add(make_license_gen());
    r.add(make_license_enc());
    r.add(make_drm_reader());
    return r;
  }();
  return registry;
}

const SystemModel& drms_model() {
  static const SystemModel model = build_drms_model();
  return model;
}

const std::string& drms_model_text() {
  static const std::string text = sysdesc::serialize_system(drms_model());
  return text;
}

}  // namespace f4ms
