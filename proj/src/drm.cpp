#include "f4ms/drm.hpp"

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "f4ms/builtins.hpp"
#include "f4ms/sysdesc.hpp"

namespace f4ms::drm {

namespace {

Bytes cat(std::initializer_list<Bytes> parts) {
  Bytes out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

tree::Value hex_value(const Bytes& b) { return tree::Value::str(to_hex(b)); }

std::optional<Bytes> hex_field(const tree::Value& obj, const std::string& key) {
  const tree::Value* v = obj.find(key);
  if (!v || !v->is_string()) return std::nullopt;
  return from_hex(v->as_string());
}

tree::Value rules_to_tree(const UsageRules& rules) {
  tree::Value v = tree::Value::object();
  if (rules.expires_at) v.push("expires_at", tree::Value::num(*rules.expires_at));
  if (rules.max_plays) v.push("max_plays", tree::Value::integer(*rules.max_plays));
  if (rules.device_class)
    v.push("device_class", tree::Value::str(to_string(*rules.device_class)));
  return v;
}

std::optional<UsageRules> rules_from_tree(const tree::Value& v) {
  if (!v.is_object()) return std::nullopt;
  UsageRules rules;
  for (const auto& [key, field] : v.as_object()) {
    if (key == "expires_at" && field.is_number()) {
      rules.expires_at = field.as_micros();
    } else if (key == "max_plays" && field.is_number() &&
               field.as_micros() % kMicrosPerUnit == 0) {
      rules.max_plays = static_cast<int>(field.as_micros() / kMicrosPerUnit);
    } else if (key == "device_class" && field.is_string()) {
      auto d = device_class_from_string(field.as_string());
      if (!d) return std::nullopt;
      rules.device_class = d;
    } else {
      return std::nullopt;
    }
  }
  if (!rules.valid()) return std::nullopt;
  return rules;
}

tree::Value license_body_tree(const License& license) {
  tree::Value root = tree::Value::object();
  root.push("license_id", tree::Value::str(license.license_id));
  root.push("content_id", tree::Value::str(license.content_id));
  root.push("user_id", tree::Value::str(license.user_id));
  root.push("rules", rules_to_tree(license.rules));
  root.push("wrapped_key", hex_value(license.wrapped_key));
  return root;
}

}  // namespace

std::string to_string(DeviceClass d) {
  switch (d) {
    case DeviceClass::Desktop: return "desktop";
    case DeviceClass::Mobile: return "mobile";
    case DeviceClass::ReaderDevice: return "reader_device";
  }
  return "?";
}

std::optional<DeviceClass> device_class_from_string(std::string_view s) {
  if (s == "desktop") return DeviceClass::Desktop;
  if (s == "mobile") return DeviceClass::Mobile;
  if (s == "reader_device") return DeviceClass::ReaderDevice;
  return std::nullopt;
}

std::string to_string(DenialReason r) {
  switch (r) {
    case DenialReason::BadSignature: return "BadSignature";
    case DenialReason::Revoked: return "Revoked";
    case DenialReason::Expired: return "Expired";
    case DenialReason::PlaysExhausted: return "PlaysExhausted";
    case DenialReason::WrongDevice: return "WrongDevice";
    case DenialReason::WrongUser: return "WrongUser";
    case DenialReason::DecryptFailure: return "DecryptFailure";
  }
  return "?";
}

std::optional<DenialReason> denial_reason_from_string(std::string_view s) {
  if (s == "BadSignature") return DenialReason::BadSignature;
  if (s == "Revoked") return DenialReason::Revoked;
  if (s == "Expired") return DenialReason::Expired;
  if (s == "PlaysExhausted") return DenialReason::PlaysExhausted;
  if (s == "WrongDevice") return DenialReason::WrongDevice;
  if (s == "WrongUser") return DenialReason::WrongUser;
  if (s == "DecryptFailure") return DenialReason::DecryptFailure;
  return std::nullopt;
}

std::string to_string(DrmError::Code c) {
  switch (c) {
    case DrmError::Code::DuplicateContent: return "DuplicateContent";
    case DrmError::Code::DuplicateUser: return "DuplicateUser";
    case DrmError::Code::UnknownContent: return "UnknownContent";
    case DrmError::Code::UnknownUser: return "UnknownUser";
    case DrmError::Code::UnknownLicense: return "UnknownLicense";
    case DrmError::Code::BadSignature: return "BadSignature";
    case DrmError::Code::InvalidRules: return "InvalidRules";
    case DrmError::Code::StoreError: return "StoreError";
  }
  return "?";
}

std::string serialize_license(const License& license) {
  tree::Value root = license_body_tree(license);
  root.push("signature", hex_value(license.signature));
  return tree::write_tree(root);
}

Bytes license_signing_bytes(const License& license) {
  return to_bytes(tree::write_tree(license_body_tree(license)));
}

LicenseParseOutcome parse_license(std::string_view text, std::string_view file_name) {
  LicenseParseOutcome outcome;
  tree::ParseResult parsed = tree::parse_tree(text, std::string(file_name));
  if (!parsed.root) {
    outcome.diagnostics = std::move(parsed.diagnostics);
    return outcome;
  }
  const tree::Value& root = *parsed.root;
  auto fail = [&](const std::string& path, const std::string& msg) {
    tree::SourceLocation loc = root.loc;
    loc.file = std::string(file_name);
    loc.path = path;
    outcome.diagnostics.push_back({tree::DiagCategory::Schema, loc, msg});
  };

  License lic;
  auto str_field = [&](const char* key, std::string& slot) {
    const tree::Value* v = root.find(key);
    if (!v || !v->is_string()) {
      fail(key, std::string("missing or non-string '") + key + "'");
      return;
    }
    slot = v->as_string();
  };
  str_field("license_id", lic.license_id);
  str_field("content_id", lic.content_id);
  str_field("user_id", lic.user_id);

  if (const tree::Value* rules = root.find("rules")) {
    auto parsed_rules = rules_from_tree(*rules);
    if (!parsed_rules)
      fail("rules", "malformed usage rules");
    else
      lic.rules = *parsed_rules;
  } else {
    fail("rules", "missing 'rules'");
  }

  if (auto wrapped = hex_field(root, "wrapped_key"))
    lic.wrapped_key = std::move(*wrapped);
  else
    fail("wrapped_key", "missing or invalid hex 'wrapped_key'");
  if (auto sig = hex_field(root, "signature"))
    lic.signature = std::move(*sig);
  else
    fail("signature", "missing or invalid hex 'signature'");

  if (outcome.diagnostics.empty()) outcome.license = std::move(lic);
  return outcome;
}

// ---------------------------------------------------------------------------

DrmSystem::DrmSystem(const CryptoSuite& suite, std::uint64_t seed,
                     std::string persist_dir)
    : suite_(suite),
      rng_(mix64(seed ^ 0xd1597a7e5ull)),
      persist_dir_(std::move(persist_dir)) {
  sign_keys_ = suite_.gen_sign_keypair(rng_);
  if (!persist_dir_.empty()) load();
}

void DrmSystem::register_user(const UserProfile& profile) {
  if (users_.count(profile.user_id))
    throw DrmError(DrmError::Code::DuplicateUser,
                   "user '" + profile.user_id + "' already registered");
  StoredUser u;
  u.profile = profile;
  u.wrap_keys = suite_.gen_wrap_keypair(rng_);
  users_.emplace(profile.user_id, std::move(u));
  persist();
}

CatalogEntry DrmSystem::submit_content(const ContentItem& item,
                                       const UsageRules& rules_template) {
  if (contents_.count(item.content_id))
    throw DrmError(DrmError::Code::DuplicateContent,
                   "content '" + item.content_id + "' already submitted");
  if (!rules_template.valid())
    throw DrmError(DrmError::Code::InvalidRules,
                   "a usage-rules template needs at least one rule");

  Bytes key = suite_.gen_content_key(rng_);
  StoredContent c;
  c.content_id = item.content_id;
  c.rules_template = rules_template;
  c.encrypted_default = suite_.sym_encrypt(item.plaintext, key, rng_);
  for (const auto& [device, plaintext] : item.renditions)
    c.encrypted[device] = suite_.sym_encrypt(plaintext, key, rng_);

  contents_.emplace(item.content_id, std::move(c));
  content_keys_.emplace(item.content_id, std::move(key));
  stats_[item.content_id];
  persist();
  return CatalogEntry{item.content_id, rules_template};
}

std::vector<CatalogEntry> DrmSystem::catalog() const {
  std::vector<CatalogEntry> out;
  for (const auto& [id, c] : contents_) out.push_back({id, c.rules_template});
  return out;
}

const Bytes& DrmSystem::select_rendition(const StoredContent& c,
                                         DeviceClass device) const {
  auto it = c.encrypted.find(device);
  return it != c.encrypted.end() ? it->second : c.encrypted_default;
}

IssuanceOutcome DrmSystem::run_issuance_protocol(const std::string& user_id,
                                                 const std::string& content_id,
                                                 std::uint64_t run_seed) {
  auto ui = users_.find(user_id);
  if (ui == users_.end())
    throw DrmError(DrmError::Code::UnknownUser, "user '" + user_id + "' not registered");
  auto ci = contents_.find(content_id);
  if (ci == contents_.end())
    throw DrmError(DrmError::Code::UnknownContent,
                   "content '" + content_id + "' not in the catalog");

  struct RunCapture {
    std::string user_id, content_id, device;
    Bytes content_key;
    std::string content_record;  // encrypted renditions, canonical text
    UsageRules rules;
    std::string license_id;
    const DrmSystem* sys = nullptr;
    const StoredUser* user = nullptr;
    std::optional<License> license;
    Bytes delivered;
  };
  auto cap = std::make_shared<RunCapture>();
  cap->user_id = user_id;
  cap->content_id = content_id;
  cap->device = to_string(ui->second.profile.device);
  cap->content_key = content_keys_.at(content_id);
  cap->rules = ci->second.rules_template;
  cap->license_id = "lic-" + std::to_string(issued_ + 1);
  cap->sys = this;
  cap->user = &ui->second;
  {
    tree::Value record = tree::Value::object();
    record.push("default", hex_value(ci->second.encrypted_default));
    tree::Value renditions = tree::Value::list();
    for (const auto& [device, data] : ci->second.encrypted) {
      tree::Value e = tree::Value::object();
      e.push("device", tree::Value::str(to_string(device)));
      e.push("data", hex_value(data));
      renditions.append(std::move(e));
    }
    record.push("renditions", std::move(renditions));
    cap->content_record = tree::write_tree(record);
  }

  // Store-bound registry: same names and gates as the demo registry, bodies
  // operating on the captured stores.
  BehaviorRegistry registry;
  const BehaviorRegistry& base = default_registry();
  registry.add(base.resolve("noop"));
  registry.add(base.resolve("echo"));
  registry.add(base.resolve("database_v1"));
  registry.add(base.resolve("drm_reader_v1"));

  const auto phase_of = [](const Bytes& state) -> int {
    return state.empty() ? 0 : state[0];
  };
  const auto next_phase = [phase_of](const Bytes& state) {
    return Bytes{static_cast<std::uint8_t>(phase_of(state) + 1)};
  };

  Behavior browser = base.resolve("browser_v1");
  browser.fire = [cap, phase_of, next_phase](FiringContext& ctx) {
    FiringResult r{{}, next_phase(ctx.state)};
    switch (phase_of(ctx.state)) {
      case 0:
        r.outputs["request"] = to_bytes("GET " + cap->content_id);
        r.outputs["route"] = to_bytes("to_webapp");
        break;
      case 1:
        r.outputs["info"] =
            to_bytes("user=" + cap->user_id + ";device=" + cap->device);
        r.outputs["route"] = to_bytes("to_webapp");
        break;
      default:
        r.outputs["item"] = ctx.require("auth_in");
        r.outputs["route"] = to_bytes("to_reader");
        break;
    }
    return r;
  };
  registry.add(std::move(browser));

  Behavior webapp = base.resolve("webapp_v1");
  webapp.fire = [cap, phase_of, next_phase](FiringContext& ctx) {
    FiringResult r{{}, next_phase(ctx.state)};
    switch (phase_of(ctx.state)) {
      case 0:
        r.outputs["info_demand"] = to_bytes("need:user,device");
        r.outputs["route"] = to_bytes("to_browser");
        break;
      case 1:
        r.outputs["license_request"] =
            cat({to_bytes("issue:"), ctx.require("user_info")});
        r.outputs["device_info"] = to_bytes(cap->device);
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
  registry.add(std::move(webapp));

  Behavior keygen = base.resolve("keygen_v1");
  keygen.fire = [cap](FiringContext& ctx) {
    (void)ctx;
    FiringResult r{{}, ctx.state};
    r.outputs["key"] = cap->content_key;
    return r;
  };
  registry.add(std::move(keygen));

  Behavior content_enc = base.resolve("content_enc_v1");
  content_enc.fire = [cap](FiringContext& ctx) {
    FiringResult r{{}, ctx.state};
    (void)ctx.require("key");  // dataflow check; record is pre-encrypted
    r.outputs["ciphertext"] = to_bytes(cap->content_record);
    return r;
  };
  registry.add(std::move(content_enc));

  Behavior adapter = base.resolve("adapter_v1");
  adapter.fire = [cap](FiringContext& ctx) {
    const std::string device = f4ms::to_string(ctx.require("device"));
    tree::ParseResult record =
        tree::parse_tree(f4ms::to_string(ctx.require("content")));
    Bytes selected;
    if (record.root) {
      if (const tree::Value* rend = record.root->find("renditions"); rend && rend->is_list())
        for (const auto& e : rend->as_list()) {
          const tree::Value* d = e.find("device");
          if (d && d->is_string() && d->as_string() == device)
            if (auto data = hex_field(e, "data")) selected = std::move(*data);
        }
      if (selected.empty())
        if (auto data = hex_field(*record.root, "default")) selected = std::move(*data);
    }
    cap->delivered = selected;
    FiringResult r{{}, ctx.state};
    r.outputs["rendition"] = std::move(selected);
    return r;
  };
  registry.add(std::move(adapter));

  Behavior license_srv = base.resolve("license_srv_v1");
  license_srv.fire = [cap](FiringContext& ctx) {
    FiringResult r{{}, ctx.state};
    r.outputs["order"] = cat({to_bytes("order:"), ctx.require("request")});
    r.outputs["key_out"] = ctx.require("content_key");
    return r;
  };
  registry.add(std::move(license_srv));

  Behavior license_gen = base.resolve("license_gen_v1");
  license_gen.fire = [cap](FiringContext& ctx) {
    (void)ctx.require("order");
    tree::Value body = tree::Value::object();
    body.push("license_id", tree::Value::str(cap->license_id));
    body.push("content_id", tree::Value::str(cap->content_id));
    body.push("user_id", tree::Value::str(cap->user_id));
    body.push("rules", rules_to_tree(cap->rules));
    FiringResult r{{}, ctx.state};
    r.outputs["body"] = to_bytes(tree::write_tree(body));
    return r;
  };
  registry.add(std::move(license_gen));

  Behavior license_enc = base.resolve("license_enc_v1");
  const CryptoSuite* suite = &suite_;
  const Bytes sign_key = sign_keys_.private_key;
  license_enc.fire = [cap, suite, sign_key](FiringContext& ctx) {
    (void)ctx.require("body");
    License lic;
    lic.license_id = cap->license_id;
    lic.content_id = cap->content_id;
    lic.user_id = cap->user_id;
    lic.rules = cap->rules;
    lic.wrapped_key =
        suite->wrap_key(ctx.require("key"), cap->user->wrap_keys.public_key, ctx.rng);
    lic.signature = suite->sign(license_signing_bytes(lic), sign_key);
    cap->license = lic;
    FiringResult r{{}, ctx.state};
    r.outputs["license"] = to_bytes(serialize_license(lic));
    return r;
  };
  registry.add(std::move(license_enc));

  SimConfig config;
  config.seed = run_seed;
  config.mapping = all_software(drms_model());
  Trace trace = run(drms_model(), registry, config, {});

  if (!cap->license)
    throw DrmError(DrmError::Code::StoreError,
                   "the issuance run produced no license");

  issued_ += 1;
  licenses_[cap->license->license_id] = StoredLicense{*cap->license, false};
  stats_[content_id].downloads += 1;
  persist();

  IssuanceOutcome outcome;
  outcome.license = *cap->license;
  outcome.delivered = cap->delivered;
  outcome.trace = std::move(trace);
  return outcome;
}

void DrmSystem::record_denial(const std::string& content_id, DenialReason reason) {
  auto it = stats_.find(content_id);
  if (it != stats_.end()) it->second.denials[reason] += 1;
  persist();
}

ConsumeOutcome DrmSystem::consume(const std::string& user_id, const License& license,
                                  const Bytes& ciphertext, micros_t now,
                                  DeviceClass device) {
  auto ui = users_.find(user_id);
  if (ui == users_.end())
    throw DrmError(DrmError::Code::UnknownUser, "user '" + user_id + "' not registered");

  auto deny = [&](DenialReason reason) {
    record_denial(license.content_id, reason);
    return ConsumeOutcome{std::nullopt, reason};
  };

  if (!suite_.verify(license.signature, license_signing_bytes(license),
                     sign_keys_.public_key))
    return deny(DenialReason::BadSignature);
  if (auto li = licenses_.find(license.license_id);
      li != licenses_.end() && li->second.revoked)
    return deny(DenialReason::Revoked);
  if (license.user_id != user_id) return deny(DenialReason::WrongUser);
  if (license.rules.expires_at && now > *license.rules.expires_at)
    return deny(DenialReason::Expired);
  const auto plays_key = std::make_pair(user_id, license.license_id);
  if (license.rules.max_plays) {
    auto pi = plays_.find(plays_key);
    if (pi != plays_.end() && pi->second >= *license.rules.max_plays)
      return deny(DenialReason::PlaysExhausted);
  }
  if (license.rules.device_class && device != *license.rules.device_class)
    return deny(DenialReason::WrongDevice);

  auto key = suite_.unwrap_key(license.wrapped_key, ui->second.wrap_keys);
  if (!key) return deny(DenialReason::DecryptFailure);
  auto plaintext = suite_.sym_decrypt(ciphertext, *key);
  if (!plaintext) return deny(DenialReason::DecryptFailure);

  plays_[plays_key] += 1;
  if (auto it = stats_.find(license.content_id); it != stats_.end())
    it->second.consumptions += 1;
  persist();
  return ConsumeOutcome{std::move(plaintext), std::nullopt};
}

License DrmSystem::renew_license(const License& license, const UsageRules& new_rules) {
  if (!suite_.verify(license.signature, license_signing_bytes(license),
                     sign_keys_.public_key))
    throw DrmError(DrmError::Code::BadSignature,
                   "the license to renew fails signature verification");
  auto li = licenses_.find(license.license_id);
  if (li == licenses_.end())
    throw DrmError(DrmError::Code::UnknownLicense,
                   "license '" + license.license_id + "' is not on record");
  if (!new_rules.valid())
    throw DrmError(DrmError::Code::InvalidRules,
                   "renewal rules need at least one rule and positive max_plays");

  License renewed;
  renewed.license_id = "lic-" + std::to_string(issued_ + 1);
  renewed.content_id = license.content_id;
  renewed.user_id = license.user_id;
  renewed.rules = new_rules;
  renewed.wrapped_key = license.wrapped_key;
  renewed.signature = suite_.sign(license_signing_bytes(renewed), sign_keys_.private_key);

  issued_ += 1;
  li->second.revoked = true;
  licenses_[renewed.license_id] = StoredLicense{renewed, false};
  persist();
  return renewed;
}

UsageReport DrmSystem::usage_report(const std::string& content_id) const {
  if (!contents_.count(content_id))
    throw DrmError(DrmError::Code::UnknownContent,
                   "content '" + content_id + "' not in the catalog");
  auto it = stats_.find(content_id);
  return it != stats_.end() ? it->second : UsageReport{};
}

int DrmSystem::plays_used(const std::string& user_id,
                          const std::string& license_id) const {
  auto it = plays_.find({user_id, license_id});
  return it != plays_.end() ? it->second : 0;
}

bool DrmSystem::is_revoked(const std::string& license_id) const {
  auto it = licenses_.find(license_id);
  return it != licenses_.end() && it->second.revoked;
}

// --- persistence ---------------------------------------------------------

std::string DrmSystem::content_store_text() const {
  tree::Value root = tree::Value::object();
  tree::Value items = tree::Value::list();
  for (const auto& [id, c] : contents_) {
    tree::Value e = tree::Value::object();
    e.push("content_id", tree::Value::str(id));
    e.push("rules", rules_to_tree(c.rules_template));
    e.push("default", hex_value(c.encrypted_default));
    tree::Value renditions = tree::Value::list();
    for (const auto& [device, data] : c.encrypted) {
      tree::Value r = tree::Value::object();
      r.push("device", tree::Value::str(to_string(device)));
      r.push("data", hex_value(data));
      renditions.append(std::move(r));
    }
    e.push("renditions", std::move(renditions));
    items.append(std::move(e));
  }
  root.push("items", std::move(items));
  return tree::write_tree(root);
}

std::string DrmSystem::license_store_text() const {
  tree::Value root = tree::Value::object();
  root.push("sign_public", hex_value(sign_keys_.public_key));
  root.push("sign_private", hex_value(sign_keys_.private_key));
  root.push("issued", tree::Value::integer(static_cast<std::int64_t>(issued_)));
  tree::Value keys = tree::Value::list();
  for (const auto& [id, key] : content_keys_) {
    tree::Value e = tree::Value::object();
    e.push("content_id", tree::Value::str(id));
    e.push("key", hex_value(key));
    keys.append(std::move(e));
  }
  root.push("content_keys", std::move(keys));
  tree::Value users = tree::Value::list();
  for (const auto& [id, u] : users_) {
    tree::Value e = tree::Value::object();
    e.push("user_id", tree::Value::str(id));
    e.push("name", tree::Value::str(u.profile.name));
    e.push("device", tree::Value::str(to_string(u.profile.device)));
    e.push("payment", tree::Value::str(u.profile.payment_token));
    e.push("wrap_public", hex_value(u.wrap_keys.public_key));
    users.append(std::move(e));
  }
  root.push("users", std::move(users));
  tree::Value licenses = tree::Value::list();
  for (const auto& [id, l] : licenses_) {
    (void)id;
    tree::Value e = tree::Value::object();
    e.push("text", tree::Value::str(serialize_license(l.license)));
    e.push("revoked", tree::Value::boolean(l.revoked));
    licenses.append(std::move(e));
  }
  root.push("licenses", std::move(licenses));
  tree::Value stats = tree::Value::list();
  for (const auto& [id, s] : stats_) {
    tree::Value e = tree::Value::object();
    e.push("content_id", tree::Value::str(id));
    e.push("downloads", tree::Value::integer(s.downloads));
    e.push("consumptions", tree::Value::integer(s.consumptions));
    tree::Value denials = tree::Value::list();
    for (const auto& [reason, count] : s.denials) {
      tree::Value d = tree::Value::object();
      d.push("reason", tree::Value::str(to_string(reason)));
      d.push("count", tree::Value::integer(count));
      denials.append(std::move(d));
    }
    e.push("denials", std::move(denials));
    stats.append(std::move(e));
  }
  root.push("stats", std::move(stats));
  return tree::write_tree(root);
}

std::string DrmSystem::reader_state_text() const {
  tree::Value root = tree::Value::object();
  tree::Value keys = tree::Value::list();
  for (const auto& [id, u] : users_) {
    tree::Value e = tree::Value::object();
    e.push("user_id", tree::Value::str(id));
    e.push("wrap_public", hex_value(u.wrap_keys.public_key));
    e.push("wrap_private", hex_value(u.wrap_keys.private_key));
    keys.append(std::move(e));
  }
  root.push("keys", std::move(keys));
  tree::Value plays = tree::Value::list();
  for (const auto& [key, count] : plays_) {
    tree::Value e = tree::Value::object();
    e.push("user_id", tree::Value::str(key.first));
    e.push("license_id", tree::Value::str(key.second));
    e.push("count", tree::Value::integer(count));
    plays.append(std::move(e));
  }
  root.push("plays", std::move(plays));
  return tree::write_tree(root);
}

void DrmSystem::persist() const {
  if (persist_dir_.empty()) return;
  namespace fs = std::filesystem;
  fs::create_directories(persist_dir_);
  auto write_file = [&](const char* name, const std::string& text) {
    std::ofstream out(fs::path(persist_dir_) / name,
                      std::ios::binary | std::ios::trunc);
    out << text;
    if (!out)
      throw DrmError(DrmError::Code::StoreError,
                     std::string("cannot write store file '") + name + "'");
  };
  write_file("content_store.f4ms", content_store_text());
  write_file("license_store.f4ms", license_store_text());
  write_file("reader_state.f4ms", reader_state_text());
}

void DrmSystem::load() {
  namespace fs = std::filesystem;
  auto read_file = [&](const char* name) -> std::optional<std::string> {
    fs::path p = fs::path(persist_dir_) / name;
    if (!fs::exists(p)) return std::nullopt;
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  auto parse_root = [&](const std::string& text, const char* name) {
    tree::ParseResult parsed = tree::parse_tree(text, name);
    if (!parsed.root)
      throw DrmError(DrmError::Code::StoreError,
                     std::string("store file '") + name + "' is unreadable");
    return std::move(*parsed.root);
  };
  auto str_of = [](const tree::Value& v, const char* key) -> std::optional<std::string> {
    const tree::Value* f = v.find(key);
    if (!f || !f->is_string()) return std::nullopt;
    return f->as_string();
  };
  auto int_of = [](const tree::Value& v, const char* key) -> std::optional<std::int64_t> {
    const tree::Value* f = v.find(key);
    if (!f || !f->is_number() || f->as_micros() % kMicrosPerUnit != 0)
      return std::nullopt;
    return f->as_micros() / kMicrosPerUnit;
  };
  auto malformed = [](const char* name) {
    return DrmError(DrmError::Code::StoreError,
                    std::string("store file '") + name + "' is malformed");
  };

  if (auto text = read_file("content_store.f4ms")) {
    tree::Value root = parse_root(*text, "content_store.f4ms");
    const tree::Value* items = root.find("items");
    if (!items || !items->is_list()) throw malformed("content_store.f4ms");
    for (const auto& e : items->as_list()) {
      StoredContent c;
      auto id = str_of(e, "content_id");
      const tree::Value* rules = e.is_object() ? e.find("rules") : nullptr;
      auto rt = rules ? rules_from_tree(*rules) : std::nullopt;
      auto def = e.is_object() ? hex_field(e, "default") : std::nullopt;
      if (!id || !rt || !def) throw malformed("content_store.f4ms");
      c.content_id = *id;
      c.rules_template = *rt;
      c.encrypted_default = std::move(*def);
      if (const tree::Value* rend = e.find("renditions"); rend && rend->is_list())
        for (const auto& r : rend->as_list()) {
          auto device = str_of(r, "device");
          auto data = r.is_object() ? hex_field(r, "data") : std::nullopt;
          auto d = device ? device_class_from_string(*device) : std::nullopt;
          if (!d || !data) throw malformed("content_store.f4ms");
          c.encrypted[*d] = std::move(*data);
        }
      contents_[c.content_id] = std::move(c);
    }
  }

  if (auto text = read_file("license_store.f4ms")) {
    tree::Value root = parse_root(*text, "license_store.f4ms");
    if (auto pub = hex_field(root, "sign_public")) sign_keys_.public_key = *pub;
    if (auto priv = hex_field(root, "sign_private")) sign_keys_.private_key = *priv;
    if (auto issued = int_of(root, "issued")) issued_ = static_cast<std::uint64_t>(*issued);
    if (const tree::Value* keys = root.find("content_keys"); keys && keys->is_list())
      for (const auto& e : keys->as_list()) {
        auto id = str_of(e, "content_id");
        auto key = e.is_object() ? hex_field(e, "key") : std::nullopt;
        if (!id || !key) throw malformed("license_store.f4ms");
        content_keys_[*id] = std::move(*key);
      }
    if (const tree::Value* users = root.find("users"); users && users->is_list())
      for (const auto& e : users->as_list()) {
        auto id = str_of(e, "user_id");
        auto name = str_of(e, "name");
        auto device = str_of(e, "device");
        auto payment = str_of(e, "payment");
        auto pub = e.is_object() ? hex_field(e, "wrap_public") : std::nullopt;
        auto d = device ? device_class_from_string(*device) : std::nullopt;
        if (!id || !name || !d || !payment || !pub)
          throw malformed("license_store.f4ms");
        StoredUser u;
        u.profile = UserProfile{*id, *name, *d, *payment};
        u.wrap_keys.public_key = std::move(*pub);
        users_[*id] = std::move(u);
      }
    if (const tree::Value* lics = root.find("licenses"); lics && lics->is_list())
      for (const auto& e : lics->as_list()) {
        auto lic_text = str_of(e, "text");
        const tree::Value* revoked = e.is_object() ? e.find("revoked") : nullptr;
        if (!lic_text || !revoked || !revoked->is_bool())
          throw malformed("license_store.f4ms");
        auto parsed = parse_license(*lic_text, "license_store.f4ms");
        if (!parsed.license) throw malformed("license_store.f4ms");
        licenses_[parsed.license->license_id] =
            StoredLicense{std::move(*parsed.license), revoked->as_bool()};
      }
    if (const tree::Value* stats = root.find("stats"); stats && stats->is_list())
      for (const auto& e : stats->as_list()) {
        auto id = str_of(e, "content_id");
        auto downloads = int_of(e, "downloads");
        auto consumptions = int_of(e, "consumptions");
        if (!id || !downloads || !consumptions) throw malformed("license_store.f4ms");
        UsageReport r;
        r.downloads = static_cast<int>(*downloads);
        r.consumptions = static_cast<int>(*consumptions);
        if (const tree::Value* denials = e.find("denials"); denials && denials->is_list())
          for (const auto& d : denials->as_list()) {
            auto reason = str_of(d, "reason");
            auto count = int_of(d, "count");
            auto parsed_reason =
                reason ? denial_reason_from_string(*reason) : std::nullopt;
            if (!parsed_reason || !count) throw malformed("license_store.f4ms");
            r.denials[*parsed_reason] = static_cast<int>(*count);
          }
        stats_[*id] = std::move(r);
      }
  }

  if (auto text = read_file("reader_state.f4ms")) {
    tree::Value root = parse_root(*text, "reader_state.f4ms");
    if (const tree::Value* keys = root.find("keys"); keys && keys->is_list())
      for (const auto& e : keys->as_list()) {
        auto id = str_of(e, "user_id");
        auto pub = e.is_object() ? hex_field(e, "wrap_public") : std::nullopt;
        auto priv = e.is_object() ? hex_field(e, "wrap_private") : std::nullopt;
        if (!id || !pub || !priv) throw malformed("reader_state.f4ms");
        auto ui = users_.find(*id);
        if (ui == users_.end()) throw malformed("reader_state.f4ms");
        ui->second.wrap_keys.public_key = std::move(*pub);
        ui->second.wrap_keys.private_key = std::move(*priv);
      }
    if (const tree::Value* plays = root.find("plays"); plays && plays->is_list())
      for (const auto& e : plays->as_list()) {
        auto user = str_of(e, "user_id");
        auto lic = str_of(e, "license_id");
        auto count = int_of(e, "count");
        if (!user || !lic || !count) throw malformed("reader_state.f4ms");
        plays_[{*user, *lic}] = static_cast<int>(*count);
      }
  }
}

}  // namespace f4ms::drm
