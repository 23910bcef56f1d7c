#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "f4ms/crypto.hpp"
#include "f4ms/engine.hpp"

namespace f4ms::drm {

enum class DeviceClass { Desktop, Mobile, ReaderDevice };

std::string to_string(DeviceClass d);  // "desktop" / "mobile" / "reader_device"
std::optional<DeviceClass> device_class_from_string(std::string_view s);

// At least one rule must be present; max_plays, when set, is >= 1.
struct UsageRules {
  std::optional<micros_t> expires_at;  // absolute timestamp, micro-units
  std::optional<int> max_plays;
  std::optional<DeviceClass> device_class;

  bool valid() const {
    if (!expires_at && !max_plays && !device_class) return false;
    return !max_plays || *max_plays >= 1;
  }
  auto operator<=>(const UsageRules&) const = default;
};

struct ContentItem {
  std::string content_id;
  Bytes plaintext;
  std::map<DeviceClass, Bytes> renditions;  // per-device variants, optional
};

struct UserProfile {
  std::string user_id;
  std::string name;
  DeviceClass device = DeviceClass::Desktop;
  std::string payment_token;  // placeholder field, never interpreted
};

struct License {
  std::string license_id;
  std::string content_id;
  std::string user_id;
  UsageRules rules;
  Bytes wrapped_key;  // content key wrapped for the licensed user
  Bytes signature;    // detached, over serialize_license_body(*this)
};

// Canonical license text: keys license_id, content_id, user_id, rules,
// wrapped_key (hex), signature (hex). The signed byte sequence is the
// canonical serialization up to and excluding the signature field, bit-exact.
std::string serialize_license(const License& license);
Bytes license_signing_bytes(const License& license);
struct LicenseParseOutcome {
  std::optional<License> license;
  std::vector<tree::Diagnostic> diagnostics;
};
LicenseParseOutcome parse_license(std::string_view text, std::string_view file_name);

enum class DenialReason {
  BadSignature,
  Revoked,
  Expired,
  PlaysExhausted,
  WrongDevice,
  WrongUser,
  DecryptFailure,
};

std::string to_string(DenialReason r);
std::optional<DenialReason> denial_reason_from_string(std::string_view s);

struct ConsumeOutcome {
  std::optional<Bytes> plaintext;       // set on success
  std::optional<DenialReason> denial;   // set on denial
  bool ok() const { return plaintext.has_value(); }
};

struct DrmError : std::runtime_error {
  enum class Code {
    DuplicateContent,
    DuplicateUser,
    UnknownContent,
    UnknownUser,
    UnknownLicense,
    BadSignature,
    InvalidRules,
    StoreError,
  };
  Code code;
  DrmError(Code c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

std::string to_string(DrmError::Code c);

struct CatalogEntry {
  std::string content_id;
  UsageRules rules_template;
};

struct UsageReport {
  int downloads = 0;     // successful issuances
  int consumptions = 0;  // successful consumes
  std::map<DenialReason, int> denials;
};

struct IssuanceOutcome {
  License license;
  Bytes delivered;  // encrypted rendition handed to the reader
  Trace trace;      // full engine trace of the six-step exchange
};

// Reference license-issuance system over the shipped component topology.
// One instance bundles the content server (catalog + ciphertext store), the
// license server (content-key store, signing keypair, issued licenses) and
// the reader side (user keypairs, per-license play counters). Trust
// boundaries are kept by construction: the content server state never holds
// a clear content key, and issuance traces carry key material only wrapped.
//
// With a persist directory the three stores write through to
// content_store.f4ms / license_store.f4ms / reader_state.f4ms and are
// reloaded on construction.
class DrmSystem {
 public:
  DrmSystem(const CryptoSuite& suite, std::uint64_t seed,
            std::string persist_dir = "");

  void register_user(const UserProfile& profile);  // DuplicateUser
  // Encrypts every rendition under a fresh content key; the clear key goes
  // to the license server's key store only. DuplicateContent, InvalidRules.
  CatalogEntry submit_content(const ContentItem& item, const UsageRules& rules_template);
  std::vector<CatalogEntry> catalog() const;

  // Runs the six-step exchange on the engine: request, info demand, info,
  // license request, license generation + wrap-and-sign, authorization.
  // UnknownUser/UnknownContent are raised before the protocol starts.
  IssuanceOutcome run_issuance_protocol(const std::string& user_id,
                                        const std::string& content_id,
                                        std::uint64_t run_seed = 0);

  // Check order: signature, revocation, user, expiry (now <= expires_at
  // passes), plays, device, then unwrap+decrypt. On success increments the
  // persistent play counter by exactly one; on denial state is unchanged.
  ConsumeOutcome consume(const std::string& user_id, const License& license,
                         const Bytes& ciphertext, micros_t now, DeviceClass device);

  // Re-issues under new rules and revokes the original. BadSignature,
  // UnknownLicense, InvalidRules.
  License renew_license(const License& license, const UsageRules& new_rules);

  UsageReport usage_report(const std::string& content_id) const;  // UnknownContent

  const Bytes& license_verify_key() const { return sign_keys_.public_key; }
  int plays_used(const std::string& user_id, const std::string& license_id) const;
  bool is_revoked(const std::string& license_id) const;

  // Persisted content-server state, canonical text (inspectable by tests).
  std::string content_store_text() const;

 private:
  struct StoredContent {
    std::string content_id;
    UsageRules rules_template;
    std::map<DeviceClass, Bytes> encrypted;  // per device class
    Bytes encrypted_default;
  };
  struct StoredUser {
    UserProfile profile;
    KeyPair wrap_keys;
  };
  struct StoredLicense {
    License license;
    bool revoked = false;
  };

  const CryptoSuite& suite_;
  SplitMix64 rng_;
  std::string persist_dir_;
  std::map<std::string, StoredContent> contents_;
  std::map<std::string, Bytes> content_keys_;  // license-server side
  std::map<std::string, StoredUser> users_;
  std::map<std::string, StoredLicense> licenses_;
  std::map<std::pair<std::string, std::string>, int> plays_;  // (user, license)
  std::map<std::string, UsageReport> stats_;
  KeyPair sign_keys_;
  std::uint64_t issued_ = 0;

  const Bytes& select_rendition(const StoredContent& c, DeviceClass device) const;
  void record_denial(const std::string& content_id, DenialReason reason);
  void persist() const;
  void load();
  std::string license_store_text() const;
  std::string reader_state_text() const;
};

}  // namespace f4ms::drm
