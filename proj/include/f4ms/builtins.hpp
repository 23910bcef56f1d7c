#pragma once

#include <string>

#include "f4ms/core.hpp"
#include "f4ms/graph.hpp"

namespace f4ms {

// Registry every CLI entry point resolves against: generic `noop` and `echo`
// plus the ten behaviors of the licensing business model (browser_v1,
// webapp_v1, keygen_v1, content_enc_v1, database_v1, adapter_v1,
// license_srv_v1, license_gen_v1, license_enc_v1, drm_reader_v1). The
// business-model behaviors are self-contained demo implementations that
// produce deterministic payloads; the drm module binds the same component
// topology to real stores and real crypto.
const BehaviorRegistry& default_registry();

// The reference system: ten components around a browser/web-application
// round-trip protocol — content preparation (keygen, content_enc, database),
// three browser/webapp exchanges, license issuance (license_srv,
// license_gen, license_enc), rendition adaptation (adapter), and a reader as
// the final component. keygen, content_enc and license_enc admit both
// implementation kinds; everything else is software-only.
const SystemModel& drms_model();

// Canonical serialization of drms_model(); fixtures/drms_business_model.f4ms
// carries the same bytes.
const std::string& drms_model_text();

inline constexpr const char* kDemoContentId = "content-001";
inline constexpr const char* kDemoUserId = "alice";
inline constexpr const char* kDemoDevice = "desktop";

}  // namespace f4ms
