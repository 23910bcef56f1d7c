#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "f4ms/builtins.hpp"
#include "f4ms/drm.hpp"
#include "f4ms/partition.hpp"
#include "f4ms/sysdesc.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  return static_cast<bool>(out);
}

// Loads and fully validates a model; prints diagnostics and returns nullopt
// on any failure.
std::optional<f4ms::SystemModel> load_model(const std::string& path) {
  auto text = read_file(path);
  if (!text) {
    std::cerr << path << ": cannot read file\n";
    return std::nullopt;
  }
  auto outcome = f4ms::sysdesc::parse_system(*text, path, f4ms::default_registry());
  if (!outcome.ok()) {
    for (const auto& d : outcome.diagnostics)
      std::cerr << f4ms::tree::format_diagnostic(d) << "\n";
    return std::nullopt;
  }
  return std::move(outcome.model);
}

int cmd_validate(const std::string& path) {
  return load_model(path) ? kExitOk : kExitValidation;
}

std::optional<f4ms::Mapping> resolve_mapping(const f4ms::SystemModel& model,
                                             const std::string& spec) {
  if (spec == "all-sw") return f4ms::all_software(model);
  if (spec == "all-hw-where-allowed") return f4ms::all_hardware_where_allowed(model);
  auto text = read_file(spec);
  if (!text) {
    std::cerr << spec << ": cannot read mapping file\n";
    return std::nullopt;
  }
  auto outcome = f4ms::sysdesc::parse_mapping(*text, spec);
  if (!outcome.ok()) {
    for (const auto& d : outcome.diagnostics)
      std::cerr << f4ms::tree::format_diagnostic(d) << "\n";
    return std::nullopt;
  }
  return f4ms::Mapping{std::move(*outcome.mapping)};
}

int cmd_run(const std::string& path, const std::string& mapping_spec,
            std::uint64_t seed, const std::string& trace_path,
            const std::string& format) {
  auto model = load_model(path);
  if (!model) return kExitValidation;
  auto mapping = resolve_mapping(*model, mapping_spec);
  if (!mapping) return kExitValidation;

  f4ms::SimConfig config;
  config.seed = seed;
  config.mapping = std::move(*mapping);
  try {
    f4ms::Trace trace = f4ms::run(*model, f4ms::default_registry(), config);
    if (!trace_path.empty()) {
      const auto fmt = format == "structured" ? f4ms::TraceFormat::Structured
                                              : f4ms::TraceFormat::Lines;
      if (!write_file(trace_path, f4ms::trace_export(trace, fmt))) {
        std::cerr << trace_path << ": cannot write trace file\n";
        return kExitRuntime;
      }
    }
    std::cout << "sim_time=" << f4ms::format_micros_fixed6(trace.sim_time) << "\n";
    return kExitOk;
  } catch (const f4ms::EngineError& e) {
    std::cerr << f4ms::to_string(e.code) << ": " << e.what() << "\n";
    return kExitRuntime;
  }
}

bool parse_quad(const std::string& text, double out[4]) {
  std::istringstream in(text);
  std::string part;
  int i = 0;
  while (std::getline(in, part, ',')) {
    if (i >= 4) return false;
    try {
      std::size_t used = 0;
      out[i] = std::stod(part, &used);
      if (used != part.size()) return false;
    } catch (...) {
      return false;
    }
    ++i;
  }
  return i == 4;
}

int cmd_partition(const std::string& path, const std::string& weights,
                  const std::string& refs, const std::string& area_budget,
                  int security_floor, const std::string& method_name,
                  const std::string& report_path) {
  double w[4], r[4];
  if (!parse_quad(weights, w) || !parse_quad(refs, r)) {
    std::cerr << "weights and refs must be four comma-separated numbers "
                 "(time,area,energy,security)\n";
    return kExitUsage;
  }
  f4ms::PartitionObjective objective;
  objective.w_time = w[0];
  objective.w_area = w[1];
  objective.w_energy = w[2];
  objective.w_security = w[3];
  auto to_ref = [](double v) {
    return static_cast<f4ms::micros_t>(v * f4ms::kMicrosPerUnit + 0.5);
  };
  objective.ref_time = to_ref(r[0]);
  objective.ref_area = to_ref(r[1]);
  objective.ref_energy = to_ref(r[2]);
  objective.ref_security = to_ref(r[3]);

  f4ms::Constraints constraints;
  if (!area_budget.empty()) {
    auto budget = f4ms::parse_decimal_micros(area_budget);
    if (!budget || *budget < 0) {
      std::cerr << "--area-budget must be a non-negative decimal\n";
      return kExitUsage;
    }
    constraints.area_budget = *budget;
  }
  if (security_floor < 0 || security_floor > 5) {
    std::cerr << "--security-floor must be in 0..5\n";
    return kExitUsage;
  }
  constraints.security_floor = security_floor;

  auto model = load_model(path);
  if (!model) return kExitValidation;

  const auto method = method_name == "greedy" ? f4ms::SearchMethod::Greedy
                                              : f4ms::SearchMethod::Exhaustive;
  try {
    f4ms::Scenario scenario;
    f4ms::OptimizeOutcome outcome =
        f4ms::optimize(*model, f4ms::default_registry(), scenario, objective,
                       constraints, method);
    if (!report_path.empty() &&
        !write_file(report_path, f4ms::report_export(outcome))) {
      std::cerr << report_path << ": cannot write report file\n";
      return kExitRuntime;
    }
    for (const auto& [id, kind] : outcome.best.mapping.assignment)
      std::cout << id << "=" << (kind == f4ms::Kind::Software ? "SW" : "HW") << "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", outcome.best.objective_value);
    std::cout << "objective=" << buf << "\n";
    return kExitOk;
  } catch (const f4ms::PartitionError& e) {
    std::cerr << f4ms::to_string(e.code) << ": " << e.what() << "\n";
    return e.code == f4ms::PartitionError::Code::InvalidObjective ? kExitUsage
                                                                  : kExitRuntime;
  } catch (const f4ms::EngineError& e) {
    std::cerr << f4ms::to_string(e.code) << ": " << e.what() << "\n";
    return kExitRuntime;
  }
}

// --- demo-drm -------------------------------------------------------------

struct DemoWorld {
  f4ms::drm::DrmSystem system;
  f4ms::drm::UserProfile alice;
  std::string content_id;

  explicit DemoWorld(std::uint64_t seed)
      : system(f4ms::test_suite(), seed),
        alice{f4ms::kDemoUserId, "Alice", f4ms::drm::DeviceClass::Desktop, "token-0"},
        content_id(f4ms::kDemoContentId) {
    system.register_user(alice);
    f4ms::drm::ContentItem item;
    item.content_id = content_id;
    item.plaintext = f4ms::to_bytes("demo content payload");
    item.renditions[f4ms::drm::DeviceClass::Mobile] =
        f4ms::to_bytes("demo content payload (mobile)");
    f4ms::drm::UsageRules rules;
    rules.expires_at = 100 * f4ms::kMicrosPerUnit;
    rules.max_plays = 3;
    system.submit_content(item, rules);
  }
};

void print_protocol_steps(const f4ms::Trace& trace) {
  static const char* kProtocolTags[] = {"content_request", "info_demand",
                                        "user_info",       "license_request",
                                        "license",         "authorization"};
  int step = 1;
  for (const auto& ev : trace.events) {
    if (ev.kind != f4ms::EventKind::MessageTransfer) continue;
    const f4ms::tree::Value* tag = ev.detail.find("tag");
    const f4ms::tree::Value* from = ev.detail.find("from");
    const f4ms::tree::Value* to = ev.detail.find("to");
    if (!tag || !tag->is_string() || !from || !to) continue;
    bool protocol = false;
    for (const char* t : kProtocolTags)
      if (tag->as_string() == t) protocol = true;
    if (!protocol) continue;
    std::cout << "step " << step++ << ": " << tag->as_string() << " "
              << from->as_list()[0].as_string() << " -> "
              << to->as_list()[0].as_string()
              << " t=" << f4ms::format_micros_fixed6(ev.time) << "\n";
  }
}

std::string outcome_line(const f4ms::drm::ConsumeOutcome& outcome) {
  if (outcome.ok()) return "result=ok";
  return "result=denied:" + f4ms::drm::to_string(*outcome.denial);
}

int cmd_demo_drm(const std::string& scenario, f4ms::micros_t now,
                 std::uint64_t seed) {
  using f4ms::drm::DeviceClass;
  try {
    DemoWorld world(seed);
    auto issued = world.system.run_issuance_protocol(world.alice.user_id,
                                                     world.content_id, seed);
    print_protocol_steps(issued.trace);
    std::cout << "license=" << issued.license.license_id << "\n";

    if (scenario == "issue") {
      std::cout << "result=ok\n";
      return kExitOk;
    }

    if (scenario == "consume") {
      auto outcome = world.system.consume(world.alice.user_id, issued.license,
                                          issued.delivered, now,
                                          DeviceClass::Desktop);
      std::cout << "consume now=" << f4ms::format_micros_fixed6(now) << "\n";
      std::cout << outcome_line(outcome) << "\n";
      return kExitOk;
    }

    if (scenario == "renew") {
      f4ms::drm::UsageRules new_rules;
      new_rules.expires_at = now + 100 * f4ms::kMicrosPerUnit;
      new_rules.max_plays = 3;
      auto renewed = world.system.renew_license(issued.license, new_rules);
      std::cout << "renewed=" << renewed.license_id << "\n";
      auto with_old = world.system.consume(world.alice.user_id, issued.license,
                                           issued.delivered, now,
                                           DeviceClass::Desktop);
      std::cout << "old license: " << outcome_line(with_old) << "\n";
      auto with_new = world.system.consume(world.alice.user_id, renewed,
                                           issued.delivered, now,
                                           DeviceClass::Desktop);
      std::cout << outcome_line(with_new) << "\n";
      return with_new.ok() ? kExitOk : kExitRuntime;
    }

    if (scenario == "report") {
      for (int i = 0; i < 4; ++i) {
        auto outcome = world.system.consume(world.alice.user_id, issued.license,
                                            issued.delivered, now,
                                            DeviceClass::Desktop);
        std::cout << "consume " << (i + 1) << ": " << outcome_line(outcome) << "\n";
      }
      auto report = world.system.usage_report(world.content_id);
      std::cout << "downloads=" << report.downloads << "\n";
      std::cout << "consumptions=" << report.consumptions << "\n";
      for (const auto& [reason, count] : report.denials)
        std::cout << "denied:" << f4ms::drm::to_string(reason) << "=" << count << "\n";
      std::cout << "result=ok\n";
      return kExitOk;
    }

    std::cerr << "unknown scenario '" << scenario << "'\n";
    return kExitUsage;
  } catch (const f4ms::drm::DrmError& e) {
    std::cerr << f4ms::drm::to_string(e.code) << ": " << e.what() << "\n";
    return kExitRuntime;
  } catch (const f4ms::EngineError& e) {
    std::cerr << f4ms::to_string(e.code) << ": " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"composition, execution and partitioning of mixed "
               "software/hardware component systems"};
  app.require_subcommand(1);

  std::string file, mapping = "all-sw", trace_path, format = "lines";
  std::string weights = "1,1,1,1", refs = "1,1,1,1", area_budget, report_path;
  std::string method = "exhaustive", scenario;
  std::uint64_t seed = 0;
  int security_floor = 0;
  std::string now_text = "0";

  CLI::App* validate = app.add_subcommand("validate", "parse and validate a model");
  validate->add_option("file", file, "model description file")->required();

  CLI::App* run = app.add_subcommand("run", "execute a model and export its trace");
  run->add_option("file", file, "model description file")->required();
  run->add_option("--mapping", mapping,
                  "mapping file, 'all-sw' or 'all-hw-where-allowed'");
  run->add_option("--seed", seed, "simulation seed");
  run->add_option("--trace", trace_path, "trace output path");
  run->add_option("--format", format, "trace format")
      ->check(CLI::IsMember({"lines", "structured"}));

  CLI::App* partition =
      app.add_subcommand("partition", "search software/hardware assignments");
  partition->add_option("file", file, "model description file")->required();
  partition->add_option("--weights", weights, "time,area,energy,security weights");
  partition->add_option("--refs", refs, "normalization references");
  partition->add_option("--area-budget", area_budget, "hardware area budget");
  partition->add_option("--security-floor", security_floor,
                        "minimum acceptable security level");
  partition->add_option("--method", method, "search method")
      ->check(CLI::IsMember({"exhaustive", "greedy"}));
  partition->add_option("--report", report_path, "search report output path");

  CLI::App* demo = app.add_subcommand("demo-drm", "scripted license-issuance demo");
  demo->add_option("--scenario", scenario, "issue, consume, renew or report")
      ->required()
      ->check(CLI::IsMember({"issue", "consume", "renew", "report"}));
  demo->add_option("--now", now_text, "current time, decimal units");
  demo->add_option("--seed", seed, "demo seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (validate->parsed()) return cmd_validate(file);
  if (run->parsed()) return cmd_run(file, mapping, seed, trace_path, format);
  if (partition->parsed())
    return cmd_partition(file, weights, refs, area_budget, security_floor, method,
                         report_path);
  if (demo->parsed()) {
    auto now = f4ms::parse_decimal_micros(now_text);
    if (!now) {
      std::cerr << "--now must be a decimal with at most six fractional digits\n";
      return kExitUsage;
    }
    return cmd_demo_drm(scenario, *now, seed);
  }
  return kExitUsage;
}
