#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>

#include "support/proc.hpp"

using testsupport::ProcResult;
using testsupport::run_proc;

namespace {

const std::string kCli = F4MS_CLI_PATH;
const std::string kFixtures = F4MS_FIXTURES_DIR;

std::string fixture(const std::string& name) { return kFixtures + "/" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string write_temp(const std::string& name, const std::string& text) {
  const std::string path = "/tmp/f4ms_cli_test_" + name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  return path;
}

std::string protocol_preamble() {
  return
      "step 1: content_request browser -> webapp t=12.000000\n"
      "step 2: info_demand webapp -> browser t=14.000000\n"
      "step 3: user_info browser -> webapp t=15.000000\n"
      "step 4: license_request webapp -> license_srv t=17.000000\n"
      "step 5: license license_enc -> webapp t=25.000000\n"
      "step 6: authorization webapp -> browser t=29.000000\n"
      "license=lic-1\n";
}

}  // namespace

TEST_CASE("validate: clean models pass silently, broken ones diagnose") {
  auto ok = run_proc({kCli, "validate", fixture("chain.f4ms")});
  CHECK(ok.exit_code == 0);
  CHECK(ok.out.empty());
  CHECK(ok.err.empty());

  auto bad = run_proc({kCli, "validate", fixture("bad_tagmismatch.f4ms")});
  CHECK(bad.exit_code == 1);
  CHECK(bad.err.find("ValidationError") != std::string::npos);
  CHECK(bad.err.find("TagMismatch") != std::string::npos);
  CHECK(bad.err.find("bad_tagmismatch.f4ms:") != std::string::npos);

  const std::string syn = write_temp("syntax.f4ms", "name [\n");
  auto broken = run_proc({kCli, "validate", syn});
  CHECK(broken.exit_code == 1);
  CHECK(broken.err.find("SyntaxError") != std::string::npos);

  auto missing = run_proc({kCli, "validate", "/tmp/f4ms_no_such_file.f4ms"});
  CHECK(missing.exit_code == 1);
  CHECK(!missing.err.empty());
}

TEST_CASE("run: computes makespans and honors mappings") {
  auto chain = run_proc({kCli, "run", fixture("chain.f4ms")});
  CHECK(chain.exit_code == 0);
  CHECK(chain.out == "sim_time=6.000000\n");

  auto forkjoin = run_proc({kCli, "run", fixture("forkjoin.f4ms")});
  CHECK(forkjoin.exit_code == 0);
  CHECK(forkjoin.out == "sim_time=7.000000\n");

  auto sw = run_proc({kCli, "run", fixture("minimal.f4ms")});
  CHECK(sw.out == "sim_time=4.000000\n");
  auto hw = run_proc(
      {kCli, "run", fixture("minimal.f4ms"), "--mapping", "all-hw-where-allowed"});
  CHECK(hw.out == "sim_time=1.000000\n");

  const std::string mapping = write_temp("mapping.f4ms", "solo \"hw\"\n");
  auto mapped = run_proc({kCli, "run", fixture("minimal.f4ms"), "--mapping", mapping});
  CHECK(mapped.exit_code == 0);
  CHECK(mapped.out == "sim_time=1.000000\n");

  const std::string junk = write_temp("mapping_bad.f4ms", "solo \"warp\"\n");
  auto rejected = run_proc({kCli, "run", fixture("minimal.f4ms"), "--mapping", junk});
  CHECK(rejected.exit_code == 1);
}

TEST_CASE("run: cyclic models stop with a runtime error") {
  auto r = run_proc({kCli, "run", fixture("cyclic.f4ms")});
  CHECK(r.exit_code == 3);
  CHECK(r.err.find("StepLimitExceeded") != std::string::npos);
}

TEST_CASE("run: the demo model trace matches the committed transcript") {
  const std::string trace = "/tmp/f4ms_cli_test_trace.lines";
  auto r = run_proc({kCli, "run", fixture("drms_business_model.f4ms"), "--trace",
                     trace, "--format", "lines"});
  CHECK(r.exit_code == 0);
  CHECK(r.out == "sim_time=32.000000\n");
  CHECK(slurp(trace) == slurp(fixture("drms_trace_all_sw.lines")));

  const std::string structured = "/tmp/f4ms_cli_test_trace.f4ms";
  auto s = run_proc({kCli, "run", fixture("drms_business_model.f4ms"), "--trace",
                     structured, "--format", "structured"});
  CHECK(s.exit_code == 0);
  const std::string text = slurp(structured);
  CHECK(text.find("sim_time 32") != std::string::npos);
  CHECK(text.find("events [") != std::string::npos);
}

TEST_CASE("partition: prints the assignment and objective") {
  auto d = run_proc({kCli, "partition", fixture("drms_business_model.f4ms")});
  CHECK(d.exit_code == 0);
  CHECK(d.out ==
        "adapter=SW\nbrowser=SW\ncontent_enc=HW\ndatabase=SW\ndrm_reader=SW\n"
        "keygen=SW\nlicense_enc=HW\nlicense_gen=SW\nlicense_srv=SW\nwebapp=SW\n"
        "objective=46.000000\n");

  auto sec = run_proc({kCli, "partition", fixture("drms_business_model.f4ms"),
                       "--weights", "1,1,1,10"});
  CHECK(sec.exit_code == 0);
  CHECK(sec.out.find("content_enc=HW\n") != std::string::npos);
  CHECK(sec.out.find("license_enc=HW\n") != std::string::npos);
  CHECK(sec.out.find("keygen=SW\n") != std::string::npos);
  CHECK(sec.out.find("objective=19.000000\n") != std::string::npos);

  auto greedy = run_proc({kCli, "partition", fixture("drms_business_model.f4ms"),
                          "--weights", "1,1,1,10", "--method", "greedy"});
  CHECK(greedy.out == sec.out);

  const std::string report = "/tmp/f4ms_cli_test_report.f4ms";
  auto rep = run_proc({kCli, "partition", fixture("drms_business_model.f4ms"),
                       "--report", report});
  CHECK(rep.exit_code == 0);
  const std::string text = slurp(report);
  CHECK(text.find("method \"exhaustive\"") != std::string::npos);
  CHECK(text.find("evaluated 8") != std::string::npos);
}

TEST_CASE("partition: constraint and usage failures use distinct codes") {
  auto infeasible = run_proc({kCli, "partition", fixture("drms_business_model.f4ms"),
                              "--security-floor", "5"});
  CHECK(infeasible.exit_code == 3);
  CHECK(infeasible.err.find("NoFeasibleMapping") != std::string::npos);

  auto bad_weights = run_proc({kCli, "partition", fixture("drms_business_model.f4ms"),
                               "--weights", "1,2"});
  CHECK(bad_weights.exit_code == 2);

  auto bad_floor = run_proc({kCli, "partition", fixture("drms_business_model.f4ms"),
                             "--security-floor", "9"});
  CHECK(bad_floor.exit_code == 2);

  auto bad_refs = run_proc({kCli, "partition", fixture("drms_business_model.f4ms"),
                            "--refs", "0,1,1,1"});
  CHECK(bad_refs.exit_code == 2);
}

TEST_CASE("demo-drm: scenario transcripts are stable") {
  auto issue = run_proc({kCli, "demo-drm", "--scenario", "issue"});
  CHECK(issue.exit_code == 0);
  CHECK(issue.out == protocol_preamble() + "result=ok\n");

  auto ok = run_proc({kCli, "demo-drm", "--scenario", "consume", "--now", "5"});
  CHECK(ok.exit_code == 0);
  CHECK(ok.out == protocol_preamble() + "consume now=5.000000\nresult=ok\n");

  auto expired = run_proc({kCli, "demo-drm", "--scenario", "consume", "--now", "101"});
  CHECK(expired.exit_code == 0);
  CHECK(expired.out ==
        protocol_preamble() + "consume now=101.000000\nresult=denied:Expired\n");

  auto renew = run_proc({kCli, "demo-drm", "--scenario", "renew", "--now", "5"});
  CHECK(renew.exit_code == 0);
  CHECK(renew.out == protocol_preamble() +
                         "renewed=lic-2\nold license: result=denied:Revoked\n"
                         "result=ok\n");

  auto report = run_proc({kCli, "demo-drm", "--scenario", "report", "--now", "5"});
  CHECK(report.exit_code == 0);
  CHECK(report.out == protocol_preamble() +
                          "consume 1: result=ok\nconsume 2: result=ok\n"
                          "consume 3: result=ok\n"
                          "consume 4: result=denied:PlaysExhausted\n"
                          "downloads=1\nconsumptions=3\n"
                          "denied:PlaysExhausted=1\nresult=ok\n");

  auto seeded = run_proc({kCli, "demo-drm", "--scenario", "issue", "--seed", "9"});
  CHECK(seeded.exit_code == 0);
  CHECK(seeded.out == issue.out);  // protocol shape is seed-independent
}

TEST_CASE("usage errors exit with code 2") {
  auto none = run_proc({kCli});
  CHECK(none.exit_code == 2);

  auto bogus = run_proc({kCli, "bogus"});
  CHECK(bogus.exit_code == 2);

  auto bad_format = run_proc(
      {kCli, "run", fixture("chain.f4ms"), "--format", "binary"});
  CHECK(bad_format.exit_code == 2);

  auto bad_scenario = run_proc({kCli, "demo-drm", "--scenario", "steal"});
  CHECK(bad_scenario.exit_code == 2);

  auto help = run_proc({kCli, "--help"});
  CHECK(help.exit_code == 0);
  CHECK(help.out.find("validate") != std::string::npos);
  CHECK(help.out.find("partition") != std::string::npos);
  CHECK(help.out.find("demo-drm") != std::string::npos);
}
