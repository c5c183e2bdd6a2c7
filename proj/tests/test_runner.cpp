#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "stealth/runner.hpp"
#include "stealth/wire.hpp"

using namespace stealth;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("stealth_runner_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json base_spec(const fs::path& out) {
  return json{{"oracle", {{"kind", "linear"}, {"dim", 12}, {"seed", 4}, {"margin", 0.2}}},
              {"attacks", {{{"name", "hsja"}}, {{"name", "stealthy-rays"}, {"norm", "linf"}}}},
              {"samples", {{"random", {{"count", 3}, {"seed", 9}}}}},
              {"flagged_budget", 60},
              {"workers", 3},
              {"seed", 5},
              {"output", out.string()}};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<TraceEvent> events_of(const fs::path& p) { return read_trace_file(p).events; }

}  // namespace

TEST_CASE("two attacks on three samples give six traces and reports") {
  const fs::path out = scratch("six");
  std::ostringstream log;
  const RunResult r = run_spec(parse_run_spec(base_spec(out)), log);
  CHECK(r.succeeded == 6);
  CHECK(r.failed == 0);
  CHECK(r.exit_code == 0);
  int n = 0;
  for (const auto& e : fs::directory_iterator(out / "traces")) n += e.path().extension() == ".jsonl";
  CHECK(n == 6);
  CHECK(fs::exists(out / "traces" / "hsja__0002.jsonl"));
  CHECK(fs::exists(out / "curves.csv"));
  CHECK(fs::exists(out / "costs.csv"));
  CHECK(fs::exists(out / "accounts.csv"));
  const json m = json::parse(slurp(out / "manifest.json"));
  CHECK(m["runs"].size() == 6);
  for (const auto& run : m["runs"]) {
    CHECK(run["status"] == "ok");
    CHECK(run["config_digest"].get<std::string>().size() == 16);
  }
  const VerifyReport v = verify_dir(out);
  CHECK(v.ok());
  CHECK(v.files.size() == 6);
}

TEST_CASE("identical specs give byte-identical traces") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  std::ostringstream log;
  json sa = base_spec(a), sb = base_spec(b);
  sb["workers"] = 1;  // scheduling must not matter
  run_spec(parse_run_spec(sa), log);
  run_spec(parse_run_spec(sb), log);
  for (const auto& e : fs::directory_iterator(a / "traces")) {
    const fs::path other = b / "traces" / e.path().filename();
    REQUIRE(fs::exists(other));
    CHECK(events_of(e.path()) == events_of(other));
    CHECK(slurp(e.path()) == slurp(other));
  }
}

TEST_CASE("reports are recomputable from the trace files") {
  const fs::path out = scratch("recompute");
  std::ostringstream log;
  json spec = base_spec(out);
  spec["report"] = {{"budgets", {1, 10, 30, 60}}, {"target_distance", 0.5},
                    {"cost_models", {{{"c0", 0.0}, {"c_flagged", 1.0}}}}};
  run_spec(parse_run_spec(spec), log);
  const std::string curves = slurp(out / "curves.csv");
  const std::string costs = slurp(out / "costs.csv");

  std::map<std::string, std::vector<AttackTrace>> groups;
  for (auto& t : load_traces(out)) groups[t.group()].push_back(std::move(t));
  std::map<std::string, std::vector<CurvePoint>> expect;
  for (const auto& [k, v] : groups) expect[k] = median_curve(v, {1, 10, 30, 60});
  std::ostringstream csv;
  write_curve_csv(csv, expect);
  CHECK(csv.str() == curves);

  fs::remove(out / "curves.csv");
  fs::remove(out / "costs.csv");
  write_reports(out, log);
  CHECK(slurp(out / "curves.csv") == curves);
  CHECK(slurp(out / "costs.csv") == costs);
}

TEST_CASE("spec validation") {
  const fs::path out = scratch("invalid");
  json spec = base_spec(out);
  spec["attacks"] = {{{"name", "fastest-attack"}}};
  try {
    parse_run_spec(spec);
    FAIL("expected a spec error");
  } catch (const SpecError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("fastest-attack") != std::string::npos);
    for (const auto& n : attack_names()) CHECK(msg.find(n) != std::string::npos);
  }
  spec = base_spec(out);
  spec["samples"]["random"]["count"] = 0;
  CHECK_THROWS_AS(parse_run_spec(spec), SpecError);
  spec = base_spec(out);
  spec["attacks"] = {{{"name", "rays"}, {"norm", "l2"}}};
  CHECK_THROWS_AS(parse_run_spec(spec), SpecError);
  spec = base_spec(out);
  spec["oracle"]["kind"] = "oracle-of-delphi";
  CHECK_THROWS_AS(parse_run_spec(spec), SpecError);
  spec = base_spec(out);
  spec["attacks"] = {"hsja", "hsja"};
  CHECK_THROWS_AS(parse_run_spec(spec), SpecError);
  spec = base_spec(out);
  spec["flagged_budget"] = 0;
  CHECK_THROWS_AS(parse_run_spec(spec), SpecError);
  spec = base_spec(out);
  spec["oracle"]["grid"] = "1/255";
  spec["attacks"][0]["strategy"] = {{"kind", "kstage"}, {"stages", 2}, {"subintervals", 10000}};
  const RunSpec ok = parse_run_spec(spec);
  REQUIRE(ok.attacks[0].cfg.strategy.has_value());
  CHECK(ok.attacks[0].cfg.strategy->stages == 2);
  CHECK(*parse_grid("1/255") == doctest::Approx(1.0 / 255));
}

TEST_CASE("verify reports corrupted traces per file") {
  const fs::path out = scratch("corrupt");
  std::ostringstream log;
  run_spec(parse_run_spec(base_spec(out)), log);
  const fs::path victim = out / "traces" / "hsja__0001.jsonl";
  AttackTrace t = read_trace_file(victim);
  REQUIRE(t.events.size() >= 2);
  t.events[1].d = t.events[0].d * 2;
  write_trace_file(victim, t);
  // Claim the flagged original itself as the adversarial point.
  const RunSpec spec = parse_run_spec(base_spec(out));
  const auto oracle = make_oracle(spec.oracle);
  const fs::path victim2 = out / "traces" / "stealthy-rays__0000.jsonl";
  t = read_trace_file(victim2);
  t.summary.x_adv = load_samples(spec, *oracle)[0];
  write_trace_file(victim2, t);

  const VerifyReport v = verify_dir(out);
  CHECK_FALSE(v.ok());
  int bad = 0;
  for (const auto& f : v.files) {
    if (f.issues.empty()) continue;
    ++bad;
    CHECK((f.file == victim.filename().string() || f.file == victim2.filename().string()));
  }
  CHECK(bad == 2);
}

TEST_CASE("a remote oracle failure is recorded per run") {
  const fs::path out = scratch("remote");
  LinearOracle lin(std::vector<double>(12, 1.0), -6.5);
  std::uint16_t port;
  {
    OracleServer probe(lin);
    port = probe.port();
  }
  json spec = base_spec(out);
  spec["oracle"] = {{"kind", "remote"}, {"endpoint", "127.0.0.1:" + std::to_string(port)}};
  spec["samples"] = {{"file", (out / "points.json").string()}};
  std::ofstream(out / "points.json") << json(std::vector<std::vector<double>>{std::vector<double>(12, 0.9)}).dump();
  std::ostringstream log;
  // Nothing listens, so the oracle cannot be reached at all.
  CHECK_THROWS(run_spec(parse_run_spec(spec), log));

  OracleServer server(lin);
  server.start();
  spec["oracle"]["endpoint"] = "127.0.0.1:" + std::to_string(server.port());
  spec["workers"] = 1;
  const RunResult r = run_spec(parse_run_spec(spec), log);
  CHECK(r.succeeded == 2);
  CHECK(verify_dir(out).ok());
  server.stop();
}

#ifdef STEALTH_CLI_PATH
TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("cli");
  json spec = base_spec(dir / "out");
  spec["attacks"] = {"no-such-attack"};
  std::ofstream(dir / "bad.json") << spec.dump();
  const std::string cli = STEALTH_CLI_PATH;
  auto run = [](const std::string& cmd) {
    const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  };
  CHECK(run(cli + " run " + (dir / "bad.json").string()) == 2);
  spec = base_spec(dir / "out");
  std::ofstream(dir / "good.json") << spec.dump();
  CHECK(run(cli + " run " + (dir / "good.json").string() + " --samples 2 -j 2") == 0);
  CHECK(run(cli + " verify " + (dir / "out").string()) == 0);
  CHECK(run(cli + " report " + (dir / "out").string()) == 0);
  CHECK(run(cli + " plan-eggdrop -n 100 -k 2") == 0);
  int n = 0;
  for (const auto& e : fs::directory_iterator(dir / "out" / "traces")) n += e.path().extension() == ".jsonl";
  CHECK(n == 4);
}
#endif
