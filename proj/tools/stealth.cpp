// stealth: command-line front end for the attack engine.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "stealth/eggdrop.hpp"
#include "stealth/runner.hpp"
#include "stealth/wire.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunFlags {
  std::string config;
  std::optional<std::string> output;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> flagged_budget;
  std::optional<std::int64_t> total_budget;
  std::optional<double> target_distance;
  std::optional<std::int64_t> samples;
  std::optional<std::uint64_t> sample_seed;
  std::optional<std::string> grid;
  std::vector<std::string> attacks;
};

int do_run(const RunFlags& f) {
  json j;
  try {
    std::ifstream is(f.config);
    if (!is) throw stealth::SpecError("cannot open config " + f.config);
    j = json::parse(is);
    if (f.output) j["output"] = fs::absolute(*f.output).string();
    if (f.workers) j["workers"] = *f.workers;
    if (f.seed) j["seed"] = *f.seed;
    if (f.flagged_budget) j["flagged_budget"] = *f.flagged_budget;
    if (f.total_budget) j["total_budget"] = *f.total_budget;
    if (f.target_distance) j["target_distance"] = *f.target_distance;
    if (f.samples || f.sample_seed) {
      json& r = j["samples"]["random"];
      if (f.samples) r["count"] = *f.samples;
      if (f.sample_seed) r["seed"] = *f.sample_seed;
      j["samples"].erase("file");
    }
    if (f.grid) j["oracle"]["grid"] = *f.grid;
    if (!f.attacks.empty()) j["attacks"] = f.attacks;
    const auto spec = stealth::parse_run_spec(j, fs::path(f.config).parent_path());
    const auto result = stealth::run_spec(spec, std::cout);
    std::cout << result.succeeded << " runs succeeded, " << result.failed << " failed; output in "
              << spec.output.string() << '\n';
    return result.exit_code;
  } catch (const stealth::ParameterError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return 2;
  }
}

int do_verify(const std::string& dir) {
  const auto rep = stealth::verify_dir(dir);
  int bad = 0;
  for (const auto& fc : rep.files) {
    if (fc.issues.empty()) {
      std::cout << "ok    " << fc.file << '\n';
      continue;
    }
    ++bad;
    for (const auto& i : fc.issues) std::cout << "FAIL  " << fc.file << ": " << i << '\n';
  }
  std::cout << rep.files.size() - bad << '/' << rep.files.size() << " files pass\n";
  return rep.ok() ? 0 : 1;
}

int do_plan(const std::vector<std::int64_t>& floors, int max_eggs, bool schedule) {
  std::cout << "floors,eggs,worst_case_trials" << (schedule ? ",first_probe_schedule" : "") << '\n';
  for (auto n : floors) {
    for (int k = 1; k <= max_eggs; ++k) {
      const auto plan = stealth::egg_drop_plan(n, k);
      std::cout << n << ',' << k << ',' << plan.worst_case_trials;
      if (schedule) {
        std::cout << ',';
        for (std::size_t i = 0; i < plan.first_probe_schedule.size(); ++i) {
          std::cout << (i ? " " : "") << plan.first_probe_schedule[i];
        }
      }
      std::cout << '\n';
    }
  }
  return 0;
}

stealth::OracleServer* g_server = nullptr;

int do_serve(const std::string& oracle_json, const std::string& host, int port) {
  const json spec = json::parse(oracle_json);
  if (spec.value("kind", "") == "remote") throw stealth::ParameterError("serve-synthetic cannot serve a remote oracle");
  auto oracle = stealth::make_oracle(spec, fs::current_path());
  stealth::OracleServer server(*oracle, static_cast<std::uint16_t>(port), host);
  g_server = &server;
  std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
  std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
  std::cout << "listening on " << host << ':' << server.port() << std::endl;
  server.serve_forever();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decision-based attack engine with flagged-query accounting"};
  app.require_subcommand(1);

  RunFlags rf;
  auto* run = app.add_subcommand("run", "Run an attack matrix from a JSON config");
  run->add_option("config", rf.config, "Run spec (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", rf.output, "Output directory (overrides \"output\")");
  run->add_option("-j,--workers", rf.workers, "Worker threads (overrides \"workers\")")->check(CLI::PositiveNumber);
  run->add_option("--seed", rf.seed, "Base seed for per-run RNG streams (overrides \"seed\")");
  run->add_option("--flagged-budget", rf.flagged_budget, "Flagged-query budget per run");
  run->add_option("--total-budget", rf.total_budget, "Total-query budget per run");
  run->add_option("--target-distance", rf.target_distance, "Stop a run once this distance is reached");
  run->add_option("--samples", rf.samples, "Number of random flagged samples (replaces \"samples\")");
  run->add_option("--sample-seed", rf.sample_seed, "Seed for random samples");
  run->add_option("--grid", rf.grid, "Oracle quantization grid, e.g. 1/255");
  run->add_option("--attack", rf.attacks, "Attack name; repeat to replace the attack list");

  std::string verify_dir;
  auto* verify = app.add_subcommand("verify", "Re-check trace invariants and final points");
  verify->add_option("dir", verify_dir, "Run output directory")->required()->check(CLI::ExistingDirectory);

  std::string report_dir;
  auto* report = app.add_subcommand("report", "Regenerate curves.csv, costs.csv and accounts.csv from traces");
  report->add_option("dir", report_dir, "Run output directory")->required()->check(CLI::ExistingDirectory);

  std::vector<std::int64_t> floors{10, 100, 1000, 10000};
  int eggs = 4;
  bool schedule = false;
  auto* plan = app.add_subcommand("plan-eggdrop", "Print worst-case probe counts for k-stage searches");
  plan->add_option("-n,--floors", floors, "Floor counts")->check(CLI::PositiveNumber);
  plan->add_option("-k,--eggs", eggs, "Largest egg count")->check(CLI::PositiveNumber);
  plan->add_flag("--schedule", schedule, "Also print the first-egg probe schedule");

  std::string oracle_json = R"({"kind":"linear","dim":100,"seed":7,"margin":0.3})";
  std::string host = "127.0.0.1";
  int port = 0;
  auto* serve = app.add_subcommand("serve-synthetic", "Serve a synthetic oracle over the wire protocol");
  serve->add_option("--oracle", oracle_json, "Oracle spec as JSON")->capture_default_str();
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port, "0 picks a free port")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return do_run(rf);
    if (*verify) return do_verify(verify_dir);
    if (*report) {
      stealth::write_reports(report_dir, std::cout);
      return 0;
    }
    if (*plan) return do_plan(floors, eggs, schedule);
    if (*serve) return do_serve(oracle_json, host, port);
  } catch (const stealth::ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
