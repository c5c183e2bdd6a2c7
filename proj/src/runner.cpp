#include "stealth/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "stealth/errors.hpp"
#include "stealth/mlp.hpp"
#include "stealth/wire.hpp"

namespace stealth {

using nlohmann::json;
namespace fs = std::filesystem;

std::optional<double> parse_grid(const json& j) {
  if (j.is_null()) return std::nullopt;
  double g = 0.0;
  if (j.is_number()) {
    g = j.get<double>();
  } else if (j.is_string()) {
    const std::string s = j.get<std::string>();
    const auto slash = s.find('/');
    if (slash == std::string::npos) throw ParameterError("grid must be a number or \"1/N\"");
    g = std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
  } else {
    throw ParameterError("grid must be a number or \"1/N\"");
  }
  (void)grid_levels(g);
  return g;
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

Vec json_vec(const json& j, const char* what) {
  if (!j.is_array()) throw ParameterError(std::string(what) + " must be an array of numbers");
  return j.get<Vec>();
}

}  // namespace

std::unique_ptr<DecisionOracle> make_oracle(const json& spec, const fs::path& base_dir) {
  if (!spec.is_object()) throw ParameterError("oracle spec must be an object");
  const std::string kind = spec.value("kind", "");
  const auto grid = spec.contains("grid") ? parse_grid(spec["grid"]) : std::nullopt;
  if (kind == "linear") {
    Vec w;
    double b = 0.0;
    if (spec.contains("w")) {
      w = json_vec(spec["w"], "oracle.w");
      b = spec.value("b", 0.0);
    } else {
      const int dim = spec.value("dim", 0);
      if (dim < 1) throw ParameterError("linear oracle needs w or dim >= 1");
      std::mt19937_64 rng(spec.value("seed", std::uint64_t{0}));
      w = gaussian_vector(static_cast<std::size_t>(dim), rng);
      // Flagged half-space away from the cube center, which stays safe.
      const double margin = spec.value("margin", 0.3);
      b = -dot(w, Vec(w.size(), 0.5)) - margin * norm(w, NormKind::L2);
    }
    return std::make_unique<LinearOracle>(std::move(w), b, spec.value("flag_positive", true), grid);
  }
  if (kind == "sphere") {
    Point center;
    if (spec.contains("center")) {
      center = json_vec(spec["center"], "oracle.center");
    } else {
      const int dim = spec.value("dim", 0);
      if (dim < 1) throw ParameterError("sphere oracle needs center or dim >= 1");
      center.assign(static_cast<std::size_t>(dim), 0.5);
    }
    if (!spec.contains("radius")) throw ParameterError("sphere oracle needs a radius");
    return std::make_unique<SphereOracle>(std::move(center), spec["radius"].get<double>(),
                                          spec.value("flagged_inside", true), grid);
  }
  if (kind == "mlp") {
    if (!spec.contains("path")) throw ParameterError("mlp oracle needs a path");
    return std::make_unique<MlpOracle>(load_mlp(resolve(base_dir, spec["path"].get<std::string>()).string()),
                                       grid);
  }
  if (kind == "remote") {
    if (!spec.contains("endpoint")) throw ParameterError("remote oracle needs an endpoint");
    auto conn = connect_remote(Endpoint::parse(spec["endpoint"].get<std::string>()));
    return std::move(conn.oracle);
  }
  throw ParameterError("oracle kind must be one of linear, sphere, mlp, remote; got '" + kind + "'");
}

SearchStrategy parse_strategy(const json& j) {
  const std::string kind = j.value("kind", "");
  SearchStrategy s;
  if (kind == "binary") {
    s = SearchStrategy::binary(j.value("resolution", 1e-3), j.value("absolute", false));
  } else if (kind == "line") {
    s = SearchStrategy::line(j.value("resolution", 1e-3), j.value("absolute", false));
  } else if (kind == "kstage") {
    const std::string sched = j.value("schedule", "uniform");
    if (sched != "uniform" && sched != "dp") throw ParameterError("schedule must be uniform or dp");
    s = SearchStrategy::kstage(j.value("stages", 2), j.value("subintervals", std::int64_t{10000}),
                               sched == "dp" ? Schedule::DpOptimal : Schedule::Uniform);
  } else {
    throw ParameterError("strategy kind must be binary, line or kstage; got '" + kind + "'");
  }
  if (j.contains("early_stop") && !j["early_stop"].is_null()) {
    s = s.with_early_stop(j["early_stop"].get<double>());
  }
  return s;
}

json strategy_to_json(const SearchStrategy& s) {
  json j;
  switch (s.kind) {
    case SearchKind::Binary: j["kind"] = "binary"; break;
    case SearchKind::Line: j["kind"] = "line"; break;
    case SearchKind::KStage:
      j["kind"] = "kstage";
      j["stages"] = s.stages;
      j["subintervals"] = std::llround(1.0 / s.resolution);
      j["schedule"] = s.schedule == Schedule::DpOptimal ? "dp" : "uniform";
      break;
  }
  if (s.kind != SearchKind::KStage) {
    j["resolution"] = s.resolution;
    j["absolute"] = s.absolute;
  }
  if (s.early_stop) j["early_stop"] = *s.early_stop;
  return j;
}

namespace {

// Applies the recognized AttackConfig fields of `j` onto cfg.
void apply_overrides(AttackConfig& cfg, const json& j, std::vector<std::string>& errors,
                     const std::string& where) {
  auto field = [&](const char* name, auto&& apply) {
    if (!j.contains(name)) return;
    try {
      apply(j[name]);
    } catch (const std::exception& e) {
      errors.push_back(where + "." + name + ": " + e.what());
    }
  };
  field("norm", [&](const json& v) { cfg.norm = norm_kind_from_string(v.get<std::string>()); });
  field("flagged_budget", [&](const json& v) { cfg.flagged_budget = v.get<std::int64_t>(); });
  field("total_budget", [&](const json& v) {
    cfg.total_budget = v.is_null() ? std::nullopt : std::optional(v.get<std::int64_t>());
  });
  field("strategy", [&](const json& v) {
    cfg.strategy = v.is_null() ? std::nullopt : std::optional(parse_strategy(v));
  });
  field("grad_samples", [&](const json& v) { cfg.grad_samples = v.get<int>(); });
  field("signopt_shrink", [&](const json& v) { cfg.signopt_shrink = v.get<double>(); });
  field("safe_start", [&](const json& v) { cfg.safe_start = v.get<double>(); });
  field("rays_early_stop", [&](const json& v) { cfg.rays_early_stop = v.get<double>(); });
  field("early_stop", [&](const json& v) { cfg.early_stop = v.get<bool>(); });
  field("n_init", [&](const json& v) { cfg.n_init = v.get<int>(); });
  field("target_distance", [&](const json& v) {
    cfg.target_distance = v.is_null() ? std::nullopt : std::optional(v.get<double>());
  });
  field("max_iterations", [&](const json& v) { cfg.max_iterations = v.get<std::int64_t>(); });
}

}  // namespace

RunSpec parse_run_spec(const json& j, const fs::path& base_dir) {
  std::vector<std::string> errors;
  RunSpec spec;
  spec.source = j;
  spec.base_dir = base_dir;
  if (!j.is_object()) throw SpecError("run spec must be a JSON object");

  if (!j.contains("oracle") || !j["oracle"].is_object()) {
    errors.push_back("oracle: missing or not an object");
  } else {
    spec.oracle = j["oracle"];
    const std::string kind = spec.oracle.value("kind", "");
    static const std::set<std::string> kinds = {"linear", "sphere", "mlp", "remote"};
    if (!kinds.count(kind)) errors.push_back("oracle.kind: must be linear, sphere, mlp or remote");
    if (spec.oracle.contains("grid")) {
      try {
        (void)parse_grid(spec.oracle["grid"]);
      } catch (const std::exception& e) {
        errors.push_back(std::string("oracle.grid: ") + e.what());
      }
    }
  }

  spec.seed = j.value("seed", std::uint64_t{0});
  spec.workers = j.value("workers", 1);
  if (spec.workers < 1) errors.push_back("workers: must be >= 1");

  AttackConfig defaults;
  apply_overrides(defaults, j, errors, "spec");

  if (!j.contains("attacks") || !j["attacks"].is_array() || j["attacks"].empty()) {
    errors.push_back("attacks: must be a non-empty array");
  } else {
    std::set<std::string> labels;
    for (std::size_t i = 0; i < j["attacks"].size(); ++i) {
      const json& a = j["attacks"][i];
      const std::string where = "attacks[" + std::to_string(i) + "]";
      AttackEntry e;
      e.cfg = defaults;
      if (a.is_string()) {
        e.name = a.get<std::string>();
      } else if (a.is_object() && a.contains("name")) {
        e.name = a["name"].get<std::string>();
        apply_overrides(e.cfg, a, errors, where);
        if (a.contains("label")) e.label = a["label"].get<std::string>();
      } else {
        errors.push_back(where + ": must be a name or an object with a name");
        continue;
      }
      if (e.label.empty()) e.label = e.name;
      try {
        const AttackInfo& info = find_attack(e.name);
        if (!(a.is_object() && a.contains("norm"))) e.cfg.norm = info.norms.front();
        if (std::find(info.norms.begin(), info.norms.end(), e.cfg.norm) == info.norms.end()) {
          errors.push_back(where + ": " + e.name + " does not support norm " + to_string(e.cfg.norm));
        }
      } catch (const ParameterError& ex) {
        errors.push_back(where + ": " + ex.what());
      }
      try {
        e.cfg.validate();
      } catch (const std::exception& ex) {
        errors.push_back(where + ": " + ex.what());
      }
      if (!labels.insert(e.label).second) errors.push_back(where + ": duplicate label " + e.label);
      spec.attacks.push_back(std::move(e));
    }
  }

  if (!j.contains("samples") || !j["samples"].is_object()) {
    errors.push_back("samples: missing or not an object");
  } else {
    const json& s = j["samples"];
    if (s.contains("random")) {
      spec.random_count = s["random"].value("count", std::int64_t{0});
      spec.sample_seed = s["random"].value("seed", std::uint64_t{0});
      if (*spec.random_count < 1) errors.push_back("samples.random.count: must be >= 1");
    } else if (s.contains("file")) {
      spec.points_file = resolve(base_dir, s["file"].get<std::string>());
    } else {
      errors.push_back("samples: needs random {count, seed} or file");
    }
  }

  if (!j.contains("output") || !j["output"].is_string()) {
    errors.push_back("output: missing output directory");
  } else {
    spec.output = resolve(base_dir, j["output"].get<std::string>());
  }

  const json rep = j.value("report", json::object());
  try {
    if (rep.contains("budgets")) {
      spec.report.budgets = rep["budgets"].get<std::vector<std::int64_t>>();
      if (!std::is_sorted(spec.report.budgets.begin(), spec.report.budgets.end())) {
        errors.push_back("report.budgets: must be sorted ascending");
      }
    }
    if (rep.contains("cost_models")) {
      for (const auto& m : rep["cost_models"]) {
        CostModel cm{m.value("c0", 0.0), m.value("c_flagged", 1.0)};
        cm.validate();
        spec.report.cost_models.push_back(cm);
      }
    } else {
      spec.report.cost_models = {{0.0, 1.0}, {1e-3, 1.0}, {1.0, 1.0}};
    }
    if (rep.contains("target_distance")) spec.report.target_distance = rep["target_distance"].get<double>();
    if (rep.contains("violations_per_account")) {
      spec.report.moderation.violations_per_account = rep["violations_per_account"].get<std::int64_t>();
    }
    if (rep.contains("benign_limit_per_account")) {
      spec.report.moderation.benign_limit_per_account = rep["benign_limit_per_account"].get<std::int64_t>();
    }
    spec.report.moderation.validate();
  } catch (const std::exception& e) {
    errors.push_back(std::string("report: ") + e.what());
  }

  if (!errors.empty()) {
    std::string msg = "invalid run spec:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw SpecError(msg);
  }
  return spec;
}

RunSpec load_run_spec(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw SpecError("cannot open spec file " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw SpecError(std::string("spec is not valid JSON: ") + e.what());
  }
  return parse_run_spec(j, path.parent_path());
}

std::vector<Point> load_samples(const RunSpec& spec, DecisionOracle& oracle) {
  const OracleDescriptor desc = oracle.descriptor();
  std::vector<Point> out;
  if (spec.random_count) {
    std::mt19937_64 rng(spec.sample_seed);
    constexpr std::int64_t kMaxDraws = 1000000;
    for (std::int64_t draws = 0; static_cast<std::int64_t>(out.size()) < *spec.random_count; ++draws) {
      if (draws >= kMaxDraws) throw SpecError("could not draw enough flagged sample points");
      Point p = uniform_vector(desc.dimension, 0.0, 1.0, rng);
      if (desc.quantization_grid) p = quantize(p, *desc.quantization_grid);
      if (oracle.decide(p) == Verdict::Flagged) out.push_back(std::move(p));
    }
    return out;
  }
  std::ifstream is(spec.points_file);
  if (!is) throw SpecError("cannot open points file " + spec.points_file.string());
  json j = json::parse(is);
  if (j.is_object()) j = j.at("points");
  for (const auto& p : j) {
    Point q = p.get<Point>();
    if (q.size() != desc.dimension) throw SpecError("sample point has the wrong dimension");
    out.push_back(std::move(q));
  }
  if (out.empty()) throw SpecError("points file holds no points");
  return out;
}

std::uint64_t run_seed(std::uint64_t base, std::int64_t sample, std::size_t attack_index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(base ^ mix(static_cast<std::uint64_t>(sample))) + attack_index);
}

std::string trace_file_name(const std::string& label, std::int64_t sample) {
  std::ostringstream os;
  os << label << "__" << std::setw(4) << std::setfill('0') << sample << ".jsonl";
  return os.str();
}

RunResult run_spec(const RunSpec& spec, std::ostream& log) {
  auto probe_oracle = make_oracle(spec.oracle, spec.base_dir);
  const OracleDescriptor desc = probe_oracle->descriptor();
  const std::vector<Point> samples = load_samples(spec, *probe_oracle);
  probe_oracle.reset();

  struct Job {
    std::size_t attack;
    std::int64_t sample;
  };
  std::vector<Job> jobs;
  for (std::int64_t s = 0; s < static_cast<std::int64_t>(samples.size()); ++s) {
    for (std::size_t a = 0; a < spec.attacks.size(); ++a) jobs.push_back({a, s});
  }
  struct Outcome {
    std::string status = "ok";
    std::string error;
    std::string file;
    std::uint64_t seed = 0;
    std::string digest;
  };
  std::vector<Outcome> outcomes(jobs.size());
  const fs::path trace_dir = spec.output / "traces";
  fs::create_directories(trace_dir);
  const std::string oracle_text = spec.oracle.dump();

  std::atomic<std::size_t> next{0};
  std::mutex log_mu;
  auto worker = [&] {
    std::unique_ptr<DecisionOracle> oracle;
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& job = jobs[i];
      const AttackEntry& entry = spec.attacks[job.attack];
      Outcome& out = outcomes[i];
      AttackConfig cfg = entry.cfg;
      cfg.rng_seed = run_seed(spec.seed, job.sample, job.attack);
      out.seed = cfg.rng_seed;
      out.digest = fnv1a64_hex(cfg.canonical());
      out.file = trace_file_name(entry.label, job.sample);
      try {
        if (!oracle) oracle = make_oracle(spec.oracle, spec.base_dir);
        AttackTrace tr = find_attack(entry.name).fn(*oracle, samples[static_cast<std::size_t>(job.sample)], cfg);
        tr.header.sample = job.sample;
        tr.header.oracle_spec = oracle_text;
        if (entry.label != entry.name) tr.header.label = entry.label;
        write_trace_file(trace_dir / out.file, tr);
        std::lock_guard<std::mutex> lock(log_mu);
        log << entry.label << " sample " << job.sample << ": best "
            << (tr.summary.best_distance ? std::to_string(*tr.summary.best_distance) : "none")
            << ", flagged " << tr.summary.ledger.flagged << ", total " << tr.summary.ledger.total
            << " (" << to_string(tr.summary.stop_reason) << ")\n";
      } catch (const std::exception& e) {
        out.status = "error";
        out.error = e.what();
        oracle.reset();  // reconnect for the next job
        std::lock_guard<std::mutex> lock(log_mu);
        log << entry.label << " sample " << job.sample << ": error: " << e.what() << '\n';
      }
    }
  };
  std::vector<std::thread> pool;
  const int n = std::max(1, std::min<int>(spec.workers, static_cast<int>(jobs.size())));
  for (int i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  RunResult result;
  json runs = json::array();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& o = outcomes[i];
    json r = {{"attack", spec.attacks[jobs[i].attack].name},
              {"label", spec.attacks[jobs[i].attack].label},
              {"sample", jobs[i].sample},
              {"seed", o.seed},
              {"config_digest", o.digest},
              {"status", o.status}};
    if (o.status == "ok") {
      r["file"] = "traces/" + o.file;
      ++result.succeeded;
    } else {
      r["error"] = o.error;
      ++result.failed;
    }
    runs.push_back(r);
  }
  json report = {{"budgets", spec.report.budgets},
                 {"target_distance", spec.report.target_distance ? json(*spec.report.target_distance) : json()},
                 {"violations_per_account", spec.report.moderation.violations_per_account}};
  if (spec.report.moderation.benign_limit_per_account) {
    report["benign_limit_per_account"] = *spec.report.moderation.benign_limit_per_account;
  }
  json models = json::array();
  for (const auto& m : spec.report.cost_models) models.push_back({{"c0", m.c0}, {"c_flagged", m.c_flagged}});
  report["cost_models"] = models;
  json manifest = {{"spec", spec.source},
                   {"spec_digest", fnv1a64_hex(spec.source.dump())},
                   {"oracle", spec.oracle},
                   {"dimension", desc.dimension},
                   {"base_dir", fs::absolute(spec.base_dir.empty() ? fs::current_path() : spec.base_dir).string()},
                   {"report", report},
                   {"runs", runs}};
  write_file_atomic(spec.output / "manifest.json", manifest.dump(2) + "\n");
  if (result.succeeded > 0) write_reports(spec.output, log);
  result.exit_code = result.succeeded == 0 ? 1 : 0;
  return result;
}

bool VerifyReport::ok() const {
  return std::all_of(files.begin(), files.end(), [](const FileCheck& f) { return f.issues.empty(); });
}

namespace {

json read_manifest(const fs::path& dir) {
  std::ifstream is(dir / "manifest.json");
  if (!is) return json();
  try {
    return json::parse(is);
  } catch (const json::exception&) {
    return json();
  }
}

std::vector<fs::path> trace_paths(const fs::path& dir) {
  std::vector<fs::path> out;
  const fs::path td = dir / "traces";
  if (!fs::is_directory(td)) return out;
  for (const auto& e : fs::directory_iterator(td)) {
    if (e.path().extension() == ".jsonl") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

VerifyReport verify_dir(const fs::path& dir) {
  VerifyReport rep;
  const json manifest = read_manifest(dir);
  std::unique_ptr<DecisionOracle> oracle;
  if (manifest.is_object() && manifest.contains("oracle") &&
      manifest["oracle"].value("kind", "") != "remote") {
    try {
      oracle = make_oracle(manifest["oracle"], manifest.value("base_dir", std::string()));
    } catch (const std::exception& e) {
      rep.files.push_back({"manifest.json", {std::string("cannot rebuild oracle: ") + e.what()}});
    }
  }
  const auto paths = trace_paths(dir);
  if (paths.empty()) rep.files.push_back({(dir / "traces").string(), {"no trace files"}});
  for (const auto& p : paths) {
    FileCheck fc{p.filename().string(), {}};
    try {
      const AttackTrace tr = read_trace_file(p);
      fc.issues = check_trace(tr);
      if (oracle && !tr.summary.x_adv.empty()) {
        if (tr.summary.x_adv.size() != oracle->descriptor().dimension) {
          fc.issues.push_back("final point has the wrong dimension for the oracle");
        } else {
          if (oracle->decide(tr.summary.x_adv) != Verdict::Safe) {
            fc.issues.push_back("final adversarial point re-queries flagged");
          }
        }
      }
    } catch (const std::exception& e) {
      fc.issues.push_back(std::string("unreadable: ") + e.what());
    }
    rep.files.push_back(std::move(fc));
  }
  return rep;
}

std::vector<AttackTrace> load_traces(const fs::path& dir, std::vector<std::string>* files) {
  std::vector<AttackTrace> out;
  for (const auto& p : trace_paths(dir)) {
    out.push_back(read_trace_file(p));
    if (files) files->push_back(p.filename().string());
  }
  return out;
}

void write_reports(const fs::path& dir, std::ostream& log) {
  const json manifest = read_manifest(dir);
  ReportSettings rs;
  if (manifest.is_object() && manifest.contains("report")) {
    const json& r = manifest["report"];
    rs.budgets = r.value("budgets", std::vector<std::int64_t>{});
    if (r.contains("target_distance") && !r["target_distance"].is_null()) {
      rs.target_distance = r["target_distance"].get<double>();
    }
    rs.moderation.violations_per_account = r.value("violations_per_account", std::int64_t{7});
    if (r.contains("benign_limit_per_account")) {
      rs.moderation.benign_limit_per_account = r["benign_limit_per_account"].get<std::int64_t>();
    }
    for (const auto& m : r.value("cost_models", json::array())) {
      rs.cost_models.push_back({m.value("c0", 0.0), m.value("c_flagged", 1.0)});
    }
  }
  if (rs.cost_models.empty()) rs.cost_models = {{0.0, 1.0}, {1e-3, 1.0}, {1.0, 1.0}};

  std::vector<std::string> files;
  const auto traces = load_traces(dir, &files);
  if (traces.empty()) throw std::runtime_error("no traces under " + (dir / "traces").string());

  std::map<std::string, std::vector<AttackTrace>> groups;
  std::int64_t max_flagged = 1;
  for (const auto& t : traces) {
    groups[t.group()].push_back(t);
    max_flagged = std::max(max_flagged, t.summary.ledger.flagged);
  }
  const std::vector<std::int64_t> budgets =
      rs.budgets.empty() ? log_budgets(max_flagged) : rs.budgets;

  std::map<std::string, std::vector<CurvePoint>> curves, dense;
  for (const auto& [label, trs] : groups) {
    curves[label] = median_curve(trs, budgets);
    // Every flagged count where some median can change.
    std::set<std::int64_t> fs_set{0};
    for (const auto& t : trs) {
      for (const auto& e : t.events) fs_set.insert(e.f);
    }
    dense[label] = median_curve(trs, std::vector<std::int64_t>(fs_set.begin(), fs_set.end()));
  }

  double target = 0.0;
  if (rs.target_distance) {
    target = *rs.target_distance;
  } else {
    // Largest final median: every attack reaches it.
    for (const auto& [label, c] : dense) target = std::max(target, c.back().median);
  }

  std::ostringstream curves_csv, costs_csv, accounts_csv;
  write_curve_csv(curves_csv, curves);
  std::vector<CostRow> rows;
  for (const auto& m : rs.cost_models) {
    for (const auto& e : cost_frontier(dense, m, target)) rows.push_back({e.attack, m, e.cost});
  }
  write_cost_csv(costs_csv, rows);
  accounts_csv << "attack,sample,flagged,total,accounts\n";
  for (const auto& t : traces) {
    accounts_csv << t.group() << ',' << t.header.sample << ',' << t.summary.ledger.flagged << ','
                 << t.summary.ledger.total << ','
                 << accounts_needed(t.summary.ledger.total, t.summary.ledger.flagged, rs.moderation)
                 << '\n';
  }
  write_file_atomic(dir / "curves.csv", curves_csv.str());
  write_file_atomic(dir / "costs.csv", costs_csv.str());
  write_file_atomic(dir / "accounts.csv", accounts_csv.str());
  log << "reports: " << groups.size() << " attack groups, " << traces.size()
      << " traces, cost target " << target << '\n';
}

}  // namespace stealth
