#include "stealth/trace.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <sstream>

#include <json.hpp>

#include "stealth/errors.hpp"

namespace stealth {

using nlohmann::json;

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::FlaggedBudget: return "flagged_budget";
    case StopReason::TotalBudget: return "total_budget";
    case StopReason::TargetDistance: return "target_distance";
    case StopReason::Converged: return "converged";
    case StopReason::Failed: return "failed";
  }
  return "?";
}

StopReason stop_reason_from_string(const std::string& s) {
  for (auto r : {StopReason::FlaggedBudget, StopReason::TotalBudget, StopReason::TargetDistance,
                 StopReason::Converged, StopReason::Failed}) {
    if (s == to_string(r)) return r;
  }
  throw ParameterError("unknown stop reason: " + s);
}

bool AttackTrace::record(std::int64_t f, std::int64_t t, double d) {
  if (!events.empty() && !(d < events.back().d)) return false;
  events.push_back({f, t, d});
  return true;
}

std::optional<double> AttackTrace::best() const {
  if (events.empty()) return std::nullopt;
  return events.back().d;
}

namespace {

json ledger_json(const QueryLedger& l) {
  json phases = json::object();
  for (std::size_t i = 0; i < kPhaseCount; ++i) {
    phases[to_string(static_cast<Phase>(i))] = {{"total", l.by_phase[i].total},
                                                {"flagged", l.by_phase[i].flagged}};
  }
  return {{"total", l.total}, {"flagged", l.flagged}, {"phases", phases}};
}

QueryLedger ledger_from(const json& j) {
  QueryLedger l;
  l.total = j.at("total").get<std::int64_t>();
  l.flagged = j.at("flagged").get<std::int64_t>();
  const auto& ph = j.at("phases");
  for (std::size_t i = 0; i < kPhaseCount; ++i) {
    const auto& c = ph.at(to_string(static_cast<Phase>(i)));
    l.by_phase[i].total = c.at("total").get<std::int64_t>();
    l.by_phase[i].flagged = c.at("flagged").get<std::int64_t>();
  }
  return l;
}

json tally_json(const PrimitiveTally& t) {
  return {{"check_adv_calls", t.check_adv_calls},   {"check_adv_queries", t.check_adv_queries},
          {"check_adv_flagged", t.check_adv_flagged}, {"get_dist_calls", t.get_dist_calls},
          {"get_dist_queries", t.get_dist_queries},  {"get_dist_flagged", t.get_dist_flagged}};
}

PrimitiveTally tally_from(const json& j) {
  PrimitiveTally t;
  t.check_adv_calls = j.at("check_adv_calls").get<std::int64_t>();
  t.check_adv_queries = j.at("check_adv_queries").get<std::int64_t>();
  t.check_adv_flagged = j.at("check_adv_flagged").get<std::int64_t>();
  t.get_dist_calls = j.at("get_dist_calls").get<std::int64_t>();
  t.get_dist_queries = j.at("get_dist_queries").get<std::int64_t>();
  t.get_dist_flagged = j.at("get_dist_flagged").get<std::int64_t>();
  return t;
}

}  // namespace

std::string trace_to_jsonl(const AttackTrace& tr) {
  std::string out;
  const auto& h = tr.header;
  json oracle = {{"dim", h.oracle.dimension},
                 {"grid", h.oracle.quantization_grid ? json(*h.oracle.quantization_grid) : json()},
                 {"protocol_version", h.oracle.protocol_version}};
  if (!h.oracle_spec.empty()) oracle["spec"] = h.oracle_spec;
  json header = {{"type", "header"},  {"attack", h.attack}, {"config_digest", h.config_digest},
                 {"oracle", oracle}, {"seed", h.seed},      {"sample", h.sample}};
  if (!h.label.empty()) header["label"] = h.label;
  out += header.dump() + '\n';
  for (const auto& e : tr.events) {
    json ev = {{"f", e.f}, {"t", e.t}, {"d", e.d}};
    out += ev.dump() + '\n';
  }
  const auto& s = tr.summary;
  json summary = {{"type", "summary"},
                  {"stop_reason", to_string(s.stop_reason)},
                  {"flagged", s.ledger.flagged},
                  {"total", s.ledger.total},
                  {"best_distance", s.best_distance ? json(*s.best_distance) : json()},
                  {"x_adv", s.x_adv},
                  {"iterations", s.iterations},
                  {"ledger", ledger_json(s.ledger)},
                  {"primitives", tally_json(s.tally)}};
  if (!s.error.empty()) summary["error"] = s.error;
  out += summary.dump() + '\n';
  return out;
}

AttackTrace trace_from_jsonl(std::istream& in) {
  AttackTrace tr;
  std::string line;
  int lineno = 0;
  bool have_header = false, have_summary = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ProtocolError("trace line " + std::to_string(lineno) + " is not JSON", line);
    }
    try {
      if (j.contains("type") && j["type"] == "header") {
        auto& h = tr.header;
        h.attack = j.at("attack").get<std::string>();
        if (j.contains("label")) h.label = j["label"].get<std::string>();
        h.config_digest = j.at("config_digest").get<std::string>();
        const auto& o = j.at("oracle");
        h.oracle.dimension = o.at("dim").get<std::size_t>();
        if (!o.at("grid").is_null()) h.oracle.quantization_grid = o["grid"].get<double>();
        h.oracle.protocol_version = o.at("protocol_version").get<int>();
        if (o.contains("spec")) h.oracle_spec = o["spec"].get<std::string>();
        h.seed = j.at("seed").get<std::uint64_t>();
        h.sample = j.at("sample").get<std::int64_t>();
        have_header = true;
      } else if (j.contains("type") && j["type"] == "summary") {
        auto& s = tr.summary;
        s.stop_reason = stop_reason_from_string(j.at("stop_reason").get<std::string>());
        s.ledger = ledger_from(j.at("ledger"));
        s.tally = tally_from(j.at("primitives"));
        if (!j.at("best_distance").is_null()) s.best_distance = j["best_distance"].get<double>();
        s.x_adv = j.at("x_adv").get<Point>();
        s.iterations = j.at("iterations").get<std::int64_t>();
        if (j.contains("error")) s.error = j["error"].get<std::string>();
        have_summary = true;
      } else {
        tr.events.push_back(
            {j.at("f").get<std::int64_t>(), j.at("t").get<std::int64_t>(), j.at("d").get<double>()});
      }
    } catch (const json::exception& e) {
      throw ProtocolError("trace line " + std::to_string(lineno) + ": " + e.what(), line);
    }
  }
  if (!have_header) throw ProtocolError("trace has no header record", "");
  if (!have_summary) throw ProtocolError("trace has no summary record", "");
  return tr;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << content;
    if (!os.flush()) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_trace_file(const std::filesystem::path& path, const AttackTrace& trace) {
  write_file_atomic(path, trace_to_jsonl(trace));
}

AttackTrace read_trace_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return trace_from_jsonl(is);
}

std::vector<std::string> check_trace(const AttackTrace& tr) {
  std::vector<std::string> issues;
  auto issue = [&](const std::string& s) { issues.push_back(s); };
  for (std::size_t i = 0; i < tr.events.size(); ++i) {
    const auto& e = tr.events[i];
    const std::string at = "event " + std::to_string(i) + ": ";
    if (e.f > e.t) issue(at + "flagged exceeds total");
    if (e.f < 0 || e.t < 0) issue(at + "negative counter");
    if (!std::isfinite(e.d) || e.d < 0) issue(at + "distance not finite and non-negative");
    if (i > 0) {
      const auto& p = tr.events[i - 1];
      if (e.f < p.f || e.t < p.t) issue(at + "counters decrease");
      if (e.d > p.d) issue(at + "best distance increases");
    }
  }
  const auto& s = tr.summary;
  if (!s.ledger.consistent()) issue("summary: per-phase counts do not sum to totals");
  if (s.ledger.flagged > s.ledger.total) issue("summary: flagged exceeds total");
  const auto& t = s.tally;
  if (t.check_adv_queries + t.get_dist_queries != s.ledger.total ||
      t.check_adv_flagged + t.get_dist_flagged != s.ledger.flagged) {
    issue("summary: primitive tallies do not match the ledger");
  }
  if (!tr.events.empty()) {
    const auto& last = tr.events.back();
    if (last.f > s.ledger.flagged || last.t > s.ledger.total) {
      issue("summary: last event counts exceed the ledger");
    }
    if (!s.best_distance || *s.best_distance != last.d) {
      issue("summary: best distance differs from the last event");
    }
    if (s.x_adv.empty()) issue("summary: no adversarial point for a recorded distance");
  } else if (s.best_distance) {
    issue("summary: best distance without events");
  }
  if (!s.x_adv.empty() && tr.header.oracle.dimension != 0 &&
      s.x_adv.size() != tr.header.oracle.dimension) {
    issue("summary: adversarial point has the wrong dimension");
  }
  return issues;
}

std::string fnv1a64_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace stealth
