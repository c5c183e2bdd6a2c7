#pragma once

// Attack traces: the (flagged, total, best distance) time series of a run,
// plus a header identifying the run and a summary of how it ended.
// Persisted as JSON lines: header, one line per event, summary.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stealth/oracle.hpp"

namespace stealth {

struct TraceEvent {
  std::int64_t f = 0;  // flagged queries so far
  std::int64_t t = 0;  // total queries so far
  double d = 0.0;      // best distance so far
  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

enum class StopReason { FlaggedBudget, TotalBudget, TargetDistance, Converged, Failed };
const char* to_string(StopReason r);
StopReason stop_reason_from_string(const std::string& s);

// Queries issued through each primitive. Every ledger query belongs to
// exactly one of the two.
struct PrimitiveTally {
  std::int64_t check_adv_calls = 0;
  std::int64_t check_adv_queries = 0;
  std::int64_t check_adv_flagged = 0;
  std::int64_t get_dist_calls = 0;
  std::int64_t get_dist_queries = 0;
  std::int64_t get_dist_flagged = 0;
  friend bool operator==(const PrimitiveTally&, const PrimitiveTally&) = default;
};

struct TraceHeader {
  std::string attack;
  std::string label;  // run-matrix label when it differs from the attack name
  std::string config_digest;
  OracleDescriptor oracle;
  std::string oracle_spec;  // free-form oracle identification, may be empty
  std::uint64_t seed = 0;
  std::int64_t sample = 0;
};

struct TraceSummary {
  StopReason stop_reason = StopReason::Failed;
  QueryLedger ledger;
  PrimitiveTally tally;
  std::optional<double> best_distance;
  Point x_adv;  // empty when the run never found a safe point
  std::int64_t iterations = 0;
  std::string error;
};

struct AttackTrace {
  TraceHeader header;
  const std::string& group() const { return header.label.empty() ? header.attack : header.label; }
  std::vector<TraceEvent> events;
  TraceSummary summary;

  /// Appends an event when d improves on the last recorded distance.
  bool record(std::int64_t f, std::int64_t t, double d);
  std::optional<double> best() const;
};

std::string trace_to_jsonl(const AttackTrace& trace);
AttackTrace trace_from_jsonl(std::istream& in);

/// Writes through a temporary file and a rename.
void write_trace_file(const std::filesystem::path& path, const AttackTrace& trace);
AttackTrace read_trace_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Invariant problems found in a trace; empty when it is well formed.
std::vector<std::string> check_trace(const AttackTrace& trace);

std::string fnv1a64_hex(const std::string& s);

}  // namespace stealth
