#pragma once

// Config-driven experiment runner behind the CLI: builds oracles from a
// spec, runs the (sample x attack) matrix on a worker pool, writes one
// trace per run plus a manifest, and derives reports from the traces.

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stealth/attacks.hpp"
#include "stealth/costlab.hpp"
#include "stealth/errors.hpp"

namespace stealth {

// Spec validation failure; what() lists every problem found.
struct SpecError : ParameterError {
  using ParameterError::ParameterError;
};

/// Builds an oracle from its spec object ("kind": linear | sphere | mlp |
/// remote). Relative paths resolve against base_dir.
std::unique_ptr<DecisionOracle> make_oracle(const nlohmann::json& spec,
                                            const std::filesystem::path& base_dir = {});
/// Parses a grid given as a number or as the string "1/N".
std::optional<double> parse_grid(const nlohmann::json& j);

SearchStrategy parse_strategy(const nlohmann::json& j);
nlohmann::json strategy_to_json(const SearchStrategy& s);

struct AttackEntry {
  std::string name;
  std::string label;  // distinguishes several configs of one attack
  AttackConfig cfg;
};

struct ReportSettings {
  std::vector<std::int64_t> budgets;  // curve budgets; empty = log-spaced to the max
  std::vector<CostModel> cost_models;
  std::optional<double> target_distance;  // empty = reachable by every attack
  ModerationPolicy moderation;
};

struct RunSpec {
  nlohmann::json source;  // the spec as given, for the manifest
  nlohmann::json oracle;
  std::vector<AttackEntry> attacks;
  std::optional<std::int64_t> random_count;
  std::uint64_t sample_seed = 0;
  std::filesystem::path points_file;
  std::filesystem::path output;
  std::filesystem::path base_dir;
  ReportSettings report;
  int workers = 1;
  std::uint64_t seed = 0;
};

/// Throws SpecError listing every invalid field.
RunSpec parse_run_spec(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunSpec load_run_spec(const std::filesystem::path& path);

/// Flagged sample points: rejection-sampled uniformly in the cube (snapped
/// to the grid for quantized oracles) or read from the points file.
std::vector<Point> load_samples(const RunSpec& spec, DecisionOracle& oracle);

std::uint64_t run_seed(std::uint64_t base, std::int64_t sample, std::size_t attack_index);
std::string trace_file_name(const std::string& label, std::int64_t sample);

struct RunResult {
  std::size_t succeeded = 0;
  std::size_t failed = 0;
  int exit_code = 0;
};

RunResult run_spec(const RunSpec& spec, std::ostream& log);

struct FileCheck {
  std::string file;
  std::vector<std::string> issues;
};

struct VerifyReport {
  std::vector<FileCheck> files;
  bool ok() const;
};

/// Re-checks every trace in dir/traces; re-queries final points when the
/// manifest's oracle is synthetic.
VerifyReport verify_dir(const std::filesystem::path& dir);

/// Recomputes curves.csv, costs.csv and accounts.csv from the traces.
void write_reports(const std::filesystem::path& dir, std::ostream& log);

std::vector<AttackTrace> load_traces(const std::filesystem::path& dir,
                                     std::vector<std::string>* files = nullptr);

}  // namespace stealth
