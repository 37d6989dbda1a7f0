#pragma once

#include "ccp/eval.hpp"
#include "ccp/pipeline.hpp"
#include "ccp/series.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace ccp::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
    kSuccess = 0,
    kInputError = 2,
    kFitFailure = 3,
    kInternalError = 4,
};

// ---------------------------------------------------------------------------
// Files

/// One row per time point, one column per dimension, optional header row.
MultiSeries read_csv(const fs::path& path);
MultiSeries parse_csv(const std::string& text);
void write_csv(const fs::path& path, const MultiSeries& series);

/// Flat `key = value` file; `#` starts a comment.
std::map<std::string, std::string> read_config_file(const fs::path& path);

/// Applies key/value settings named after DetectConfig fields. Unknown keys
/// raise InputError.
void apply_settings(DetectConfig& config, const std::map<std::string, std::string>& settings);

nlohmann::json to_json(const DetectConfig& config);
nlohmann::json to_json(const DetectionReport& report);

nlohmann::json to_json(const eval::RunRecord& record);
eval::RunRecord record_from_json(const nlohmann::json& j);

/// Writes text to a temporary sibling and renames it into place.
void write_file_atomic(const fs::path& path, const std::string& text);

// ---------------------------------------------------------------------------
// Commands

/// Runs the detector on a CSV file and writes report.json, statistic.csv,
/// similarity.csv and null.csv into out_dir.
DetectionReport cmd_detect(const fs::path& input, const DetectConfig& config, const fs::path& out_dir);

struct SimulateOptions {
    std::string scenario_id;
    std::size_t reps = 1;
    std::vector<double> eps_train{0.04};
    std::uint64_t seed = 0;
    std::size_t t_wash = 60;
    std::size_t t_train = 120;
    std::size_t r_ensemble = 100;
    std::size_t b_count = bootstrap::kDefaultBootstraps;
};

struct SimulateSummary {
    std::size_t computed = 0;
    std::size_t skipped = 0;
};

/// File name of the record for (scenario, eps, rep).
std::string record_file_name(const std::string& scenario_id, double eps_train, std::size_t rep);

/// Generates and analyzes every (rep, eps) pair, one record file each.
/// Existing record files are kept and not recomputed.
SimulateSummary cmd_simulate(const SimulateOptions& options, const fs::path& out_dir);

/// Loads every *.json record in a directory, sorted by file name.
std::vector<eval::RunRecord> load_records(const fs::path& dir);

struct EvaluateSummary {
    std::vector<fs::path> written;
};

/// Writes ari.csv, error_cdf.csv (change scenarios) and type1.csv (no-change
/// scenarios), keyed by scenario id and eps_train, plus summary.json.
EvaluateSummary cmd_evaluate(const fs::path& records_dir, double q, const std::vector<double>& deltas,
                             const fs::path& out_dir);

/// Parses "0.04,0.08" style lists.
std::vector<double> parse_double_list(const std::string& text);

/// Formats a double with round-trip precision.
std::string format_double(double v);

} // namespace ccp::cli
