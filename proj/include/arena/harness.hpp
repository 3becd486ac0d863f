#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "arena/analysis.hpp"
#include "arena/selfplay.hpp"

namespace arena {

// Config file I/O: flat `key = value` lines with dotted namespaces,
// '#' comments. Unknown keys and invalid values are hard errors;
// unspecified keys keep the documented defaults.
TrainConfig parse_config_text(const std::string& text);
TrainConfig load_config_file(const std::filesystem::path& path);
std::string save_config_text(const TrainConfig& config);
void set_config_key(TrainConfig& config, const std::string& key, const std::string& value);
std::uint64_t config_hash(const TrainConfig& config);

struct SweepAxis {
  std::string key;                  // must name an existing config key
  std::vector<std::string> values;  // applied through set_config_key
};

struct SweepSpec {
  std::vector<SweepAxis> axes;
  std::vector<std::uint64_t> seeds;  // empty: base config seed only
  int steps_override = 0;            // 0: keep base config steps
  int budget = 64;                   // max cells (value combinations x seeds)
};

SweepSpec parse_sweep_spec_text(const std::string& text);
SweepSpec load_sweep_spec_file(const std::filesystem::path& path);

// Run directory contents written by the train command.
struct RunDir {
  TrainConfig config;
  Vocabulary vocab;
  PolicyParams challenger;
  PolicyParams solver;
  std::vector<MetricsRow> metrics;
  std::vector<EpisodeRecord> episodes;  // empty unless the run dumped them
  bool has_episodes = false;
};

void write_run_dir(const std::filesystem::path& dir, const TrainConfig& config,
                   const TrainResult& result,
                   const std::vector<std::pair<std::string, std::string>>& sweep_axes = {},
                   const std::string& started = "");
RunDir load_run_dir(const std::filesystem::path& dir);

// Final-reporting-window aggregation over metrics rows (the ablation-table
// window). Rows without valid episodes are skipped; win_rate here is the
// fraction of included rows with r_true > r_false.
struct WindowSummary {
  double r_true = 0.0;
  double r_false = 0.0;
  double win_rate = 0.0;
  double solver_win_rate = 0.0;  // mean decision-accuracy win rate, for reference
  int rows_used = 0;
};
WindowSummary final_window_summary(const std::vector<MetricsRow>& metrics, int window = 100);

// Command-level entry points (also used by tests in-process).
struct TrainCommand {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> steps;
  std::optional<int> threads;
  std::string out_dir;
};
int run_train_command(const TrainCommand& cmd);

struct SweepCommand {
  std::optional<std::string> config_path;
  std::string sweep_spec_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> steps;
  std::optional<int> threads;
  std::optional<int> budget;
  std::string out_dir;
};
int run_sweep_command(const SweepCommand& cmd);

struct AnalyzeCommand {
  std::string run_dir;
  std::optional<std::string> out_path;  // default <run>/analysis.json
  int eval_episodes = 5000;
  int buckets = 10;
  std::optional<int> threads;
};
int run_analyze_command(const AnalyzeCommand& cmd);

struct ReportCommand {
  std::string run_dir;                  // a sweep output directory
  std::optional<std::string> out_path;  // default <run>/report.csv
};
int run_report_command(const ReportCommand& cmd);

int run_verify_command(int threads = 1);

// Full CLI: claimarena {train|sweep|analyze|verify|report} [flags].
// Exit codes: 0 success, 1 usage/config error, 2 numerical abort or
// failed verification.
int run_cli(const std::vector<std::string>& args);

}  // namespace arena
