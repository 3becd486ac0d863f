#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "arena/analysis.hpp"
#include "arena/harness.hpp"
#include "arena/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace arena {

namespace {

constexpr const char* kRunSchema = "arena-run/1";
constexpr const char* kSweepSchema = "arena-sweep/1";
constexpr const char* kAnalysisSchema = "arena-analysis/1";
constexpr int kCurriculumWindow = 25;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_now() {
  // Wall-clock provenance only; every data file is independent of it.
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path.string());
  out << content;
  if (!out) throw ConfigError("write failed: " + path.string());
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string metrics_to_jsonl(const std::vector<MetricsRow>& metrics) {
  std::string out;
  for (const MetricsRow& row : metrics) {
    out += row.to_json().dump();
    out += '\n';
  }
  return out;
}

std::vector<MetricsRow> metrics_from_jsonl(const std::string& text) {
  std::vector<MetricsRow> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(MetricsRow::from_json(json::parse(line)));
  }
  return rows;
}

std::string sanitize_path_component(std::string s) {
  for (char& c : s) {
    if (c == '.' || c == '/' || c == '\\' || c == ' ') c = '_';
  }
  return s;
}

int resolve_override_threads(const std::optional<int>& from_cmd, int from_config) {
  return from_cmd.has_value() ? *from_cmd : from_config;
}

// Exception-to-exit-code policy shared by every subcommand: bad input is 1,
// numerical trouble (or anything unexpected) is 2.
int guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "config error: malformed JSON: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

TrainConfig load_base_config(const std::optional<std::string>& config_path) {
  return config_path.has_value() ? load_config_file(*config_path) : TrainConfig{};
}

}  // namespace

WindowSummary final_window_summary(const std::vector<MetricsRow>& metrics, int window) {
  if (window < 1) throw ConfigError("summary window must be >= 1");
  WindowSummary s;
  const std::size_t n = metrics.size();
  const std::size_t begin = n > static_cast<std::size_t>(window) ? n - window : 0;
  int wins = 0;
  for (std::size_t i = begin; i < n; ++i) {
    const MetricsRow& row = metrics[i];
    if (row.n_valid == 0) continue;
    s.r_true += row.r_true;
    s.r_false += row.r_false;
    s.solver_win_rate += row.solver_win_rate;
    if (row.r_true > row.r_false) ++wins;
    ++s.rows_used;
  }
  if (s.rows_used > 0) {
    s.r_true /= s.rows_used;
    s.r_false /= s.rows_used;
    s.solver_win_rate /= s.rows_used;
    s.win_rate = static_cast<double>(wins) / s.rows_used;
  }
  return s;
}

void write_run_dir(const fs::path& dir, const TrainConfig& config, const TrainResult& result,
                   const std::vector<std::pair<std::string, std::string>>& sweep_axes,
                   const std::string& started) {
  fs::create_directories(dir);

  const std::string config_text = save_config_text(config);
  write_text_file(dir / "config.cfg", config_text);

  ordered_json vocab_json;
  vocab_json["schema"] = "arena-vocab/1";
  vocab_json["vocabulary"] = config.world_effective().vocabulary().to_json();
  write_text_file(dir / "vocab.json", vocab_json.dump(2) + "\n");

  write_text_file(dir / "metrics.jsonl", metrics_to_jsonl(result.metrics));
  save_params(dir / "params_challenger.txt", result.challenger);
  save_params(dir / "params_solver.txt", result.solver);

  if (config.dump_episodes) {
    std::string lines;
    for (const EpisodeRecord& rec : result.records) {
      lines += episode_to_json(rec).dump();
      lines += '\n';
    }
    write_text_file(dir / "episodes.jsonl", lines);
  }

  ordered_json manifest;
  manifest["schema"] = kRunSchema;
  manifest["kind"] = sweep_axes.empty() ? "train" : "sweep-cell";
  manifest["config_hash"] = hex64(fnv1a(config_text));
  manifest["params_hash"] = hex64(fnv1a(read_text_file(dir / "params_challenger.txt") +
                                        read_text_file(dir / "params_solver.txt")));
  manifest["status"] = "completed";
  manifest["steps"] = config.steps;
  manifest["metrics_rows"] = result.metrics.size();
  ordered_json files;
  files["config"] = "config.cfg";
  files["vocab"] = "vocab.json";
  files["metrics"] = "metrics.jsonl";
  files["params_challenger"] = "params_challenger.txt";
  files["params_solver"] = "params_solver.txt";
  if (config.dump_episodes) files["episodes"] = "episodes.jsonl";
  manifest["files"] = files;
  if (!sweep_axes.empty()) {
    ordered_json axes = ordered_json::array();
    for (const auto& [key, value] : sweep_axes) {
      axes.push_back(ordered_json{{"key", key}, {"value", value}});
    }
    manifest["sweep"] = ordered_json{{"axes", axes}, {"seed", config.seed}};
  }
  manifest["started"] = started.empty() ? utc_now() : started;
  manifest["finished"] = utc_now();
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

RunDir load_run_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("not a run directory: " + dir.string());
  RunDir run;
  run.config = parse_config_text(read_text_file(dir / "config.cfg"));

  const json vocab_json = json::parse(read_text_file(dir / "vocab.json"));
  run.vocab = Vocabulary::from_json(vocab_json.at("vocabulary"));
  const Vocabulary expected = run.config.world_effective().vocabulary();
  if (run.vocab.size() != expected.size()) {
    throw ConfigError("run dir vocab.json does not match config.cfg world sizes");
  }

  run.challenger = load_params(dir / "params_challenger.txt");
  run.solver = load_params(dir / "params_solver.txt");
  run.metrics = metrics_from_jsonl(read_text_file(dir / "metrics.jsonl"));

  const fs::path episodes_path = dir / "episodes.jsonl";
  if (fs::exists(episodes_path)) {
    run.has_episodes = true;
    std::istringstream in(read_text_file(episodes_path));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      run.episodes.push_back(episode_from_json(json::parse(line)));
    }
  }
  return run;
}

int run_train_command(const TrainCommand& cmd) {
  return guarded([&] {
    if (cmd.out_dir.empty()) throw ConfigError("train needs --out");
    TrainConfig config = load_base_config(cmd.config_path);
    if (cmd.seed) config.seed = *cmd.seed;
    if (cmd.steps) config.steps = *cmd.steps;
    config.threads = resolve_override_threads(cmd.threads, config.threads);
    config.validate();

    const std::string started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    TrainResult result;
    try {
      result = train(config);
    } catch (const NumericalError&) {
      // Leave a marker so a half-written output dir is not mistaken for a run.
      fs::create_directories(cmd.out_dir);
      ordered_json manifest;
      manifest["schema"] = kRunSchema;
      manifest["kind"] = "train";
      manifest["config_hash"] = hex64(config_hash(config));
      manifest["status"] = "aborted";
      manifest["created"] = utc_now();
      write_text_file(fs::path(cmd.out_dir) / "manifest.json", manifest.dump(2) + "\n");
      throw;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    write_run_dir(cmd.out_dir, config, result, {}, started);
    const WindowSummary w = final_window_summary(result.metrics);
    std::cout << "trained " << config.steps << " steps in " << std::fixed << std::setprecision(2)
              << secs << "s -> " << cmd.out_dir << "\n";
    std::cout << "final window: r_true=" << std::setprecision(4) << w.r_true
              << " r_false=" << w.r_false << " win_rate=" << w.win_rate
              << " solver_win_rate=" << w.solver_win_rate << "\n";
  });
}

namespace {

struct SweepCell {
  std::vector<std::pair<std::string, std::string>> axes;  // (key, value) per axis
  std::uint64_t seed = 0;
  std::string dir_name;
};

std::vector<SweepCell> enumerate_cells(const SweepSpec& spec,
                                       const std::vector<std::uint64_t>& seeds) {
  std::vector<SweepCell> cells;
  std::vector<std::size_t> idx(spec.axes.size(), 0);
  while (true) {
    std::vector<std::pair<std::string, std::string>> axes;
    std::string name;
    for (std::size_t a = 0; a < spec.axes.size(); ++a) {
      const SweepAxis& axis = spec.axes[a];
      axes.emplace_back(axis.key, axis.values[idx[a]]);
      if (!name.empty()) name += "__";
      name += sanitize_path_component(axis.key) + "=" + sanitize_path_component(axis.values[idx[a]]);
    }
    for (std::uint64_t seed : seeds) {
      SweepCell cell;
      cell.axes = axes;
      cell.seed = seed;
      cell.dir_name = name + "__seed=" + std::to_string(seed);
      cells.push_back(std::move(cell));
    }
    // Odometer increment over the axis value lists.
    std::size_t a = 0;
    for (; a < idx.size(); ++a) {
      if (++idx[a] < spec.axes[a].values.size()) break;
      idx[a] = 0;
    }
    if (a == idx.size()) break;
  }
  return cells;
}

std::string summary_csv(const std::vector<SweepAxis>& axes,
                        const std::vector<std::pair<SweepCell, WindowSummary>>& results) {
  // Aggregate across seeds per axis-value tuple, then order rows
  // lexicographically by the tuple.
  std::map<std::vector<std::string>, std::vector<const WindowSummary*>> grouped;
  for (const auto& [cell, summary] : results) {
    std::vector<std::string> key;
    for (const auto& [_, value] : cell.axes) key.push_back(value);
    grouped[key].push_back(&summary);
  }

  std::ostringstream out;
  for (const SweepAxis& axis : axes) out << axis.key << ",";
  out << "r_true,r_false,win_rate\n";
  for (const auto& [key, summaries] : grouped) {
    double r_true = 0.0, r_false = 0.0, win = 0.0;
    for (const WindowSummary* s : summaries) {
      r_true += s->r_true;
      r_false += s->r_false;
      win += s->win_rate;
    }
    const double n = static_cast<double>(summaries.size());
    for (const std::string& v : key) out << v << ",";
    out << format_double(r_true / n) << "," << format_double(r_false / n) << ","
        << format_double(win / n) << "\n";
  }
  return out.str();
}

}  // namespace

int run_sweep_command(const SweepCommand& cmd) {
  return guarded([&] {
    if (cmd.out_dir.empty()) throw ConfigError("sweep needs --out");
    TrainConfig base = load_base_config(cmd.config_path);
    if (cmd.seed) base.seed = *cmd.seed;
    base.threads = resolve_override_threads(cmd.threads, base.threads);

    SweepSpec spec = load_sweep_spec_file(cmd.sweep_spec_path);
    if (cmd.budget) spec.budget = *cmd.budget;
    if (spec.steps_override > 0) base.steps = spec.steps_override;
    if (cmd.steps) base.steps = *cmd.steps;

    const std::vector<std::uint64_t> seeds =
        spec.seeds.empty() ? std::vector<std::uint64_t>{base.seed} : spec.seeds;
    const std::vector<SweepCell> cells = enumerate_cells(spec, seeds);
    if (static_cast<int>(cells.size()) > spec.budget) {
      throw ConfigError("sweep needs " + std::to_string(cells.size()) +
                        " cells but the budget is " + std::to_string(spec.budget) +
                        "; raise `budget =` in the spec or pass --budget");
    }

    fs::create_directories(cmd.out_dir);
    std::vector<std::pair<SweepCell, WindowSummary>> results;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const SweepCell& cell = cells[i];
      TrainConfig config = base;
      for (const auto& [key, value] : cell.axes) set_config_key(config, key, value);
      config.seed = cell.seed;
      config.validate();

      const std::string cell_started = utc_now();
      const TrainResult result = train(config);
      const fs::path cell_dir = fs::path(cmd.out_dir) / cell.dir_name;
      write_run_dir(cell_dir, config, result, cell.axes, cell_started);

      const WindowSummary w = final_window_summary(result.metrics);
      std::cout << "[cell " << (i + 1) << "/" << cells.size() << "] " << cell.dir_name
                << ": r_true=" << std::fixed << std::setprecision(4) << w.r_true
                << " r_false=" << w.r_false << " win_rate=" << w.win_rate << "\n";
      results.emplace_back(cell, w);
    }

    const std::string csv = summary_csv(spec.axes, results);
    write_text_file(fs::path(cmd.out_dir) / "summary.csv", csv);

    ordered_json manifest;
    manifest["schema"] = kSweepSchema;
    manifest["kind"] = "sweep";
    manifest["cells"] = cells.size();
    ordered_json axes = ordered_json::array();
    for (const SweepAxis& axis : spec.axes) {
      ordered_json values = ordered_json::array();
      for (const std::string& v : axis.values) values.push_back(v);
      axes.push_back(ordered_json{{"key", axis.key}, {"values", values}});
    }
    manifest["axes"] = axes;
    manifest["seeds"] = seeds;
    manifest["created"] = utc_now();
    write_text_file(fs::path(cmd.out_dir) / "manifest.json", manifest.dump(2) + "\n");

    std::cout << "sweep complete: " << cells.size() << " cells -> " << cmd.out_dir
              << "/summary.csv\n";
  });
}

int run_report_command(const ReportCommand& cmd) {
  return guarded([&] {
    const fs::path root(cmd.run_dir);
    if (!fs::is_directory(root)) throw ConfigError("not a sweep directory: " + cmd.run_dir);

    // Recompute every cell summary from its metrics file; the CSV must be
    // derivable from the per-run data, not trusted from the sweep pass.
    std::vector<std::pair<SweepCell, WindowSummary>> results;
    std::vector<SweepAxis> axes;
    std::vector<fs::path> cell_dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
      if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) {
        cell_dirs.push_back(entry.path());
      }
    }
    std::sort(cell_dirs.begin(), cell_dirs.end());

    for (const fs::path& dir : cell_dirs) {
      const json manifest = json::parse(read_text_file(dir / "manifest.json"));
      if (manifest.value("kind", "") != "sweep-cell") continue;
      SweepCell cell;
      for (const auto& axis : manifest.at("sweep").at("axes")) {
        cell.axes.emplace_back(axis.at("key").get<std::string>(),
                               axis.at("value").get<std::string>());
      }
      cell.seed = manifest.at("sweep").at("seed").get<std::uint64_t>();
      const auto metrics = metrics_from_jsonl(read_text_file(dir / "metrics.jsonl"));
      results.emplace_back(cell, final_window_summary(metrics));
      if (axes.empty()) {
        for (const auto& [key, _] : results.back().first.axes) {
          axes.push_back(SweepAxis{key, {}});
        }
      }
    }
    if (results.empty()) {
      throw ConfigError("no sweep cells found under " + cmd.run_dir);
    }

    const std::string csv = summary_csv(axes, results);
    const fs::path out = cmd.out_path ? fs::path(*cmd.out_path) : root / "report.csv";
    write_text_file(out, csv);
    std::cout << "report: " << results.size() << " cells -> " << out.string() << "\n";
  });
}

namespace {

ordered_json hardness_to_json(const HardnessReport& h) {
  ordered_json j;
  j["n_episodes"] = h.n_episodes;
  j["n_valid"] = h.n_valid;
  j["acc_plus"] = h.acc_plus;
  j["acc_minus"] = h.acc_minus;
  j["abs_diff"] = h.abs_diff;
  j["truth_rate_plus"] = h.truth_rate_plus;
  j["truth_rate_minus"] = h.truth_rate_minus;
  return j;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct VarianceScan {
  int groups_scanned = 0;
  int unanimous_groups = 0;
  std::vector<double> outcome_max, calibrated_max;  // unanimous groups only
};

// Branch-level pass over the dumped episodes: each (episode, polarity)
// contributes one K-rollout group to the degenerate-advantage probe.
VarianceScan scan_variance(const std::vector<EpisodeRecord>& records, const RewardConfig& reward,
                           double epsilon) {
  VarianceScan scan;
  for (const EpisodeRecord& rec : records) {
    if (!rec.valid) continue;
    for (int branch = 0; branch < 2; ++branch) {
      const auto& rollouts = branch == 0 ? rec.solver_plus : rec.solver_minus;
      std::vector<double> mean_lls;
      std::vector<int> sigmas;
      for (std::size_t k = 0; k < rollouts.size(); ++k) {
        mean_lls.push_back(rollouts[k].mean_logprob);
        sigmas.push_back(branch == 0 ? rec.bundles[k].sigma_plus : rec.bundles[k].sigma_minus);
      }
      if (mean_lls.empty()) continue;
      ++scan.groups_scanned;
      const VarianceDiagnostic d =
          variance_preservation_diagnostic(mean_lls, sigmas, reward, epsilon);
      if (d.unanimous) {
        ++scan.unanimous_groups;
        scan.outcome_max.push_back(d.max_abs_outcome);
        scan.calibrated_max.push_back(d.max_abs_calibrated);
      }
    }
  }
  return scan;
}

}  // namespace

int run_analyze_command(const AnalyzeCommand& cmd) {
  return guarded([&] {
    RunDir run = load_run_dir(cmd.run_dir);
    const int threads = resolve_override_threads(cmd.threads, run.config.threads);

    ordered_json out;
    out["schema"] = kAnalysisSchema;
    out["run"] = cmd.run_dir;
    out["config_hash"] = hex64(config_hash(run.config));

    const HardnessReport hardness =
        balanced_hardness_check(run.config, run.challenger, run.solver, cmd.eval_episodes, threads);
    out["hardness"] = hardness_to_json(hardness);

    if (run.has_episodes) {
      const MiReport mi = mi_vs_distance(run.episodes, cmd.buckets);
      ordered_json mi_json;
      mi_json["spearman"] = mi.spearman;
      mi_json["excluded_buckets"] = mi.excluded;
      ordered_json buckets = ordered_json::array();
      for (const MiBucket& b : mi.buckets) {
        buckets.push_back(ordered_json{{"lo", b.lo},
                                       {"hi", b.hi},
                                       {"mean_distance", b.mean_distance},
                                       {"mi", b.mi},
                                       {"n", b.n}});
      }
      mi_json["buckets"] = buckets;
      out["mi_vs_distance"] = mi_json;

      const std::vector<double> series = curriculum_series(run.episodes, kCurriculumWindow);
      ordered_json cur;
      cur["window"] = kCurriculumWindow;
      cur["points"] = series.size();
      if (series.size() >= 4) {
        const std::size_t q = series.size() / 4;
        double first = 0.0, last = 0.0;
        for (std::size_t i = 0; i < q; ++i) first += series[i];
        for (std::size_t i = series.size() - q; i < series.size(); ++i) last += series[i];
        cur["first_quartile_mean"] = first / q;
        cur["last_quartile_mean"] = last / q;
        cur["final"] = series.back();
      }
      out["curriculum"] = cur;

      const VarianceScan scan = scan_variance(run.episodes, run.config.reward, run.config.epsilon);
      ordered_json var;
      var["groups_scanned"] = scan.groups_scanned;
      var["unanimous_groups"] = scan.unanimous_groups;
      var["median_max_abs_outcome"] = median(scan.outcome_max);
      var["median_max_abs_calibrated"] = median(scan.calibrated_max);
      var["max_max_abs_outcome"] =
          scan.outcome_max.empty() ? 0.0
                                   : *std::max_element(scan.outcome_max.begin(), scan.outcome_max.end());
      out["advantage_variance"] = var;
    } else {
      out["episodes_missing"] = true;
    }

    // Exact equilibrium of a deliberately tiny claim game, as a sanity
    // anchor next to the empirical numbers.
    WorldConfig tiny;
    tiny.n_objects = 2;
    tiny.n_attributes = 1;
    tiny.n_values = 2;
    tiny.facts_per_scene = 1;
    tiny.seed = 1;
    const MatrixGame game = build_matrix_game(tiny, run.config.reward, 1024, threads);
    const Equilibrium eq = solve_minimax(transpose(game), 1e-7);
    ordered_json mg;
    mg["world"] = ordered_json{{"n_objects", tiny.n_objects},
                               {"n_attributes", tiny.n_attributes},
                               {"n_values", tiny.n_values},
                               {"facts_per_scene", tiny.facts_per_scene}};
    mg["rows"] = game.rows();
    mg["cols"] = game.cols();
    // The transposed solve puts the decision rules on the maximizing side,
    // so eq.value is the solver's guaranteed utility.
    mg["solver_value"] = eq.value;
    mg["challenger_value"] = -eq.value;
    mg["gap"] = eq.gap;
    out["matrix_game"] = mg;

    const WindowSummary w = final_window_summary(run.metrics);
    out["final_window"] = ordered_json{{"rows_used", w.rows_used},
                                       {"r_true", w.r_true},
                                       {"r_false", w.r_false},
                                       {"win_rate", w.win_rate},
                                       {"solver_win_rate", w.solver_win_rate}};

    const fs::path out_path =
        cmd.out_path ? fs::path(*cmd.out_path) : fs::path(cmd.run_dir) / "analysis.json";
    write_text_file(out_path, out.dump(2) + "\n");

    std::cout << "analysis -> " << out_path.string() << "\n";
    std::cout << "hardness: acc_plus=" << std::fixed << std::setprecision(4) << hardness.acc_plus
              << " acc_minus=" << hardness.acc_minus << " |diff|=" << hardness.abs_diff << "\n";
    if (out.contains("mi_vs_distance")) {
      std::cout << "mi vs distance: spearman=" << out["mi_vs_distance"]["spearman"].get<double>()
                << " over " << out["mi_vs_distance"]["buckets"].size() << " buckets\n";
    }
    std::cout << "tiny matrix game: solver value=" << eq.value << " gap=" << eq.gap << "\n";
  });
}

// ---------------------------------------------------------------------------
// verify: the in-harness self-check battery. Reference implementations here
// are deliberately naive re-derivations, kept separate from the library code
// they check.

namespace {

int reference_edit_distance(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const int sub = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, sub});
    }
  }
  return d[n][m];
}

Claim make_claim(std::vector<int> tokens, Polarity polarity) {
  Claim c;
  c.tokens = std::move(tokens);
  c.polarity = polarity;
  c.source_tokens = c.tokens;
  return c;
}

TrainConfig verify_train_config() {
  TrainConfig config;
  config.world.n_objects = 3;
  config.world.n_attributes = 3;
  config.world.n_values = 3;
  config.world.facts_per_scene = 2;
  config.steps = 40;
  config.k = 2;
  config.seed = 7;
  config.metrics_interval = 1;
  return config;
}

using Check = std::pair<std::string, std::function<std::optional<std::string>()>>;

}  // namespace

int run_verify_command(int threads) {
  const int par_threads = threads > 1 ? threads : 4;
  std::vector<Check> checks;

  checks.emplace_back("edit distance pinned values", []() -> std::optional<std::string> {
    const double quarter =
        edit_distance_normalized(std::vector<int>{10, 11, 12, 13}, std::vector<int>{10, 11, 12, 14});
    if (quarter != 0.25) return "4-token one-substitution pair gave " + format_double(quarter);
    const double full =
        edit_distance_normalized(std::vector<int>{7}, std::vector<int>{8, 9, 10, 11});
    if (full != 1.0) return "disjoint 1-vs-4 pair gave " + format_double(full);
    return std::nullopt;
  });

  checks.emplace_back("edit distance random cross-check", []() -> std::optional<std::string> {
    RngStream rng(0xed17);
    for (int trial = 0; trial < 2000; ++trial) {
      std::vector<int> a(rng.next_index(10) + 1), b(rng.next_index(10) + 1);
      for (int& t : a) t = static_cast<int>(rng.next_index(6));
      for (int& t : b) t = static_cast<int>(rng.next_index(6));
      const double expected = static_cast<double>(reference_edit_distance(a, b)) /
                              static_cast<double>(std::max(a.size(), b.size()));
      if (edit_distance_normalized(a, b) != expected) return "mismatch at trial " + std::to_string(trial);
      if (edit_distance_normalized(a, b) != edit_distance_normalized(b, a)) {
        return "asymmetric at trial " + std::to_string(trial);
      }
      if (edit_distance_normalized(a, a) != 0.0) return "self distance nonzero";
    }
    return std::nullopt;
  });

  checks.emplace_back("stealth reward", []() -> std::optional<std::string> {
    StealthParams params;  // alpha 5
    const Claim plus = make_claim({10, 11, 12, 13}, Polarity::positive);
    const Claim minus = make_claim({10, 11, 12, 14}, Polarity::negative);
    const double r = stealth_reward(plus, minus, params);
    if (std::abs(r - std::exp(-1.25)) > 1e-12) return "exp(-5*0.25) off: " + format_double(r);
    double prev = 2.0;
    for (int i = 0; i <= 10; ++i) {
      StealthParams p;
      Claim far_minus = make_claim({20, 21, 22, 23, 24, 25, 26, 27, 28, 29}, Polarity::negative);
      for (int j = 0; j < i; ++j) far_minus.tokens[static_cast<std::size_t>(j)] = 10 + j;
      Claim far_plus = make_claim({10, 11, 12, 13, 14, 15, 16, 17, 18, 19}, Polarity::positive);
      const double cur = stealth_reward(far_plus, far_minus, p);
      if (cur <= 0.0 || cur > 1.0) return "stealth left (0, 1]";
      if (cur < prev && i > 0) return "not increasing as the claims converge";
      prev = cur;
    }
    return std::nullopt;
  });

  checks.emplace_back("group normalization", []() -> std::optional<std::string> {
    const AdvantageSet pinned = normalize_group(Group{{1.0, -1.0, 1.0}, 1e-8});
    if (pinned.degenerate) return "spread group flagged degenerate";
    if (std::abs(pinned.advantages[0] - 0.7071067) > 1e-6 ||
        std::abs(pinned.advantages[1] + 1.4142134) > 1e-6) {
      return "pinned [1,-1,1] advantages off";
    }
    RngStream rng(0x9087);
    for (int trial = 0; trial < 200; ++trial) {
      Group g;
      g.rewards.resize(rng.next_index(6) + 2);
      for (double& r : g.rewards) r = rng.next_symmetric(2.0);
      const AdvantageSet a = normalize_group(g);
      if (a.degenerate) continue;
      double mean = 0.0, var = 0.0;
      for (double adv : a.advantages) mean += adv;
      mean /= static_cast<double>(a.advantages.size());
      for (double adv : a.advantages) var += (adv - mean) * (adv - mean);
      var /= static_cast<double>(a.advantages.size());
      if (std::abs(mean) > 1e-9) return "normalized mean " + format_double(mean);
      if (std::abs(std::sqrt(var) - 1.0) > 1e-4) return "normalized std " + format_double(std::sqrt(var));
    }
    const AdvantageSet flat = normalize_group(Group{{0.4, 0.4, 0.4, 0.4}, 1e-8});
    if (!flat.degenerate) return "unanimous group not flagged degenerate";
    for (double adv : flat.advantages) {
      if (adv != 0.0) return "degenerate advantages not exactly zero";
    }
    return std::nullopt;
  });

  checks.emplace_back("zero-sum identity at lambda 0", []() -> std::optional<std::string> {
    RewardConfig reward;
    reward.lambda_stealth = 0.0;
    RngStream rng(0x2e60);
    for (int trial = 0; trial < 1000; ++trial) {
      const double mean_pair = rng.next_symmetric(3.0);
      const double r_stealth = rng.next_double() * 0.999 + 0.001;
      if (challenger_reward(mean_pair, r_stealth, reward) != -mean_pair) {
        return "challenger reward not the exact negation";
      }
    }
    return std::nullopt;
  });

  checks.emplace_back("softmax step distributions", []() -> std::optional<std::string> {
    WorldConfig world;
    const Vocabulary vocab = world.vocabulary();
    PolicySpec spec{vocab.size(), world.feature_dim()};
    PolicyParams params = init_policy(spec, Role::solver, vocab, 11, 0.5, 3.0);
    RngStream rng(0x50f7);
    for (int trial = 0; trial < 50; ++trial) {
      Context ctx;
      ctx.scene.resize(static_cast<std::size_t>(spec.scene_dim));
      for (double& v : ctx.scene) v = rng.next_index(2) ? 1.0 : 0.0;
      ctx.z = static_cast<int>(rng.next_index(2));
      const int prev = static_cast<int>(rng.next_index(static_cast<std::size_t>(vocab.size() + 1))) - 1;
      const auto probs = step_probabilities(params, context_vector(spec, ctx, prev));
      double sum = 0.0;
      for (double p : probs) {
        if (!(p > 0.0)) return "non-positive probability";
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-12) return "row sum " + format_double(sum);
    }
    return std::nullopt;
  });

  checks.emplace_back("uniform policy likelihood", []() -> std::optional<std::string> {
    WorldConfig world;
    const Vocabulary vocab = world.vocabulary();
    PolicySpec spec{vocab.size(), world.feature_dim()};
    PolicyParams params;
    params.spec = spec;
    params.role = Role::solver;
    params.w.assign(static_cast<std::size_t>(spec.vocab_size) * spec.context_dim(), 0.0);
    Context ctx;
    ctx.scene.assign(static_cast<std::size_t>(spec.scene_dim), 0.0);
    const double ll = mean_log_likelihood(params, ctx, {4, 5, 1, 0});
    if (std::abs(ll + std::log(static_cast<double>(vocab.size()))) > 1e-12) {
      return "zero-weight policy mean log-likelihood " + format_double(ll);
    }
    return std::nullopt;
  });

  checks.emplace_back("rollout likelihood cache", []() -> std::optional<std::string> {
    WorldConfig world;
    const Vocabulary vocab = world.vocabulary();
    PolicySpec spec{vocab.size(), world.feature_dim()};
    PolicyParams params = init_policy(spec, Role::solver, vocab, 23, 0.3, 4.0);
    const Scene scene = generate_scene(world, 5);
    Context ctx;
    ctx.scene = scene.features;
    ctx.z = 1;
    for (int trial = 0; trial < 40; ++trial) {
      RngStream rng(mix_seed(0xca11, static_cast<std::uint64_t>(trial)));
      const Rollout r = sample(params, ctx, rng, 8);
      for (double lp : r.step_logprobs) {
        if (lp > 0.0) return "positive step logprob";
      }
      const double rescored = mean_log_likelihood(params, ctx, r.tokens);
      if (std::abs(rescored - r.mean_logprob) > 1e-10) {
        return "cached mean " + format_double(r.mean_logprob) + " vs rescored " +
               format_double(rescored);
      }
    }
    return std::nullopt;
  });

  checks.emplace_back("solver reward spots", []() -> std::optional<std::string> {
    RewardConfig cal;  // gamma 1, blend_to_binary: pure calibrated
    if (solver_reward(1, -0.3, cal) != 0.3) return "calibrated correct reward off";
    if (solver_reward(-1, -0.3, cal) != -0.3) return "calibrated incorrect reward off";
    RewardConfig floored = cal;
    floored.r_min = 0.4;
    if (solver_reward(1, -0.1, floored) != 0.4) return "floor not applied to correct decision";
    if (solver_reward(-1, -0.1, floored) != -0.1) return "floor leaked onto incorrect decision";
    RewardConfig outcome = cal;
    outcome.outcome_only = true;
    if (solver_reward(1, -2.0, outcome) != 1.0 || solver_reward(-1, -0.01, outcome) != -1.0) {
      return "outcome-only reward off";
    }
    return std::nullopt;
  });

  checks.emplace_back("scene sampler determinism", []() -> std::optional<std::string> {
    WorldConfig world;
    world.seed = 31;
    for (std::uint64_t i = 0; i < 500; ++i) {
      const Scene a = generate_scene(world, i);
      const Scene b = generate_scene(world, i);
      if (a.facts != b.facts || a.features != b.features) return "same index drew differently";
      for (std::size_t f = 1; f < a.facts.size(); ++f) {
        if (a.facts[f - 1].object == a.facts[f].object &&
            a.facts[f - 1].attribute == a.facts[f].attribute) {
          return "duplicate (object, attribute) cell";
        }
      }
    }
    return std::nullopt;
  });

  checks.emplace_back("decision extraction", []() -> std::optional<std::string> {
    WorldConfig world;
    const Vocabulary v = world.vocabulary();
    if (extract_decision(v, {Vocabulary::yes}) != Decision::yes) return "[yes]";
    if (extract_decision(v, {Vocabulary::yes, Vocabulary::eos}) != Decision::yes) return "[yes,eos]";
    if (extract_decision(v, {Vocabulary::no, Vocabulary::eos}) != Decision::no) return "[no,eos]";
    if (extract_decision(v, {Vocabulary::eos}) != Decision::undecided) return "[eos]";
    if (extract_decision(v, {Vocabulary::yes, Vocabulary::no, Vocabulary::eos}) != Decision::no) {
      return "[yes,no,eos]";
    }
    return std::nullopt;
  });

  checks.emplace_back("claim parsing", []() -> std::optional<std::string> {
    WorldConfig world;
    const Vocabulary v = world.vocabulary();
    const std::vector<int> good{Vocabulary::clm, v.object_token(1), v.attribute_token(2),
                                v.value_token(3), Vocabulary::eclm, Vocabulary::eos};
    const auto claim = parse_claim(v, good);
    if (!claim || claim->tokens.size() != 3) return "well-formed span did not parse";
    if (parse_claim(v, {Vocabulary::clm, v.object_token(0)})) return "unterminated span parsed";
    if (parse_claim(v, {Vocabulary::clm, Vocabulary::eclm})) return "empty span parsed";
    return std::nullopt;
  });

  checks.emplace_back("train determinism", []() -> std::optional<std::string> {
    const TrainConfig config = verify_train_config();
    const TrainResult a = train(config);
    const TrainResult b = train(config);
    if (metrics_to_jsonl(a.metrics) != metrics_to_jsonl(b.metrics)) {
      return "metrics differ between identical runs";
    }
    if (a.solver.w != b.solver.w || a.challenger.w != b.challenger.w) {
      return "final parameters differ between identical runs";
    }
    return std::nullopt;
  });

  checks.emplace_back("thread invariance", [par_threads]() -> std::optional<std::string> {
    TrainConfig serial = verify_train_config();
    TrainConfig parallel = verify_train_config();
    parallel.threads = par_threads;
    const TrainResult a = train(serial);
    const TrainResult b = train(parallel);
    if (metrics_to_jsonl(a.metrics) != metrics_to_jsonl(b.metrics)) {
      return "metrics change with the thread count";
    }
    if (a.solver.w != b.solver.w) return "solver weights change with the thread count";
    return std::nullopt;
  });

  checks.emplace_back("solver group kernel parity", [par_threads]() -> std::optional<std::string> {
    WorldConfig world;
    const Vocabulary vocab = world.vocabulary();
    PolicySpec spec{vocab.size(), world.feature_dim()};
    PolicyParams params = init_policy(spec, Role::solver, vocab, 77, 0.4, 3.0);
    const Scene scene = generate_scene(world, 12);
    Context plus, minus;
    plus.scene = scene.features;
    minus.scene = scene.features;
    plus.bag.assign(static_cast<std::size_t>(vocab.size()), 0.0);
    minus.bag.assign(static_cast<std::size_t>(vocab.size()), 0.0);
    plus.bag[static_cast<std::size_t>(vocab.object_token(0))] = 1.0;
    minus.bag[static_cast<std::size_t>(vocab.object_token(1))] = 1.0;
    const SolverGroup s = sample_solver_group_serial(params, plus, minus, 8, 0xabc, 8);
    const SolverGroup p = sample_solver_group_parallel(params, plus, minus, 8, 0xabc, 8, par_threads);
    for (int k = 0; k < 8; ++k) {
      if (s.plus[static_cast<std::size_t>(k)].tokens != p.plus[static_cast<std::size_t>(k)].tokens ||
          s.minus[static_cast<std::size_t>(k)].tokens != p.minus[static_cast<std::size_t>(k)].tokens ||
          s.plus[static_cast<std::size_t>(k)].step_logprobs !=
              p.plus[static_cast<std::size_t>(k)].step_logprobs) {
        return "serial and parallel rollouts differ at k=" + std::to_string(k);
      }
    }
    return std::nullopt;
  });

  checks.emplace_back("hardness kernel parity", [par_threads]() -> std::optional<std::string> {
    TrainConfig config = verify_train_config();
    const Vocabulary vocab = config.world_effective().vocabulary();
    PolicyParams challenger =
        init_policy(config.policy_spec(), Role::challenger, vocab, config.seed, config.init_scale,
                    config.grammar_bias);
    PolicyParams solver = init_policy(config.policy_spec(), Role::solver, vocab, config.seed,
                                      config.init_scale, config.grammar_bias);
    const HardnessReport serial = balanced_hardness_check_serial(config, challenger, solver, 200);
    const HardnessReport parallel =
        balanced_hardness_check(config, challenger, solver, 200, par_threads);
    if (serial.n_valid != parallel.n_valid || serial.acc_plus != parallel.acc_plus ||
        serial.acc_minus != parallel.acc_minus ||
        serial.truth_rate_plus != parallel.truth_rate_plus) {
      return "serial and parallel evaluation disagree";
    }
    return std::nullopt;
  });

  checks.emplace_back("matching pennies equilibrium", []() -> std::optional<std::string> {
    MatrixGame game;
    game.payoff = {{1.0, -1.0}, {-1.0, 1.0}};
    game.row_labels = {"heads", "tails"};
    game.col_labels = {"heads", "tails"};
    const Equilibrium eq = solve_minimax(game, 1e-9);
    if (std::abs(eq.value) > 1e-9) return "value " + format_double(eq.value);
    if (std::abs(eq.row_strategy[0] - 0.5) > 1e-6 || std::abs(eq.col_strategy[0] - 0.5) > 1e-6) {
      return "strategies not the uniform mix";
    }
    if (eq.gap > 1e-9) return "duality gap " + format_double(eq.gap);
    return std::nullopt;
  });

  int failures = 0;
  for (const auto& [name, body] : checks) {
    std::optional<std::string> detail;
    try {
      detail = body();
    } catch (const std::exception& e) {
      detail = std::string("threw: ") + e.what();
    }
    if (detail) {
      ++failures;
      std::cout << "[FAIL] " << name << ": " << *detail << "\n";
    } else {
      std::cout << "[ok]   " << name << "\n";
    }
  }
  std::cout << "verify: " << checks.size() << " checks, " << failures << " failed\n";
  return failures == 0 ? 0 : 2;
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"claimarena: adversarial claim-pair self-play on a synthetic scene world"};
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "run self-play training into a run directory");
  std::string train_config, train_out;
  std::uint64_t train_seed = 0;
  int train_steps = 0, train_threads = 0;
  train_cmd->add_option("--config", train_config, "config file (defaults apply when omitted)");
  auto* train_seed_opt = train_cmd->add_option("--seed", train_seed, "override train.seed");
  auto* train_steps_opt = train_cmd->add_option("--steps", train_steps, "override train.steps");
  auto* train_threads_opt =
      train_cmd->add_option("--threads", train_threads, "override train.threads");
  train_cmd->add_option("--out", train_out, "output run directory")->required();

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "run a grid of training cells plus a summary CSV");
  std::string sweep_config, sweep_spec, sweep_out;
  std::uint64_t sweep_seed = 0;
  int sweep_steps = 0, sweep_threads = 0, sweep_budget = 0;
  sweep_cmd->add_option("--config", sweep_config, "base config file");
  sweep_cmd->add_option("--sweep-spec", sweep_spec, "sweep spec file")->required();
  auto* sweep_seed_opt = sweep_cmd->add_option("--seed", sweep_seed, "override the base seed");
  auto* sweep_steps_opt =
      sweep_cmd->add_option("--steps", sweep_steps, "override steps for every cell");
  auto* sweep_threads_opt = sweep_cmd->add_option("--threads", sweep_threads, "override threads");
  auto* sweep_budget_opt =
      sweep_cmd->add_option("--budget", sweep_budget, "override the spec cell budget");
  sweep_cmd->add_option("--out", sweep_out, "output sweep directory")->required();

  // analyze
  auto* analyze_cmd =
      app.add_subcommand("analyze", "post-hoc diagnostics for a finished run directory");
  std::string analyze_run, analyze_out;
  int analyze_eval = 5000, analyze_buckets = 10, analyze_threads = 0;
  analyze_cmd->add_option("--run", analyze_run, "run directory to analyze")->required();
  analyze_cmd->add_option("--out", analyze_out, "output JSON path (default <run>/analysis.json)");
  analyze_cmd->add_option("--eval-episodes", analyze_eval, "fresh evaluation episodes");
  analyze_cmd->add_option("--buckets", analyze_buckets, "edit-distance buckets for the MI curve");
  auto* analyze_threads_opt =
      analyze_cmd->add_option("--threads", analyze_threads, "override threads");

  // report
  auto* report_cmd =
      app.add_subcommand("report", "recompute a sweep summary CSV from per-cell metrics");
  std::string report_run, report_out;
  report_cmd->add_option("--run", report_run, "sweep directory")->required();
  report_cmd->add_option("--out", report_out, "output CSV path (default <run>/report.csv)");

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "run the built-in self-check battery");
  int verify_threads = 0;
  verify_cmd->add_option("--threads", verify_threads, "threads for the parallel-parity checks");

  std::vector<const char*> argv;
  argv.push_back("claimarena");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (train_cmd->parsed()) {
    TrainCommand cmd;
    if (!train_config.empty()) cmd.config_path = train_config;
    if (train_seed_opt->count() > 0) cmd.seed = train_seed;
    if (train_steps_opt->count() > 0) cmd.steps = train_steps;
    if (train_threads_opt->count() > 0) cmd.threads = train_threads;
    cmd.out_dir = train_out;
    return run_train_command(cmd);
  }
  if (sweep_cmd->parsed()) {
    SweepCommand cmd;
    if (!sweep_config.empty()) cmd.config_path = sweep_config;
    cmd.sweep_spec_path = sweep_spec;
    if (sweep_seed_opt->count() > 0) cmd.seed = sweep_seed;
    if (sweep_steps_opt->count() > 0) cmd.steps = sweep_steps;
    if (sweep_threads_opt->count() > 0) cmd.threads = sweep_threads;
    if (sweep_budget_opt->count() > 0) cmd.budget = sweep_budget;
    cmd.out_dir = sweep_out;
    return run_sweep_command(cmd);
  }
  if (analyze_cmd->parsed()) {
    AnalyzeCommand cmd;
    cmd.run_dir = analyze_run;
    if (!analyze_out.empty()) cmd.out_path = analyze_out;
    cmd.eval_episodes = analyze_eval;
    cmd.buckets = analyze_buckets;
    if (analyze_threads_opt->count() > 0) cmd.threads = analyze_threads;
    return run_analyze_command(cmd);
  }
  if (report_cmd->parsed()) {
    ReportCommand cmd;
    cmd.run_dir = report_run;
    if (!report_out.empty()) cmd.out_path = report_out;
    return run_report_command(cmd);
  }
  if (verify_cmd->parsed()) {
    return run_verify_command(verify_threads > 0 ? verify_threads : 1);
  }
  return 1;
}

}  // namespace arena
