#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "arena/harness.hpp"
#include "arena/util.hpp"

using namespace arena;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("arena_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

std::string small_config_text() {
  return "world.n_objects = 3\n"
         "world.n_attributes = 3\n"
         "world.n_values = 3\n"
         "world.facts_per_scene = 2\n"
         "train.steps = 25\n"
         "train.seed = 9\n"
         "train.metrics_interval = 5\n";
}

}  // namespace

TEST_CASE("config text round trip is canonical") {
  const TrainConfig defaults;
  const std::string text = save_config_text(defaults);
  const TrainConfig parsed = parse_config_text(text);
  CHECK(save_config_text(parsed) == text);
  CHECK(config_hash(parsed) == config_hash(defaults));

  SUBCASE("empty text gives the defaults") {
    const TrainConfig empty = parse_config_text("");
    CHECK(empty.k == 3);
    CHECK(empty.steps == 2000);
    CHECK(empty.world.n_objects == 4);
    CHECK(save_config_text(empty) == text);
  }
  SUBCASE("comments and blank lines are ignored") {
    const TrainConfig c = parse_config_text("# header\n\n  train.k = 5  # inline\n");
    CHECK(c.k == 5);
  }
  SUBCASE("every documented key survives a mutated round trip") {
    TrainConfig c = parse_config_text(small_config_text());
    CHECK(c.world.n_objects == 3);
    CHECK(c.steps == 25);
    CHECK(c.seed == 9);
    CHECK(c.metrics_interval == 5);
    const TrainConfig again = parse_config_text(save_config_text(c));
    CHECK(save_config_text(again) == save_config_text(c));
    CHECK(config_hash(again) == config_hash(c));
    CHECK(config_hash(again) != config_hash(defaults));
  }
}

TEST_CASE("config parsing rejects bad input by name") {
  auto expect_error = [](const std::string& text, const std::string& needle) {
    try {
      parse_config_text(text);
      FAIL("expected ConfigError for: " << text);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_error("no.such.key = 1\n", "no.such.key");
  expect_error("train.k = soon\n", "train.k");
  expect_error("train.k = 3x\n", "train.k");
  expect_error("reward.alpha = -1\n", "reward.alpha");
  expect_error("train.negative_mix = 1.0\n", "negative_mix");
  expect_error("reward.gamma_mode = sometimes\n", "gamma_mode");
  expect_error("just-a-word\n", "line");
  expect_error("train.seed = -3\n", "train.seed");
}

TEST_CASE("set_config_key covers representative typed keys") {
  TrainConfig c;
  set_config_key(c, "reward.lambda_stealth", "0.4");
  set_config_key(c, "reward.outcome_only", "true");
  set_config_key(c, "reward.gamma_mode", "blend_to_binary");
  set_config_key(c, "train.dump_episodes", "1");
  set_config_key(c, "world.seed", "-1");
  CHECK(c.reward.lambda_stealth == 0.4);
  CHECK(c.reward.outcome_only);
  CHECK(c.dump_episodes);
  CHECK(c.world.seed == TrainConfig::derive_world_seed);
  CHECK_THROWS_AS(set_config_key(c, "train.dump_episodes", "maybe"), ConfigError);
}

TEST_CASE("sweep spec parsing") {
  const std::string text =
      "axis = train.k : 1, 3, 5\n"
      "axis = reward.r_min : 0.0, 0.4\n"
      "seeds = 11, 12\n"
      "steps = 40\n"
      "budget = 20\n";
  const SweepSpec spec = parse_sweep_spec_text(text);
  REQUIRE(spec.axes.size() == 2);
  CHECK(spec.axes[0].key == "train.k");
  CHECK(spec.axes[0].values == std::vector<std::string>{"1", "3", "5"});
  CHECK(spec.axes[1].key == "reward.r_min");
  CHECK(spec.seeds == std::vector<std::uint64_t>{11, 12});
  CHECK(spec.steps_override == 40);
  CHECK(spec.budget == 20);

  SUBCASE("axes are required") {
    CHECK_THROWS_AS(parse_sweep_spec_text("seeds = 1\n"), ConfigError);
  }
  SUBCASE("axis keys are validated against the config schema") {
    CHECK_THROWS_AS(parse_sweep_spec_text("axis = train.klingon : 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_sweep_spec_text("axis = train.k : 1, zebra\n"), ConfigError);
  }
  SUBCASE("unknown directives are rejected") {
    CHECK_THROWS_AS(parse_sweep_spec_text("axis = train.k : 1\nwat = 7\n"), ConfigError);
  }
}

TEST_CASE("run directory round trip") {
  const fs::path dir = fresh_dir("rundir");
  TrainConfig c = parse_config_text(small_config_text());
  c.dump_episodes = true;
  const TrainResult result = train(c);
  write_run_dir(dir, c, result);

  CHECK(fs::exists(dir / "config.cfg"));
  CHECK(fs::exists(dir / "vocab.json"));
  CHECK(fs::exists(dir / "metrics.jsonl"));
  CHECK(fs::exists(dir / "params_challenger.txt"));
  CHECK(fs::exists(dir / "params_solver.txt"));
  CHECK(fs::exists(dir / "episodes.jsonl"));
  CHECK(fs::exists(dir / "manifest.json"));

  const RunDir loaded = load_run_dir(dir);
  CHECK(config_hash(loaded.config) == config_hash(c));
  CHECK(loaded.challenger.w == result.challenger.w);
  CHECK(loaded.solver.w == result.solver.w);
  REQUIRE(loaded.metrics.size() == result.metrics.size());
  for (std::size_t i = 0; i < loaded.metrics.size(); ++i) {
    CHECK(loaded.metrics[i].to_json().dump() == result.metrics[i].to_json().dump());
  }
  CHECK(loaded.has_episodes);
  CHECK(loaded.episodes.size() == result.records.size());

  SUBCASE("without episode dumping the file is absent") {
    const fs::path lean = fresh_dir("rundir_lean");
    TrainConfig c2 = c;
    c2.dump_episodes = false;
    write_run_dir(lean, c2, train(c2));
    CHECK_FALSE(fs::exists(lean / "episodes.jsonl"));
    CHECK_FALSE(load_run_dir(lean).has_episodes);
  }
  SUBCASE("loading a missing directory fails") {
    CHECK_THROWS(load_run_dir(dir / "nope"));
  }
}

TEST_CASE("final window summary") {
  auto row = [](std::uint64_t step, double rt, double rf, double swr, int n_valid) {
    MetricsRow r;
    r.step = step;
    r.r_true = rt;
    r.r_false = rf;
    r.solver_win_rate = swr;
    r.n_valid = n_valid;
    return r;
  };
  const std::vector<MetricsRow> metrics{
      row(0, 9.0, 9.0, 0.1, 1),   // outside the window
      row(1, 0.2, 0.4, 0.5, 1),   // loss
      row(2, 0.0, 0.0, 0.5, 0),   // empty window row, skipped
      row(3, 0.6, 0.2, 0.7, 1),   // win
      row(4, 0.8, 0.4, 0.9, 1),   // win
  };
  const WindowSummary s = final_window_summary(metrics, 4);
  CHECK(s.rows_used == 3);
  CHECK(s.r_true == doctest::Approx((0.2 + 0.6 + 0.8) / 3).epsilon(1e-12));
  CHECK(s.r_false == doctest::Approx((0.4 + 0.2 + 0.4) / 3).epsilon(1e-12));
  CHECK(s.win_rate == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(s.solver_win_rate == doctest::Approx((0.5 + 0.7 + 0.9) / 3).epsilon(1e-12));

  SUBCASE("window larger than history uses everything valid") {
    const WindowSummary all = final_window_summary(metrics, 100);
    CHECK(all.rows_used == 4);
  }
  SUBCASE("no usable rows yields zeros") {
    const WindowSummary none = final_window_summary({row(0, 1.0, 2.0, 0.5, 0)}, 10);
    CHECK(none.rows_used == 0);
    CHECK(none.r_true == 0.0);
    CHECK(none.win_rate == 0.0);
  }
}

TEST_CASE("train command writes a complete run directory") {
  const fs::path dir = fresh_dir("cmd_train");
  const fs::path cfg = dir / "base.cfg";
  spit(cfg, small_config_text());

  TrainCommand cmd;
  cmd.config_path = cfg.string();
  cmd.out_dir = (dir / "run").string();
  REQUIRE(run_train_command(cmd) == 0);

  const RunDir run = load_run_dir(dir / "run");
  CHECK(run.config.steps == 25);
  CHECK(run.metrics.size() == 5);

  SUBCASE("command-line overrides beat the config file") {
    TrainCommand forced = cmd;
    forced.out_dir = (dir / "run2").string();
    forced.seed = 123;
    forced.steps = 10;
    REQUIRE(run_train_command(forced) == 0);
    const RunDir run2 = load_run_dir(dir / "run2");
    CHECK(run2.config.seed == 123);
    CHECK(run2.config.steps == 10);
  }
  SUBCASE("a rerun is byte-identical") {
    TrainCommand again = cmd;
    again.out_dir = (dir / "run_again").string();
    REQUIRE(run_train_command(again) == 0);
    CHECK(slurp(dir / "run_again" / "metrics.jsonl") == slurp(dir / "run" / "metrics.jsonl"));
    CHECK(slurp(dir / "run_again" / "params_solver.txt") == slurp(dir / "run" / "params_solver.txt"));
    CHECK(slurp(dir / "run_again" / "config.cfg") == slurp(dir / "run" / "config.cfg"));
  }
}

TEST_CASE("sweep and report commands agree byte for byte") {
  const fs::path dir = fresh_dir("cmd_sweep");
  const fs::path cfg = dir / "base.cfg";
  spit(cfg, small_config_text());
  const fs::path spec = dir / "sweep.cfg";
  spit(spec,
       "axis = train.k : 1, 2\n"
       "seeds = 5, 6\n"
       "steps = 12\n");

  SweepCommand cmd;
  cmd.config_path = cfg.string();
  cmd.sweep_spec_path = spec.string();
  cmd.out_dir = (dir / "sweep_out").string();
  REQUIRE(run_sweep_command(cmd) == 0);

  const fs::path out = dir / "sweep_out";
  CHECK(fs::exists(out / "summary.csv"));
  CHECK(fs::exists(out / "manifest.json"));
  int cells = 0;
  for (const auto& entry : fs::directory_iterator(out)) {
    if (entry.is_directory()) ++cells;
  }
  CHECK(cells == 4);

  const std::string summary = slurp(out / "summary.csv");
  CHECK(summary.substr(0, summary.find('\n')) == "train.k,r_true,r_false,win_rate");
  // Header plus one aggregated row per axis value.
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 3);

  ReportCommand rep;
  rep.run_dir = out.string();
  REQUIRE(run_report_command(rep) == 0);
  CHECK(slurp(out / "report.csv") == summary);

  SUBCASE("the budget refusal is a usage error") {
    SweepCommand tight = cmd;
    tight.out_dir = (dir / "sweep_tight").string();
    tight.budget = 3;
    CHECK(run_sweep_command(tight) == 1);
    CHECK_FALSE(fs::exists(dir / "sweep_tight" / "summary.csv"));
  }
}

TEST_CASE("cli maps failures to exit codes") {
  CHECK(run_cli({"--help"}) == 0);
  CHECK(run_cli({}) == 1);
  CHECK(run_cli({"conquer"}) == 1);
  CHECK(run_cli({"train"}) == 1);  // --out is required
  const fs::path dir = fresh_dir("cli_codes");
  CHECK(run_cli({"train", "--config", (dir / "missing.cfg").string(),
                 "--out", (dir / "run").string()}) == 1);
  spit(dir / "bad.cfg", "train.k = -2\n");
  CHECK(run_cli({"train", "--config", (dir / "bad.cfg").string(),
                 "--out", (dir / "run").string()}) == 1);
}
