#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "arena/analysis.hpp"
#include "arena/selfplay.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& body, int repeat) {
  // One warm-up pass, then the best of `repeat` timed passes.
  body();
  double best = 1e300;
  for (int i = 0; i < repeat; ++i) {
    const auto t0 = Clock::now();
    body();
    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    if (ms < best) best = ms;
  }
  return best;
}

void report(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-24s serial %9.2f ms   parallel %9.2f ms   speedup %.2fx\n", name, serial_ms,
              parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"claimarena-bench: serial reference vs parallel kernels"};
  int threads = 0;
  int repeat = 3;
  app.add_option("--threads", threads, "parallel thread count (default: all hardware threads)");
  app.add_option("--repeat", repeat, "timed repetitions per kernel (best-of)");
  CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
  if (threads <= 0) threads = omp_get_max_threads();
#else
  if (threads <= 0) threads = 1;
  std::printf("built without OpenMP; the parallel path runs serially\n");
#endif
  std::printf("threads: %d, repeat: %d (best-of)\n\n", threads, repeat);

  arena::WorldConfig world;  // 4/4/4 defaults
  const arena::Vocabulary vocab = world.vocabulary();
  arena::PolicySpec spec{vocab.size(), world.feature_dim()};
  arena::PolicyParams solver =
      arena::init_policy(spec, arena::Role::solver, vocab, 99, 0.3, 4.0);

  // Kernel 1: one big solver rollout group.
  {
    const arena::Scene scene = arena::generate_scene(world, 3);
    arena::Context plus, minus;
    plus.scene = scene.features;
    minus.scene = scene.features;
    plus.bag.assign(static_cast<std::size_t>(vocab.size()), 0.0);
    minus.bag = plus.bag;
    const int k = 4096;
    const double serial_ms = time_ms(
        [&] { arena::sample_solver_group_serial(solver, plus, minus, k, 0xb1, 8); }, repeat);
    const double parallel_ms = time_ms(
        [&] { arena::sample_solver_group_parallel(solver, plus, minus, k, 0xb1, 8, threads); },
        repeat);
    report("solver rollout group", serial_ms, parallel_ms);
  }

  // Kernel 2: exhaustive claim-game payoff enumeration.
  {
    arena::WorldConfig game_world;
    game_world.n_objects = 3;
    game_world.n_attributes = 1;
    game_world.n_values = 3;
    game_world.facts_per_scene = 1;
    arena::RewardConfig reward;
    const int budget = 1 << 20;
    const double serial_ms = time_ms(
        [&] { arena::build_matrix_game(game_world, reward, budget, 1); }, repeat);
    const double parallel_ms = time_ms(
        [&] { arena::build_matrix_game(game_world, reward, budget, threads); }, repeat);
    report("payoff enumeration", serial_ms, parallel_ms);
  }

  // Kernel 3: a frozen-policy evaluation batch.
  {
    arena::TrainConfig config;
    arena::PolicyParams challenger = arena::init_policy(
        config.policy_spec(), arena::Role::challenger, vocab, config.seed, config.init_scale,
        config.grammar_bias);
    arena::PolicyParams eval_solver = arena::init_policy(
        config.policy_spec(), arena::Role::solver, vocab, config.seed, config.init_scale,
        config.grammar_bias);
    const int episodes = 4000;
    const double serial_ms = time_ms(
        [&] { arena::balanced_hardness_check_serial(config, challenger, eval_solver, episodes); },
        repeat);
    const double parallel_ms = time_ms(
        [&] {
          arena::balanced_hardness_check(config, challenger, eval_solver, episodes, threads);
        },
        repeat);
    report("evaluation batch", serial_ms, parallel_ms);
  }

  return 0;
}
