#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "tvmpc/acceptance.hpp"
#include "tvmpc/harness.hpp"

namespace {

int cmd_run(const std::string& target, const std::string& out_path,
            bool seed_set, std::uint64_t seed,
            const std::vector<std::string>& overrides) {
  const auto builtins = tvmpc::builtin_scenarios();
  tvmpc::ScenarioConfig cfg;
  if (const tvmpc::ScenarioConfig* found =
          tvmpc::find_scenario(builtins, target)) {
    cfg = *found;
  } else {
    cfg = tvmpc::load_config(target);
  }
  if (seed_set) cfg.seed = seed;
  for (const std::string& kv : overrides) {
    tvmpc::apply_override(cfg, kv);
  }

  const tvmpc::ScenarioResult res = tvmpc::run_scenario(cfg);
  const tvmpc::Metrics& m = res.metrics;
  std::printf("scenario %-12s %s\n", cfg.name.c_str(),
              m.completed ? "completed" : ("ABORTED: " + m.diagnostic).c_str());
  std::printf("  cycles                 %zu\n", res.trace.rows.size());
  std::printf("  max |zmp - ref|  x/y   %.6f / %.6f m\n", m.max_ref_dev[0],
              m.max_ref_dev[1]);
  std::printf("  hard violations        %d\n", m.hard_violations);
  std::printf("  slack activations      %d\n", m.slack_activations);
  std::printf("  max DCM-support dist   %.6f m\n", m.max_dcm_dist);
  if (!out_path.empty()) {
    tvmpc::emit_csv(res.trace, out_path);
    std::printf("  trace written to       %s\n", out_path.c_str());
  }
  return (m.completed && m.hard_violations == 0) ? 0 : 1;
}

int cmd_list() {
  for (const auto& cfg : tvmpc::builtin_scenarios()) {
    std::printf("%-12s steps=%d stair=%.2f noise=%.3f height_off=%+.2f",
                cfg.name.c_str(), cfg.steps, cfg.stair_rise, cfg.noise_bound,
                cfg.plant_height_offset);
    for (const auto& p : cfg.pushes) {
      std::printf(" push=(%.0f,%.0f)N@%.2fs/%.0fms", p.force.x(), p.force.y(),
                  p.start, p.duration * 1000);
    }
    std::printf("\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-varying MPC biped locomotion planner"};
  app.require_subcommand(1);

  std::string target;
  std::string out_path;
  std::uint64_t seed = 0;
  std::vector<std::string> overrides;

  CLI::App* run = app.add_subcommand("run", "Run a scenario");
  run->add_option("scenario", target,
                  "Builtin scenario name or config file path")
      ->required();
  run->add_option("--out", out_path, "Write the CSV trace to this path");
  CLI::Option* seed_opt =
      run->add_option("--seed", seed, "Override the RNG seed");
  run->add_option("--override", overrides,
                  "Config override key=value (repeatable)");

  CLI::App* list = app.add_subcommand("list", "List builtin scenarios");
  CLI::App* verify =
      app.add_subcommand("verify", "Run the acceptance suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(target, out_path, seed_opt->count() > 0, seed,
                     overrides);
    }
    if (list->parsed()) {
      return cmd_list();
    }
    if (verify->parsed()) {
      return tvmpc::print_acceptance(std::cout) ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
