// fpih: train / eval / sweep / analyze for the fragile peg-in-hole task.
//
// Exit codes: 0 success, 2 config error, 3 artifact-version error,
// 4 runtime failure.

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "fpih/eval/phase.hpp"
#include "fpih/rl/trainer.hpp"

namespace {

using namespace fpih;
using nlohmann::json;

std::atomic<bool> g_interrupt{false};

void handle_sigint(int) { g_interrupt.store(true); }

json load_config_json(const std::string& config_path,
                      const std::string& preset,
                      const std::vector<std::string>& overrides,
                      std::optional<long> seed) {
  json j;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in)
      throw cfg::ConfigError("config: cannot open '" + config_path + "'");
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw cfg::ConfigError("config: " + config_path + ": " + e.what());
    }
    // accept run-directory snapshots ({version, config_hash, seed, config})
    if (j.is_object() && j.contains("config") && j.contains("config_hash"))
      j = j["config"];
  } else {
    j = cfg::preset_json(preset.empty() ? "desk" : preset);
  }
  for (const auto& ov : overrides) cfg::apply_override(j, ov);
  if (seed) cfg::apply_override(j, "trainer.seed=" + std::to_string(*seed));
  return j;
}

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p);
  out << s;
}

json artifact_meta(const cfg::ExperimentConfig& c, std::uint64_t seed) {
  return {{"version", kBuildVersion}, {"config_hash", c.hash()}, {"seed", seed}};
}

int cmd_train(const std::string& config_path, const std::string& preset,
              const std::vector<std::string>& overrides,
              std::optional<long> seed, const std::string& out_dir) {
  const json j = load_config_json(config_path, preset, overrides, seed);
  const cfg::ExperimentConfig c = cfg::ExperimentConfig::from_json(j);
  std::signal(SIGINT, handle_sigint);
  const rl::TrainResult r = rl::train(c, out_dir, &g_interrupt);
  std::cout << "trained " << r.updates << " updates (" << r.env_steps
            << " env steps), best training success " << r.best_success
            << "\nbest checkpoint: " << r.best_checkpoint.string()
            << "\nmetrics: " << r.metrics_path.string() << std::endl;
  return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& out_dir,
             const std::vector<std::string>& overrides,
             std::optional<long> episodes, bool dump_traj) {
  const eval::LoadedPolicy policy = eval::LoadedPolicy::load(ckpt_path);
  cfg::ExperimentConfig c = policy.config;
  if (!overrides.empty()) {
    json j = c.to_json();
    for (const auto& ov : overrides) cfg::apply_override(j, ov);
    c = cfg::ExperimentConfig::from_json(j);
  }
  eval::EvalCase ec;
  ec.episodes = episodes ? static_cast<int>(*episodes) : c.eval_episodes;
  ec.seed = c.eval_seed;
  ec.noise = c.eval_noise;
  ec.sigma_scale = c.eval_sigma_scale;
  ec.threads = c.threads;

  std::filesystem::create_directories(out_dir);
  std::vector<rl::Trajectory> trajs;
  const eval::EvalMetrics m =
      eval::evaluate(policy.as_fn(), c.env_config(/*eval_mode=*/true), ec,
                     dump_traj ? &trajs : nullptr);

  json agg = m.to_json();
  agg["meta"] = artifact_meta(c, ec.seed);
  agg["mode"] = act::mode_name(policy.mode);
  write_text(std::filesystem::path(out_dir) / "aggregate.json",
             agg.dump(2) + "\n");
  eval::write_episodes_jsonl(std::filesystem::path(out_dir) / "episodes.jsonl",
                             m, agg["meta"]);
  if (dump_traj)
    eval::write_trajectories_jsonl(
        std::filesystem::path(out_dir) / "trajectories.jsonl", trajs,
        agg["meta"]);
  std::cout << agg.dump(2) << std::endl;
  return 0;
}

int cmd_sweep(const std::string& ckpt_path, const std::string& out_dir,
              const std::vector<std::string>& overrides,
              std::vector<double> levels, std::optional<long> per_level) {
  const eval::LoadedPolicy policy = eval::LoadedPolicy::load(ckpt_path);
  cfg::ExperimentConfig c = policy.config;
  if (!overrides.empty()) {
    json j = c.to_json();
    for (const auto& ov : overrides) cfg::apply_override(j, ov);
    c = cfg::ExperimentConfig::from_json(j);
  }
  if (levels.empty()) levels = c.noise_levels_mm;
  eval::EvalCase base;
  base.seed = c.eval_seed;
  base.noise = c.eval_noise;
  base.sigma_scale = c.eval_sigma_scale;
  base.threads = c.threads;
  const int n = per_level ? static_cast<int>(*per_level) : c.sweep_episodes;

  const auto rows = eval::noise_sweep(policy.as_fn(),
                                      c.env_config(/*eval_mode=*/true), levels,
                                      n, base);
  std::filesystem::create_directories(out_dir);
  write_text(std::filesystem::path(out_dir) / "sweep.csv",
             eval::sweep_csv(act::mode_name(policy.mode), c.seed, rows));
  json out = json::array();
  for (const auto& r : rows) {
    json row = r.metrics.to_json();
    row["noise_level_mm"] = r.level_mm;
    out.push_back(row);
  }
  json doc = {{"meta", artifact_meta(c, base.seed)}, {"levels", out}};
  write_text(std::filesystem::path(out_dir) / "sweep.json", doc.dump(2) + "\n");
  std::cout << doc.dump(2) << std::endl;
  return 0;
}

int cmd_analyze(const std::string& run_dir, const std::string& out_dir) {
  const auto traj_path = std::filesystem::path(run_dir) / "trajectories.jsonl";
  json meta;
  const auto trajs = eval::read_trajectories_jsonl(traj_path, &meta);
  const eval::PhaseProfile profile = eval::aggregate_phase_profile(trajs);
  const eval::SelectionContactStats stats = eval::selection_contact_stats(trajs);

  std::filesystem::create_directories(out_dir);
  write_text(std::filesystem::path(out_dir) / "phase_profile.csv",
             profile.to_csv());
  json doc = {{"meta", meta},
              {"selection_contact", stats.to_json()},
              {"episodes", profile.episodes_total},
              {"mean_phase_fractions",
               {{"approach", profile.mean_phase_fraction[0]},
                {"contact", profile.mean_phase_fraction[1]},
                {"insertion", profile.mean_phase_fraction[2]}}}};
  write_text(std::filesystem::path(out_dir) / "selection_stats.json",
             doc.dump(2) + "\n");
  std::cout << doc.dump(2) << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fragile peg-in-hole: hybrid position-force RL"};
  app.require_subcommand(1);

  std::string config_path, preset, out_dir, ckpt_path, run_dir;
  std::vector<std::string> overrides;
  std::optional<long> seed, episodes, per_level;
  std::vector<double> levels;
  bool dump_traj = false;

  auto* train = app.add_subcommand("train", "train a policy");
  train->add_option("--config", config_path, "config file (JSON)");
  train->add_option("--preset", preset,
                    "built-in preset: smoke, desk, easy, paper-nominal");
  train->add_option("--set", overrides, "dotted-path override, e.g. trainer.seed=7");
  train->add_option("--seed", seed, "shorthand for trainer.seed");
  train->add_option("--out", out_dir, "run directory")->required();

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  ev->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
  ev->add_option("--out", out_dir, "output directory")->required();
  ev->add_option("--set", overrides, "config override");
  ev->add_option("--episodes", episodes, "episode count");
  ev->add_flag("--dump-trajectories", dump_traj, "write trajectories.jsonl");

  auto* sw = app.add_subcommand("sweep", "hole-localization noise sweep");
  sw->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
  sw->add_option("--out", out_dir, "output directory")->required();
  sw->add_option("--set", overrides, "config override");
  sw->add_option("--levels", levels, "uniform half-widths in mm");
  sw->add_option("--episodes-per-level", per_level, "episodes per level");

  auto* an = app.add_subcommand("analyze", "phase/selection analysis of stored trajectories");
  an->add_option("--run", run_dir, "directory containing trajectories.jsonl")->required();
  an->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed())
      return cmd_train(config_path, preset, overrides, seed, out_dir);
    if (ev->parsed())
      return cmd_eval(ckpt_path, out_dir, overrides, episodes, dump_traj);
    if (sw->parsed())
      return cmd_sweep(ckpt_path, out_dir, overrides, levels, per_level);
    if (an->parsed()) return cmd_analyze(run_dir, out_dir);
  } catch (const fpih::cfg::VersionError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 3;
  } catch (const fpih::cfg::ConfigError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 4;
  }
  return 0;
}
