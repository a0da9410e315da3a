#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fpih/rl/env.hpp"
#include "fpih/rl/ppo.hpp"

namespace fpih::cfg {

using nlohmann::json;

// Config problems carry the dotted path of the offending key (and, for parse
// errors, the line/column in the file).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct VersionError : std::runtime_error {
  explicit VersionError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ExperimentConfig {
  // task
  sim::TaskGeometry geom;
  bool unbreakable = false;
  sim::ContactParams contact;
  sim::BodyParams body;
  sim::SpawnConfig spawn;
  double dt = 1.0 / 120.0;
  int substeps = 8;
  int horizon = 150;

  // controller
  control::ControllerGains gains;
  bool kd_is_critical = true;  // "kd": null in the file
  control::ForceSensorConfig sensor;
  double workspace_halfwidth = 0.5;

  // policy
  act::ActionMode mode = act::ActionMode::Match;
  int policy_latent = 64;
  int policy_blocks = 2;
  int critic_latent = 128;
  int critic_blocks = 2;
  act::ActionScales scales;
  double selection_bias_target = 0.93;
  double sigma_scale = 1.0;

  // trainer
  rl::PPOHyper hyper;
  int num_envs = 64;
  long total_steps = 2000000;
  std::uint64_t seed = 1;
  int threads = 1;
  int checkpoint_every = 25;
  rl::ObsNoiseConfig train_noise;
  rl::RewardConfig reward;

  // eval
  int eval_episodes = 100;
  std::uint64_t eval_seed = 9000;
  double eval_sigma_scale = 1.0;
  rl::ObsNoiseConfig eval_noise;
  std::vector<double> noise_levels_mm = {1.0, 2.5, 5.0, 7.5};
  int sweep_episodes = 200;

  json to_json() const;
  static ExperimentConfig from_json(const json& j);

  // FNV-1a over the canonical dump; embedded in every output artifact.
  std::string hash() const;

  // Environment assembly. eval_mode switches to the eval noise block,
  // applies the deployment sigma scale, and terminates episodes at first
  // success so time-to-success is defined.
  rl::EnvConfig env_config(bool eval_mode) const;
};

// Built-in presets: "smoke", "desk", "easy", "paper-nominal".
json preset_json(const std::string& name);
std::vector<std::string> preset_names();

ExperimentConfig load_config_file(const std::filesystem::path& path);

// Dotted-path overrides ("trainer.seed=7"); values parse as JSON when
// possible, otherwise as strings.
void apply_override(json& j, const std::string& assignment);

std::string json_hash(const json& j);

}  // namespace fpih::cfg
