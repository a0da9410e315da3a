#pragma once

#include <vector>

#include "fpih/act/distribution.hpp"
#include "fpih/control/control.hpp"
#include "fpih/rl/observation.hpp"
#include "fpih/rl/reward.hpp"

namespace fpih::rl {

using act::ActionMode;
using act::ActionScales;
using act::HybridAction;

struct EnvConfig {
  sim::TaskGeometry geom;
  sim::ContactParams contact;
  sim::BodyParams body;
  sim::SpawnConfig spawn;
  control::ControllerGains gains;  // kd auto-derived when zero
  control::ForceSensorConfig sensor;
  ObsNoiseConfig noise;
  RewardConfig reward;
  ActionScales scales;
  ActionMode mode = ActionMode::Match;
  Vec3 hole_pos = Vec3::Zero();
  double hole_yaw = 0.0;
  double dt = 1.0 / 120.0;
  int substeps = 8;
  int horizon = 150;
  bool terminate_on_success = false;  // training keeps running after success
  double workspace_halfwidth = 0.5;   // m, pose-target clamp around the hole
};

struct StepResult {
  double reward = 0.0;
  bool done = false;
  bool first_success = false;  // is_success reached for the first time
  bool broke = false;
  bool timeout = false;
  double energy = 0.0;  // sum ||wrench||*||dx|| over the substeps
};

// One policy-step record: the state the action was taken in, plus the action.
struct TrajStep {
  int t = 0;
  Vec3 ee_pos = Vec3::Zero();
  Vec3 ee_vel = Vec3::Zero();
  Vec3 contact_force = Vec3::Zero();
  std::array<bool, 3> contact_flags = {false, false, false};
  bool broken = false;
  HybridAction action;
};

struct Trajectory {
  int episode = 0;
  std::uint64_t seed = 0;
  Vec3 hole_pos = Vec3::Zero();
  double hole_yaw = 0.0;
  double clearance = 0.0;
  double table_height = 0.0;
  double hole_depth = 0.0;
  bool success = false;
  bool broke = false;
  std::vector<TrajStep> steps;
};

// Single sequential environment instance: episode lifecycle, decimated
// low-level control, observation and reward plumbing. Independent instances
// share no mutable state and may run on different threads.
class PegEnv {
 public:
  PegEnv(EnvConfig cfg, std::uint64_t seed, int env_index);

  void reset();  // starts the next episode (advances the episode counter)
  StepResult step(const HybridAction& a);

  const sim::SimState& state() const { return state_; }
  const VecX& actor_obs() const { return actor_obs_; }      // raw, unnormalized
  const VecX& critic_obs() const { return critic_obs_; }

  // Ground-truth per-axis contact at the time the next action will be taken;
  // these are the selection-supervision labels.
  std::array<bool, 3> contact_labels() const { return state_.contact_flags; }

  int episode_step() const { return policy_step_; }
  bool episode_reached_success() const { return success_paid_; }
  long episode_index() const { return episode_ - 1; }
  std::uint64_t episode_seed() const { return episode_seed_; }
  const EnvConfig& config() const { return cfg_; }

  void set_recording(bool on) { recording_ = on; }
  const Trajectory& trajectory() const { return traj_; }

 private:
  void rebuild_obs();

  EnvConfig cfg_;
  std::uint64_t seed_ = 0;
  int env_index_ = 0;
  long episode_ = 0;
  std::uint64_t episode_seed_ = 0;

  RandomStream rng_;  // per-episode stream (spawn, obs noise, sensor noise)
  sim::SimState state_;
  control::ForceSensor sensor_;
  Vec3 hole_obs_offset_ = Vec3::Zero();
  VecX prev_action_;
  VecX actor_obs_, critic_obs_;
  int policy_step_ = 0;
  bool success_paid_ = false;
  bool done_ = true;

  bool recording_ = false;
  Trajectory traj_;
};

}  // namespace fpih::rl
