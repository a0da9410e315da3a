#include "fpih/rl/env.hpp"

#include <stdexcept>

namespace fpih::rl {

PegEnv::PegEnv(EnvConfig cfg, std::uint64_t seed, int env_index)
    : cfg_(std::move(cfg)),
      seed_(seed),
      env_index_(env_index),
      sensor_(cfg_.sensor) {
  cfg_.gains = control::with_critical_kd(cfg_.gains, cfg_.body);
  cfg_.hole_pos.z() = cfg_.geom.table_height;
  prev_action_ = VecX::Zero(ObsSpec::make(cfg_.mode).prev_action_dim);
  reset();
}

void PegEnv::reset() {
  episode_seed_ = derive_seed(seed_, std::uint64_t(env_index_),
                              std::uint64_t(episode_));
  rng_ = RandomStream(episode_seed_);
  episode_ += 1;
  state_ = sim::reset(rng_, cfg_.geom, cfg_.spawn, cfg_.hole_pos, cfg_.hole_yaw);
  sensor_.reset();
  hole_obs_offset_ = Vec3::Zero();
  if (cfg_.noise.hole_mode == ObsNoiseConfig::HoleMode::UniformFixed) {
    const double hw = cfg_.noise.hole_uniform_halfwidth;
    hole_obs_offset_ = Vec3(rng_.uniform(-hw, hw), rng_.uniform(-hw, hw), 0.0);
  }
  prev_action_.setZero();
  policy_step_ = 0;
  success_paid_ = false;
  done_ = false;
  if (recording_) {
    traj_ = Trajectory{};
    traj_.episode = static_cast<int>(episode_ - 1);
    traj_.seed = episode_seed_;
    traj_.hole_pos = cfg_.hole_pos;
    traj_.hole_yaw = cfg_.hole_yaw;
    traj_.clearance = cfg_.geom.clearance();
    traj_.table_height = cfg_.geom.table_height;
    traj_.hole_depth = cfg_.geom.hole_depth;
  }
  rebuild_obs();
}

void PegEnv::rebuild_obs() {
  actor_obs_ = build_actor_obs(state_, prev_action_, cfg_.noise,
                               hole_obs_offset_, rng_);
  critic_obs_ = build_critic_obs(state_, prev_action_);
}

StepResult PegEnv::step(const HybridAction& a) {
  if (done_)
    throw std::logic_error("PegEnv::step called on a finished episode");

  if (recording_) {
    TrajStep ts;
    ts.t = policy_step_;
    ts.ee_pos = state_.ee_pos;
    ts.ee_vel = state_.ee_vel;
    ts.contact_force = state_.contact_force;
    ts.contact_flags = state_.contact_flags;
    ts.broken = state_.broken;
    ts.action = a;
    traj_.steps.push_back(ts);
  }

  control::ControlCommand cmd;
  cmd.pose_selected = a.pose_selected;
  const Vec3 lo = cfg_.hole_pos.array() - cfg_.workspace_halfwidth;
  const Vec3 hi = cfg_.hole_pos.array() + cfg_.workspace_halfwidth;
  cmd.pose_target =
      (state_.ee_pos + a.pose_delta).cwiseMax(lo).cwiseMin(hi);
  cmd.yaw_target = wrap_angle(state_.ee_yaw + a.yaw_delta);
  cmd.force_target = a.force_target;
  if (a.has_gains) cmd.kp_override = a.kp_gain;

  control::LowLevelStats stats;
  state_ = control::run_lowlevel(cmd, state_, cfg_.geom, cfg_.contact,
                                 cfg_.body, cfg_.gains, sensor_, rng_,
                                 cfg_.substeps, cfg_.dt, &stats);
  policy_step_ += 1;

  StepResult r;
  r.energy = stats.energy;
  const bool success_now = sim::is_success(state_, cfg_.geom);
  r.first_success = success_now && !success_paid_;
  if (r.first_success) success_paid_ = true;
  r.reward = reward(state_, cfg_.geom, cfg_.reward, r.first_success);
  r.broke = state_.broken;
  r.timeout = !r.broke && policy_step_ >= cfg_.horizon;
  r.done = r.broke || r.timeout ||
           (cfg_.terminate_on_success && r.first_success);
  done_ = r.done;

  if (recording_) {
    traj_.success = success_paid_;
    traj_.broke = state_.broken;
  }

  prev_action_ = encode_prev_action(a, cfg_.mode, cfg_.scales);
  if (!done_) rebuild_obs();
  return r;
}

}  // namespace fpih::rl
