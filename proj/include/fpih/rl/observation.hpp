#pragma once

#include <nlohmann/json_fwd.hpp>

#include "fpih/act/distribution.hpp"
#include "fpih/random.hpp"
#include "fpih/sim/types.hpp"

namespace fpih::rl {

using act::ActionMode;

// Hole-pose observation noise. Gaussian is the training distribution
// (resampled every step); UniformFixed draws one offset per episode, the
// localization-error model used by the noise sweeps.
struct ObsNoiseConfig {
  enum class HoleMode { Gaussian, UniformFixed };
  HoleMode hole_mode = HoleMode::Gaussian;
  double hole_sigma = 0.001;            // m, Gaussian mode
  double hole_uniform_halfwidth = 0.0;  // m, UniformFixed mode
  double hole_yaw_sigma = 0.01;         // rad, per step
  double force_sigma = 1.0;             // N, per step
};

// Actor: noisy relative position ee->hole (3), relative hole yaw (1),
// ee velocity (4), applied force estimate (3), previous action.
// Critic: noiseless variants plus true contact flags and absolute peg/hole
// poses. The critic-only fields are the privileged information the actor
// never sees.
struct ObsSpec {
  ActionMode mode = ActionMode::Pose;
  int prev_action_dim = 0;
  int actor_dim = 0;
  int critic_dim = 0;

  static ObsSpec make(ActionMode mode);
};

// Per-step draw order is fixed: hole xyz noise (Gaussian mode), yaw noise,
// force noise.
VecX build_actor_obs(const sim::SimState& s, const VecX& prev_action,
                     const ObsNoiseConfig& noise, const Vec3& hole_offset,
                     RandomStream& rng);

VecX build_critic_obs(const sim::SimState& s, const VecX& prev_action);

// Normalized previous-action encoding appended to both observations.
VecX encode_prev_action(const act::HybridAction& a, ActionMode mode,
                        const act::ActionScales& scales);

// Running mean/variance normalizer (Welford). Observations are standardized
// and clipped to +/-10.
class RunningNormalizer {
 public:
  RunningNormalizer() = default;
  explicit RunningNormalizer(int dim)
      : count_(0.0), mean_(VecX::Zero(dim)), m2_(VecX::Zero(dim)) {}

  void update(const VecX& x);
  VecX normalize(const VecX& x) const;
  int dim() const { return static_cast<int>(mean_.size()); }

  nlohmann::json to_json() const;
  static RunningNormalizer from_json(const nlohmann::json& j);

 private:
  double count_ = 0.0;
  VecX mean_, m2_;
};

}  // namespace fpih::rl
