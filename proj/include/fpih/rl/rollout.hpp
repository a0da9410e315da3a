#pragma once

#include <vector>

#include "fpih/net/network.hpp"
#include "fpih/rl/env.hpp"

namespace fpih::rl {

// Fixed-horizon on-policy batch across N environments. Column index is
// t * N + env; observations are stored post-normalization (what the policy
// consumed).
struct RolloutBatch {
  int T = 0, N = 0;
  ActionMode mode = ActionMode::Match;
  MatX actor_obs;   // actor_dim x (T*N)
  MatX critic_obs;  // critic_dim x (T*N)
  MatX pose_z;      // 4 x (T*N)
  MatX force_n;     // 3 x (T*N)
  MatX gain_z;      // 3 x (T*N)
  Eigen::Matrix<std::uint8_t, 3, Eigen::Dynamic> pose_sel;  // 3 x (T*N)
  MatX psi;         // 3 x (T*N) contact labels at action time
  VecX logp_old;    // T*N
  MatX rewards;     // T x N
  MatX values;      // T x N
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> dones;  // T x N
  VecX bootstrap;   // N
  VecX advantages, returns;  // T*N, filled after GAE

  // episode statistics over the window
  int episodes_finished = 0;
  int episodes_success = 0;
  int episodes_broken = 0;
  double mean_reward = 0.0;
};

// Rebuilds the stored draws of one column as an ActionSample (squashed
// actions and cached per-axis log-probs are not repopulated).
act::ActionSample sample_from_batch(const RolloutBatch& b, int col);

// Steps all environments for T policy steps against frozen parameters,
// updating the running normalizers along the way. sampler_rngs must hold one
// persistent stream per environment. threads > 1 parallelizes the
// environment stepping; results are bit-identical for any thread count.
RolloutBatch collect_rollout(std::vector<PegEnv>& envs,
                             const net::Network& policy,
                             const net::Network& critic,
                             RunningNormalizer& actor_norm,
                             RunningNormalizer& critic_norm,
                             const ActionScales& scales, ActionMode mode,
                             int T, std::vector<RandomStream>& sampler_rngs,
                             int threads);

}  // namespace fpih::rl
