#include "fpih/rl/rollout.hpp"

#include <thread>

namespace fpih::rl {

namespace {

// Static split of [0, n) across workers; per-index results go to disjoint
// slots, so the outcome does not depend on the thread count.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = std::min(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (int i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

act::ActionSample sample_from_batch(const RolloutBatch& b, int col) {
  act::ActionSample s;
  s.z_pose = b.pose_z.col(col);
  s.n_force = b.force_n.col(col);
  s.g_gain = b.gain_z.col(col);
  for (int i = 0; i < 3; ++i) s.pose_selected[i] = b.pose_sel(i, col) != 0;
  return s;
}

RolloutBatch collect_rollout(std::vector<PegEnv>& envs,
                             const net::Network& policy,
                             const net::Network& critic,
                             RunningNormalizer& actor_norm,
                             RunningNormalizer& critic_norm,
                             const ActionScales& scales, ActionMode mode,
                             int T, std::vector<RandomStream>& sampler_rngs,
                             int threads) {
  const int N = static_cast<int>(envs.size());
  const act::HeadLayout layout = act::HeadLayout::make(mode);
  const int obs_dim = static_cast<int>(envs[0].actor_obs().size());
  const int cobs_dim = static_cast<int>(envs[0].critic_obs().size());

  RolloutBatch b;
  b.T = T;
  b.N = N;
  b.mode = mode;
  b.actor_obs = MatX::Zero(obs_dim, T * N);
  b.critic_obs = MatX::Zero(cobs_dim, T * N);
  b.pose_z = MatX::Zero(4, T * N);
  b.force_n = MatX::Zero(3, T * N);
  b.gain_z = MatX::Zero(3, T * N);
  b.pose_sel.setZero(3, T * N);
  b.psi = MatX::Zero(3, T * N);
  b.logp_old = VecX::Zero(T * N);
  b.rewards = MatX::Zero(T, N);
  b.values = MatX::Zero(T, N);
  b.dones.setZero(T, N);
  b.bootstrap = VecX::Zero(N);

  std::vector<act::HybridAction> actions(N);
  std::vector<StepResult> results(N);
  double reward_acc = 0.0;

  for (int t = 0; t < T; ++t) {
    // Normalizer updates are sequential in env order for determinism.
    for (int i = 0; i < N; ++i) {
      const int col = t * N + i;
      actor_norm.update(envs[i].actor_obs());
      critic_norm.update(envs[i].critic_obs());
      b.actor_obs.col(col) = actor_norm.normalize(envs[i].actor_obs());
      b.critic_obs.col(col) = critic_norm.normalize(envs[i].critic_obs());
      const auto labels = envs[i].contact_labels();
      for (int k = 0; k < 3; ++k) b.psi(k, col) = labels[k] ? 1.0 : 0.0;
    }
    const auto obs_block = b.actor_obs.middleCols(t * N, N);
    const MatX heads_raw = policy.forward(obs_block);
    const MatX values = critic.forward(b.critic_obs.middleCols(t * N, N));

    for (int i = 0; i < N; ++i) {
      const int col = t * N + i;
      const act::PolicyHeads h =
          act::PolicyHeads::from_raw(layout, heads_raw.col(i));
      const act::ActionSample s = act::sample(h, mode, scales, sampler_rngs[i]);
      actions[i] = s.action;
      b.pose_z.col(col) = s.z_pose;
      b.force_n.col(col) = s.n_force;
      b.gain_z.col(col) = s.g_gain;
      for (int k = 0; k < 3; ++k) b.pose_sel(k, col) = s.pose_selected[k] ? 1 : 0;
      b.logp_old[col] = s.log_prob;
      b.values(t, i) = values(0, i);
    }

    parallel_for(N, threads, [&](int i) { results[i] = envs[i].step(actions[i]); });

    for (int i = 0; i < N; ++i) {
      b.rewards(t, i) = results[i].reward;
      reward_acc += results[i].reward;
      if (results[i].done) {
        b.dones(t, i) = 1;
        b.episodes_finished += 1;
        if (envs[i].episode_reached_success()) b.episodes_success += 1;
        if (results[i].broke) b.episodes_broken += 1;
        envs[i].reset();
      }
    }
  }

  // Bootstrap values for rollouts cut before termination.
  MatX last_cobs(cobs_dim, N);
  for (int i = 0; i < N; ++i)
    last_cobs.col(i) = critic_norm.normalize(envs[i].critic_obs());
  b.bootstrap = critic.forward(last_cobs).row(0).transpose();

  b.mean_reward = reward_acc / double(T * N);
  return b;
}

}  // namespace fpih::rl
