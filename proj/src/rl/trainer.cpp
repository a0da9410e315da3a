#include "fpih/rl/trainer.hpp"

#include <fstream>
#include <iostream>

#include "fpih/net/checkpoint.hpp"
#include "fpih/rl/gae.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fpih::rl {

namespace {

using nlohmann::json;

json layout_to_json(const act::HeadLayout& L) {
  auto arr4 = [](const std::array<int, 4>& a) {
    return json{a[0], a[1], a[2], a[3]};
  };
  auto arr3 = [](const std::array<int, 3>& a) { return json{a[0], a[1], a[2]}; };
  return {{"mode", act::mode_name(L.mode)},
          {"n_raw", L.n_raw},
          {"mu_pose", arr4(L.mu_pose)},
          {"s_pose", arr4(L.s_pose)},
          {"mu_force", arr3(L.mu_force)},
          {"s_force", arr3(L.s_force)},
          {"sel", arr3(L.sel)},
          {"mu_gain", arr3(L.mu_gain)},
          {"s_gain", arr3(L.s_gain)}};
}

void write_json(const std::filesystem::path& p, const json& j) {
  std::ofstream out(p);
  out << j.dump(2) << "\n";
}

}  // namespace

json make_checkpoint(const cfg::ExperimentConfig& cfg,
                     const net::Network& policy,
                     const net::AdamState& policy_opt,
                     const net::Network& critic,
                     const net::AdamState& critic_opt,
                     const RunningNormalizer& actor_norm,
                     const RunningNormalizer& critic_norm, int update_idx,
                     long env_steps, double train_success_rate) {
  return {{"kind", "fpih-checkpoint"},
          {"version", kBuildVersion},
          {"config_hash", cfg.hash()},
          {"seed", cfg.seed},
          {"mode", act::mode_name(cfg.mode)},
          {"action_layout", layout_to_json(act::HeadLayout::make(cfg.mode))},
          {"policy", net::network_to_json(policy)},
          {"critic", net::network_to_json(critic)},
          {"policy_adam", net::adam_to_json(policy_opt)},
          {"critic_adam", net::adam_to_json(critic_opt)},
          {"actor_norm", actor_norm.to_json()},
          {"critic_norm", critic_norm.to_json()},
          {"update_idx", update_idx},
          {"env_steps", env_steps},
          {"train_success_rate", train_success_rate},
          {"config", cfg.to_json()}};
}

TrainResult train(const cfg::ExperimentConfig& cfg,
                  const std::filesystem::path& out_dir,
                  const std::atomic<bool>* interrupt, bool quiet) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  fs::create_directories(out_dir / "checkpoints");

#ifdef _OPENMP
  omp_set_num_threads(std::max(1, cfg.threads));
#endif
  Eigen::setNbThreads(std::max(1, cfg.threads));

  const auto env_cfg = cfg.env_config(/*eval_mode=*/false);
  const ObsSpec spec = ObsSpec::make(cfg.mode);
  const act::HeadLayout layout = act::HeadLayout::make(cfg.mode);

  std::vector<PegEnv> envs;
  envs.reserve(cfg.num_envs);
  for (int i = 0; i < cfg.num_envs; ++i)
    envs.emplace_back(env_cfg, cfg.seed, i);

  RandomStream init_rng(derive_seed(cfg.seed, 0xA11CE));
  net::Network policy(net::Topology::mlp_resnet(spec.actor_dim,
                                                cfg.policy_latent,
                                                cfg.policy_blocks, layout.n_raw,
                                                /*head_scale=*/0.01));
  policy.init(init_rng);
  net::Network critic(net::Topology::mlp_resnet(spec.critic_dim,
                                                cfg.critic_latent,
                                                cfg.critic_blocks, 1));
  critic.init(init_rng);
  if (act::is_hybrid(cfg.mode))
    act::init_selection_bias(policy, layout, cfg.selection_bias_target);

  net::AdamState policy_opt, critic_opt;
  policy_opt.init(policy.param_count());
  critic_opt.init(critic.param_count());
  RunningNormalizer actor_norm(spec.actor_dim), critic_norm(spec.critic_dim);

  std::vector<RandomStream> sampler_rngs;
  for (int i = 0; i < cfg.num_envs; ++i)
    sampler_rngs.emplace_back(derive_seed(cfg.seed, 0x5A3C, i));
  RandomStream shuffle_rng(derive_seed(cfg.seed, 0x5FFE));

  write_json(out_dir / "config.json",
             json{{"version", kBuildVersion},
                  {"config_hash", cfg.hash()},
                  {"seed", cfg.seed},
                  {"config", cfg.to_json()}});

  std::ofstream metrics(out_dir / "metrics.jsonl");
  metrics << json{{"meta",
                   {{"version", kBuildVersion},
                    {"config_hash", cfg.hash()},
                    {"seed", cfg.seed}}}}
                 .dump()
          << "\n";

  const long steps_per_update = long(cfg.num_envs) * cfg.horizon;
  const int n_updates =
      static_cast<int>(cfg.total_steps / steps_per_update);

  TrainResult result;
  result.metrics_path = out_dir / "metrics.jsonl";
  double best_success = -1.0;

  auto save = [&](const fs::path& p, int update_idx, long env_steps,
                  double success) {
    write_json(p, make_checkpoint(cfg, policy, policy_opt, critic, critic_opt,
                                  actor_norm, critic_norm, update_idx,
                                  env_steps, success));
  };

  long env_steps = 0;
  for (int update = 1; update <= n_updates; ++update) {
    RolloutBatch batch =
        collect_rollout(envs, policy, critic, actor_norm, critic_norm,
                        cfg.scales, cfg.mode, cfg.horizon, sampler_rngs,
                        cfg.threads);
    env_steps += steps_per_update;

    const GaeResult gae =
        compute_gae(batch.rewards, batch.values, batch.dones, batch.bootstrap,
                    cfg.hyper.gamma, cfg.hyper.gae_lambda, /*normalize=*/true);
    // reshape T x N to the flat column order t*N + i
    batch.advantages = VecX(batch.T * batch.N);
    batch.returns = VecX(batch.T * batch.N);
    for (int t = 0; t < batch.T; ++t)
      for (int i = 0; i < batch.N; ++i) {
        batch.advantages[t * batch.N + i] = gae.advantages(t, i);
        batch.returns[t * batch.N + i] = gae.returns(t, i);
      }

    const LossReport report =
        ppo_update(batch, policy, policy_opt, critic, critic_opt, cfg.hyper,
                   cfg.scales, shuffle_rng);

    const double success_rate =
        batch.episodes_finished > 0
            ? double(batch.episodes_success) / batch.episodes_finished
            : 0.0;
    const double break_rate =
        batch.episodes_finished > 0
            ? double(batch.episodes_broken) / batch.episodes_finished
            : 0.0;

    metrics << json{{"update_idx", update},
                    {"env_steps", env_steps},
                    {"success_rate", success_rate},
                    {"break_rate", break_rate},
                    {"mean_reward", batch.mean_reward},
                    {"policy_loss", report.policy_loss},
                    {"value_loss", report.value_loss},
                    {"entropy", report.entropy},
                    {"ssl_loss", report.ssl},
                    {"clip_frac", report.clip_frac},
                    {"kl", report.kl}}
                   .dump()
            << "\n";
    metrics.flush();

    if (!quiet && (update % 10 == 0 || update == n_updates)) {
      std::cout << "update " << update << "/" << n_updates << "  steps "
                << env_steps << "  success " << success_rate << "  break "
                << break_rate << "  reward " << batch.mean_reward << std::endl;
    }

    if (success_rate > best_success) {
      best_success = success_rate;
      save(out_dir / "best.json", update, env_steps, success_rate);
      result.best_checkpoint = out_dir / "best.json";
    }
    if (update % cfg.checkpoint_every == 0) {
      char name[64];
      std::snprintf(name, sizeof(name), "ckpt_%06d.json", update);
      save(out_dir / "checkpoints" / name, update, env_steps, success_rate);
    }

    result.updates = update;
    result.env_steps = env_steps;
    if (interrupt && interrupt->load()) break;
  }

  result.best_success = std::max(best_success, 0.0);
  save(out_dir / "final.json", result.updates, result.env_steps,
       result.best_success);
  result.final_checkpoint = out_dir / "final.json";
  if (result.best_checkpoint.empty())
    result.best_checkpoint = result.final_checkpoint;
  return result;
}

}  // namespace fpih::rl
