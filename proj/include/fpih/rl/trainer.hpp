#pragma once

#include <atomic>
#include <filesystem>

#include "fpih/cfg/config.hpp"

namespace fpih::rl {

struct TrainResult {
  int updates = 0;
  long env_steps = 0;
  double best_success = 0.0;
  std::filesystem::path best_checkpoint;
  std::filesystem::path final_checkpoint;
  std::filesystem::path metrics_path;
};

// Full checkpoint: networks, optimizer moments, observation normalizers,
// the action-vector layout, and a config snapshot, all keyed by
// {build version, config hash, seed}.
nlohmann::json make_checkpoint(const cfg::ExperimentConfig& cfg,
                               const net::Network& policy,
                               const net::AdamState& policy_opt,
                               const net::Network& critic,
                               const net::AdamState& critic_opt,
                               const RunningNormalizer& actor_norm,
                               const RunningNormalizer& critic_norm,
                               int update_idx, long env_steps,
                               double train_success_rate);

// Rollout -> GAE -> PPO loop. Writes into out_dir: config.json (snapshot),
// metrics.jsonl (one record per update), checkpoints/, best.json (highest
// training success rate), final.json. An interrupt flag, when set, flushes a
// final checkpoint and returns early.
TrainResult train(const cfg::ExperimentConfig& cfg,
                  const std::filesystem::path& out_dir,
                  const std::atomic<bool>* interrupt = nullptr,
                  bool quiet = false);

}  // namespace fpih::rl
