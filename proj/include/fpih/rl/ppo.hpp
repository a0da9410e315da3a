#pragma once

#include <span>

#include "fpih/net/adam.hpp"
#include "fpih/rl/rollout.hpp"
#include "fpih/rl/ssl.hpp"

namespace fpih::rl {

struct PPOHyper {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.2;
  double entropy_coef = 0.003;
  double value_coef = 0.5;
  double beta_ssl = 0.1;
  int epochs = 4;
  int minibatches = 8;
  double lr = 3e-4;
  bool ssl_whole_trunk = true;  // false: selection supervision stops at the head layer
};

struct LossReport {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double ssl = 0.0;
  double clip_frac = 0.0;
  double kl = 0.0;
  int skipped_minibatches = 0;
};

// Clipped-surrogate loss over the given columns plus value MSE, the entropy
// surrogate -mean(log pi(stored sample)), and the selection supervision for
// hybrid modes. Deterministic in the parameters (no fresh sampling), so its
// gradient is finite-difference checkable. Gradients are accumulated into
// grad_policy / grad_critic when non-null.
double ppo_loss(const RolloutBatch& batch, std::span<const int> cols,
                const net::Network& policy, const net::Network& critic,
                const PPOHyper& hyper, const ActionScales& scales,
                VecX* grad_policy, VecX* grad_critic,
                LossReport* report = nullptr);

// Runs epochs x minibatches of optimizer steps over the batch. Minibatch
// order is shuffled with shuffle_rng; a minibatch whose loss or gradients are
// non-finite is skipped and counted.
LossReport ppo_update(const RolloutBatch& batch, net::Network& policy,
                      net::AdamState& policy_opt, net::Network& critic,
                      net::AdamState& critic_opt, const PPOHyper& hyper,
                      const ActionScales& scales, RandomStream& shuffle_rng);

}  // namespace fpih::rl
