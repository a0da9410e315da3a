#include "fpih/rl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

namespace fpih::rl {

double ppo_loss(const RolloutBatch& batch, std::span<const int> cols,
                const net::Network& policy, const net::Network& critic,
                const PPOHyper& hyper, const ActionScales& scales,
                VecX* grad_policy, VecX* grad_critic, LossReport* report) {
  const int B = static_cast<int>(cols.size());
  const act::HeadLayout layout = act::HeadLayout::make(batch.mode);
  const bool hybrid = act::is_hybrid(batch.mode);

  MatX obs(batch.actor_obs.rows(), B);
  MatX cobs(batch.critic_obs.rows(), B);
  for (int j = 0; j < B; ++j) {
    obs.col(j) = batch.actor_obs.col(cols[j]);
    cobs.col(j) = batch.critic_obs.col(cols[j]);
  }

  net::Tape policy_tape, critic_tape;
  const MatX heads_raw =
      policy.forward(obs, grad_policy ? &policy_tape : nullptr);
  const MatX values =
      critic.forward(cobs, grad_critic ? &critic_tape : nullptr);

  MatX d_heads = MatX::Zero(layout.n_raw, B);
  MatX d_heads_ssl;  // used when selection supervision stops at the head
  const bool split_ssl = hybrid && !hyper.ssl_whole_trunk &&
                         hyper.beta_ssl > 0.0 && grad_policy;
  if (split_ssl) d_heads_ssl = MatX::Zero(layout.n_raw, B);

  double pg_acc = 0.0, ent_acc = 0.0, kl_acc = 0.0, ssl_acc = 0.0;
  int clip_count = 0;
  VecX logp_grad(layout.n_raw);

  for (int j = 0; j < B; ++j) {
    const int col = cols[j];
    const act::PolicyHeads h =
        act::PolicyHeads::from_raw(layout, heads_raw.col(j));
    const act::ActionSample s = sample_from_batch(batch, col);

    logp_grad.setZero();
    const double logp_new =
        act::log_prob_grad(batch.mode, h, s, scales, logp_grad);

    // Clamp the log-ratio before exponentiating: joint-mode ratios on
    // unused-branch draws can overflow once a branch's sigma collapses.
    const double logratio =
        std::clamp(logp_new - batch.logp_old[col], -30.0, 30.0);
    const double ratio = std::exp(logratio);
    kl_acc += (ratio - 1.0) - logratio;
    if (std::abs(ratio - 1.0) > hyper.clip) clip_count += 1;

    const double adv = batch.advantages[col];
    const double unclipped = ratio * adv;
    const double clipped =
        std::clamp(ratio, 1.0 - hyper.clip, 1.0 + hyper.clip) * adv;
    pg_acc += -std::min(unclipped, clipped);
    ent_acc += -logp_new;

    // d(total)/d(logp_new): surrogate term (only when the unclipped branch is
    // active) plus the entropy bonus.
    double d_logp = 0.0;
    if (unclipped <= clipped) d_logp += -adv * ratio / double(B);
    d_logp += hyper.entropy_coef / double(B);
    d_heads.col(j) += d_logp * logp_grad;

    if (hybrid) {
      const double inv = 1.0 / double(3 * B);
      for (int i = 0; i < 3; ++i) {
        const double phi = h.phi_force[i];
        const double psi = batch.psi(i, col);
        const double p = std::clamp(phi, 1e-6, 1.0 - 1e-6);
        ssl_acc -= psi * std::log(p) + (1.0 - psi) * std::log(1.0 - p);
        const double g = hyper.beta_ssl * ssl_logit_grad(phi, psi, inv);
        if (split_ssl)
          d_heads_ssl(layout.sel[i], j) += g;
        else
          d_heads(layout.sel[i], j) += g;
      }
    }
  }

  const double pg_loss = pg_acc / B;
  const double entropy = ent_acc / B;
  const double ssl = hybrid ? ssl_acc / double(3 * B) : 0.0;
  VecX ret(B);
  for (int j = 0; j < B; ++j) ret[j] = batch.returns[cols[j]];
  const VecX vdiff = values.row(0).transpose() - ret;
  const double value_loss = vdiff.squaredNorm() / B;

  const double total = pg_loss + hyper.value_coef * value_loss -
                       hyper.entropy_coef * entropy + hyper.beta_ssl * ssl;

  if (grad_policy) {
    policy.backward(policy_tape, d_heads, *grad_policy);
    if (split_ssl) {
      net::Tape head_tape;
      policy.forward(obs, &head_tape);
      policy.backward(head_tape, d_heads_ssl, *grad_policy, /*head_only=*/true);
    }
  }
  if (grad_critic) {
    MatX dv = (2.0 * hyper.value_coef / B) * vdiff.transpose();
    critic.backward(critic_tape, dv, *grad_critic);
  }

  if (report) {
    report->policy_loss = pg_loss;
    report->value_loss = value_loss;
    report->entropy = entropy;
    report->ssl = ssl;
    report->clip_frac = double(clip_count) / B;
    report->kl = kl_acc / B;
  }
  return total;
}

LossReport ppo_update(const RolloutBatch& batch, net::Network& policy,
                      net::AdamState& policy_opt, net::Network& critic,
                      net::AdamState& critic_opt, const PPOHyper& hyper,
                      const ActionScales& scales, RandomStream& shuffle_rng) {
  const int total = batch.T * batch.N;
  std::vector<int> idx(total);
  std::iota(idx.begin(), idx.end(), 0);
  const int mb_count = std::max(1, hyper.minibatches);
  const int mb_size = total / mb_count;

  net::AdamConfig adam_cfg;
  adam_cfg.lr = hyper.lr;

  LossReport agg;
  int reports = 0;
  VecX grad_policy(policy.param_count()), grad_critic(critic.param_count());

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    std::shuffle(idx.begin(), idx.end(), shuffle_rng.engine());
    for (int m = 0; m < mb_count; ++m) {
      const std::span<const int> cols(idx.data() + m * mb_size,
                                      size_t(mb_size));
      grad_policy.setZero();
      grad_critic.setZero();
      LossReport r;
      const double loss = ppo_loss(batch, cols, policy, critic, hyper, scales,
                                   &grad_policy, &grad_critic, &r);
      if (!std::isfinite(loss) || !grad_policy.allFinite() ||
          !grad_critic.allFinite()) {
        agg.skipped_minibatches += 1;
        std::cerr << "ppo_update: non-finite loss/gradient, minibatch skipped"
                  << std::endl;
        continue;
      }
      net::adam_step(policy.params(), grad_policy, policy_opt, adam_cfg);
      net::adam_step(critic.params(), grad_critic, critic_opt, adam_cfg);
      agg.policy_loss += r.policy_loss;
      agg.value_loss += r.value_loss;
      agg.entropy += r.entropy;
      agg.ssl += r.ssl;
      agg.clip_frac += r.clip_frac;
      agg.kl += r.kl;
      reports += 1;
    }
  }
  if (reports > 0) {
    agg.policy_loss /= reports;
    agg.value_loss /= reports;
    agg.entropy /= reports;
    agg.ssl /= reports;
    agg.clip_frac /= reports;
    agg.kl /= reports;
  }
  return agg;
}

}  // namespace fpih::rl
