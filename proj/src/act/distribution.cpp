#include "fpih/act/distribution.hpp"

#include <cmath>
#include <stdexcept>

namespace fpih::act {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5*log(2*pi)

double gaussian_logp(double z, double mu, double sigma) {
  const double u = (z - mu) / sigma;
  return -0.5 * u * u - std::log(sigma) - kHalfLog2Pi;
}

// log(1 - tanh^2(z)) without catastrophic underflow for |z| > ~20.
double log_sech2(double z) {
  return 2.0 * (M_LN2 - z - softplus(-2.0 * z));
}

double gain_from_draw(double g, const ActionScales& sc) {
  const double mid = 0.5 * (sc.kp_min + sc.kp_max);
  const double half = 0.5 * (sc.kp_max - sc.kp_min);
  return mid + half * std::tanh(g);
}

double sel_logp(bool pose_selected, double phi_force) {
  return std::log(pose_selected ? 1.0 - phi_force : phi_force);
}

}  // namespace

double squashed_gaussian_logp(double z, double mu, double sigma,
                              double scale) {
  return gaussian_logp(z, mu, sigma) - std::log(scale) - log_sech2(z);
}

double axis_logp_pose(const PolicyHeads& h, double z, int axis,
                      const ActionScales& sc) {
  return squashed_gaussian_logp(z, h.mu_pose[axis], h.sigma_pose[axis],
                                sc.pose_limit);
}

double axis_logp_force(const PolicyHeads& h, double n, int axis,
                       const ActionScales& sc) {
  return squashed_gaussian_logp(n, h.mu_force[axis], h.sigma_force[axis],
                                sc.force_limit);
}

double axis_logp_selection(const PolicyHeads& h, bool pose_selected,
                           int axis) {
  return sel_logp(pose_selected, h.phi_force[axis]);
}

double axis_logp_gain(const PolicyHeads& h, double g, int axis,
                      const ActionScales& sc) {
  return squashed_gaussian_logp(g, h.mu_gain[axis], h.sigma_gain[axis],
                                0.5 * (sc.kp_max - sc.kp_min));
}

double yaw_logp(const PolicyHeads& h, double z, const ActionScales& sc) {
  return squashed_gaussian_logp(z, h.mu_pose[3], h.sigma_pose[3],
                                sc.yaw_limit);
}

double raw_from_action(double a, double scale) {
  double u = a / scale;
  u = std::clamp(u, -(1.0 - 1e-6), 1.0 - 1e-6);
  return std::atanh(u);
}

ActionSample sample(const PolicyHeads& h, ActionMode mode,
                    const ActionScales& sc, RandomStream& rng) {
  ActionSample s;
  for (int i = 0; i < 4; ++i)
    s.z_pose[i] = rng.normal(h.mu_pose[i], h.sigma_pose[i]);
  if (is_hybrid(mode)) {
    for (int i = 0; i < 3; ++i)
      s.n_force[i] = rng.normal(h.mu_force[i], h.sigma_force[i]);
    for (int i = 0; i < 3; ++i)
      s.pose_selected[i] = rng.uniform01() >= h.phi_force[i];
  } else if (mode == ActionMode::Vices) {
    for (int i = 0; i < 3; ++i)
      s.g_gain[i] = rng.normal(h.mu_gain[i], h.sigma_gain[i]);
  }

  for (int i = 0; i < 3; ++i)
    s.action.pose_delta[i] = sc.pose_limit * std::tanh(s.z_pose[i]);
  s.action.yaw_delta = sc.yaw_limit * std::tanh(s.z_pose[3]);
  s.action.pose_selected = s.pose_selected;
  if (is_hybrid(mode)) {
    for (int i = 0; i < 3; ++i)
      s.action.force_target[i] = sc.force_limit * std::tanh(s.n_force[i]);
  }
  if (mode == ActionMode::Vices) {
    s.action.has_gains = true;
    for (int i = 0; i < 3; ++i) s.action.kp_gain[i] = gain_from_draw(s.g_gain[i], sc);
  }

  for (int i = 0; i < 3; ++i)
    s.logp_pose_axis[i] = squashed_gaussian_logp(s.z_pose[i], h.mu_pose[i],
                                                 h.sigma_pose[i], sc.pose_limit);
  s.logp_yaw = squashed_gaussian_logp(s.z_pose[3], h.mu_pose[3],
                                      h.sigma_pose[3], sc.yaw_limit);
  if (is_hybrid(mode)) {
    for (int i = 0; i < 3; ++i) {
      s.logp_force_axis[i] =
          squashed_gaussian_logp(s.n_force[i], h.mu_force[i], h.sigma_force[i],
                                 sc.force_limit);
      s.logp_sel_axis[i] = sel_logp(s.pose_selected[i], h.phi_force[i]);
    }
  } else if (mode == ActionMode::Vices) {
    const double half = 0.5 * (sc.kp_max - sc.kp_min);
    for (int i = 0; i < 3; ++i)
      s.logp_gain_axis[i] = squashed_gaussian_logp(s.g_gain[i], h.mu_gain[i],
                                                   h.sigma_gain[i], half);
  }
  s.log_prob = log_prob(mode, h, s, sc);
  return s;
}

double log_prob_joint(const PolicyHeads& h, const ActionSample& s,
                      const ActionScales& sc) {
  double lp = yaw_logp(h, s.z_pose[3], sc);
  for (int i = 0; i < 3; ++i) {
    lp += axis_logp_pose(h, s.z_pose[i], i, sc);
    lp += axis_logp_force(h, s.n_force[i], i, sc);
    lp += axis_logp_selection(h, s.pose_selected[i], i);
  }
  return lp;
}

double log_prob_match(const PolicyHeads& h, const ActionSample& s,
                      const ActionScales& sc) {
  double lp = yaw_logp(h, s.z_pose[3], sc);
  for (int i = 0; i < 3; ++i) {
    lp += axis_logp_selection(h, s.pose_selected[i], i);
    lp += s.pose_selected[i] ? axis_logp_pose(h, s.z_pose[i], i, sc)
                             : axis_logp_force(h, s.n_force[i], i, sc);
  }
  return lp;
}

double log_prob(ActionMode mode, const PolicyHeads& h, const ActionSample& s,
                const ActionScales& sc) {
  switch (mode) {
    case ActionMode::HybridBasic:
      return log_prob_joint(h, s, sc);
    case ActionMode::Match:
      return log_prob_match(h, s, sc);
    case ActionMode::Pose: {
      double lp = yaw_logp(h, s.z_pose[3], sc);
      for (int i = 0; i < 3; ++i) lp += axis_logp_pose(h, s.z_pose[i], i, sc);
      return lp;
    }
    case ActionMode::Vices: {
      double lp = yaw_logp(h, s.z_pose[3], sc);
      for (int i = 0; i < 3; ++i) {
        lp += axis_logp_pose(h, s.z_pose[i], i, sc);
        lp += axis_logp_gain(h, s.g_gain[i], i, sc);
      }
      return lp;
    }
  }
  throw std::logic_error("log_prob: bad mode");
}

namespace {

// d logp / d mu and d logp / d raw_sigma for one squashed-Gaussian term.
// sigma = sigma_scale*(softplus(raw)+floor); the chain factor d sigma/d raw =
// sigma_scale*logistic(raw) is what from_raw applied, so we recover it from
// the stored raw entry. The squash correction does not depend on parameters.
void gauss_grad(double z, double mu, double sigma, double s_raw,
                double sigma_scale, double& d_mu, double& d_sraw) {
  const double u = (z - mu) / sigma;
  d_mu = u / sigma;
  const double d_sigma = (u * u - 1.0) / sigma;
  d_sraw = d_sigma * sigma_scale * logistic(s_raw);
}

}  // namespace

double log_prob_grad(ActionMode mode, const PolicyHeads& h,
                     const ActionSample& s, const ActionScales& sc,
                     VecX& g) {
  const HeadLayout& L = *h.layout;
  if (g.size() != L.n_raw)
    throw std::invalid_argument("log_prob_grad: gradient size mismatch");
  // sigma_scale is folded into the cached sigmas; recover it per head from
  // sigma / (softplus(raw)+floor).
  auto scale_of = [](double sigma, double raw) {
    return sigma / (softplus(raw) + kSigmaFloor);
  };
  double d_mu, d_s;
  // yaw (always pose-controlled)
  gauss_grad(s.z_pose[3], h.mu_pose[3], h.sigma_pose[3], h.raw[L.s_pose[3]],
             scale_of(h.sigma_pose[3], h.raw[L.s_pose[3]]), d_mu, d_s);
  g[L.mu_pose[3]] += d_mu;
  g[L.s_pose[3]] += d_s;

  for (int i = 0; i < 3; ++i) {
    const bool use_pose =
        mode != ActionMode::Match || s.pose_selected[i];
    const bool use_force = is_hybrid(mode) &&
                           (mode == ActionMode::HybridBasic ||
                            !s.pose_selected[i]);
    if (use_pose) {
      gauss_grad(s.z_pose[i], h.mu_pose[i], h.sigma_pose[i],
                 h.raw[L.s_pose[i]],
                 scale_of(h.sigma_pose[i], h.raw[L.s_pose[i]]), d_mu, d_s);
      g[L.mu_pose[i]] += d_mu;
      g[L.s_pose[i]] += d_s;
    }
    if (use_force) {
      gauss_grad(s.n_force[i], h.mu_force[i], h.sigma_force[i],
                 h.raw[L.s_force[i]],
                 scale_of(h.sigma_force[i], h.raw[L.s_force[i]]), d_mu, d_s);
      g[L.mu_force[i]] += d_mu;
      g[L.s_force[i]] += d_s;
    }
    if (is_hybrid(mode)) {
      // d/d logit of log p(selection): pose -> -phi, force -> 1-phi.
      g[L.sel[i]] +=
          s.pose_selected[i] ? -h.phi_force[i] : 1.0 - h.phi_force[i];
    }
    if (mode == ActionMode::Vices) {
      gauss_grad(s.g_gain[i], h.mu_gain[i], h.sigma_gain[i],
                 h.raw[L.s_gain[i]],
                 scale_of(h.sigma_gain[i], h.raw[L.s_gain[i]]), d_mu, d_s);
      g[L.mu_gain[i]] += d_mu;
      g[L.s_gain[i]] += d_s;
    }
  }
  return log_prob(mode, h, s, sc);
}

double entropy_estimate(const PolicyHeads& h, ActionMode mode,
                        const ActionScales& sc, int n_samples,
                        RandomStream& rng) {
  if (n_samples < 1)
    throw std::invalid_argument("entropy_estimate: n_samples must be >= 1");
  double acc = 0.0;
  for (int i = 0; i < n_samples; ++i) acc += sample(h, mode, sc, rng).log_prob;
  return -acc / n_samples;
}

void init_selection_bias(net::Network& policy, const HeadLayout& layout,
                         double target_pose_prob) {
  if (!(target_pose_prob > 0.0 && target_pose_prob < 1.0))
    throw std::invalid_argument(
        "init_selection_bias: target probability must lie in (0, 1)");
  if (!is_hybrid(layout.mode))
    throw std::invalid_argument(
        "init_selection_bias: layout has no selection heads");
  // Force-logit head: sigmoid(bias) = 1 - target.
  const double bias =
      std::log((1.0 - target_pose_prob) / target_pose_prob);
  for (int i = 0; i < 3; ++i)
    policy.params()[policy.head_bias_index(layout.sel[i])] = bias;
}

}  // namespace fpih::act
