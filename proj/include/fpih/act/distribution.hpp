#pragma once

#include "fpih/act/heads.hpp"
#include "fpih/net/network.hpp"
#include "fpih/random.hpp"

namespace fpih::act {

// The executed command: per-axis pose/force selection, squashed pose deltas,
// absolute force targets, and (variable-impedance mode) per-axis kp gains.
struct HybridAction {
  Vec3 pose_delta = Vec3::Zero();
  double yaw_delta = 0.0;
  Vec3 force_target = Vec3::Zero();
  std::array<bool, 3> pose_selected = {true, true, true};
  Vec3 kp_gain = Vec3::Zero();
  bool has_gains = false;
};

// One draw from the policy. Raw Gaussian draws for both branches are always
// retained so the joint and mode-aware log-probabilities can be evaluated on
// the same stored sample.
struct ActionSample {
  Vec4 z_pose = Vec4::Zero();  // xyz + yaw raw draws
  Vec3 n_force = Vec3::Zero();
  Vec3 g_gain = Vec3::Zero();
  std::array<bool, 3> pose_selected = {true, true, true};
  HybridAction action;
  double log_prob = 0.0;
  // per-axis component log-probs (diagnostics)
  Vec3 logp_pose_axis = Vec3::Zero();
  double logp_yaw = 0.0;
  Vec3 logp_force_axis = Vec3::Zero();
  Vec3 logp_sel_axis = Vec3::Zero();
  Vec3 logp_gain_axis = Vec3::Zero();
};

// log N(z; mu, sigma) minus the log-det of a = scale*tanh(z), evaluated in a
// form stable for large |z|: log(1 - tanh^2 z) = 2*(log 2 - z - softplus(-2z)).
double squashed_gaussian_logp(double z, double mu, double sigma, double scale);

// Per-axis component terms (axis in 0..2; yaw is axis 3 of the pose heads).
// Both factorizations below are sums of exactly these pieces.
double axis_logp_pose(const PolicyHeads& heads, double z, int axis,
                      const ActionScales& scales);
double axis_logp_force(const PolicyHeads& heads, double n, int axis,
                       const ActionScales& scales);
double axis_logp_selection(const PolicyHeads& heads, bool pose_selected,
                           int axis);
double axis_logp_gain(const PolicyHeads& heads, double g, int axis,
                      const ActionScales& scales);
double yaw_logp(const PolicyHeads& heads, double z, const ActionScales& scales);

// Pre-image of a squashed action with the boundary clamped to |a/scale| <=
// 1 - 1e-6 (used when the raw draw is not available, e.g. replayed files).
double raw_from_action(double a, double scale);

// Draws a full sample. Pose and variable-impedance modes force all-pose
// selection and leave force heads untouched. The draw order is fixed:
// pose xyz+yaw, force xyz, selection xyz, gains xyz.
ActionSample sample(const PolicyHeads& heads, ActionMode mode,
                    const ActionScales& scales, RandomStream& rng);

// Joint factorization: every axis contributes selection, pose, and force
// terms regardless of which branch the controller used.
double log_prob_joint(const PolicyHeads& heads, const ActionSample& s,
                      const ActionScales& scales);

// Mode-aware piecewise form: each axis contributes its selection term and
// only the selected branch; the unused branch's parameters do not enter.
double log_prob_match(const PolicyHeads& heads, const ActionSample& s,
                      const ActionScales& scales);

double log_prob(ActionMode mode, const PolicyHeads& heads,
                const ActionSample& s, const ActionScales& scales);

// log-probability plus its gradient with respect to the raw head vector
// (accumulated into grad_raw, which must be zero-initialized by the caller
// if a fresh gradient is wanted).
double log_prob_grad(ActionMode mode, const PolicyHeads& heads,
                     const ActionSample& s, const ActionScales& scales,
                     VecX& grad_raw);

// Monte Carlo entropy estimate: -mean log-prob over fresh samples.
double entropy_estimate(const PolicyHeads& heads, ActionMode mode,
                        const ActionScales& scales, int n_samples,
                        RandomStream& rng);

// Sets the selection-logit head biases so that at zero hidden activation the
// pose-selection probability equals target_pose_prob.
void init_selection_bias(net::Network& policy, const HeadLayout& layout,
                         double target_pose_prob);

}  // namespace fpih::act
