#pragma once

#include <array>
#include <string>

#include "fpih/core.hpp"

namespace fpih::act {

enum class ActionMode { Pose, Vices, HybridBasic, Match };

std::string mode_name(ActionMode m);
ActionMode mode_from_name(const std::string& s);

inline bool is_hybrid(ActionMode m) {
  return m == ActionMode::HybridBasic || m == ActionMode::Match;
}

// Action limits: pose targets are per-step deltas squashed to +/- pose_limit
// (yaw_limit for yaw); force targets are absolute, squashed to +/-
// force_limit; variable-impedance gains map to [kp_min, kp_max].
struct ActionScales {
  double pose_limit = 0.005;  // m per step
  double yaw_limit = 0.05;    // rad per step
  double force_limit = 10.0;  // N
  double kp_min = 50.0;
  double kp_max = 800.0;
};

// Index map from the raw network output vector to named heads. -1 marks heads
// absent in the mode. This layout is written into checkpoint headers so any
// tool can parse any policy.
struct HeadLayout {
  ActionMode mode = ActionMode::Pose;
  int n_raw = 0;
  std::array<int, 4> mu_pose = {-1, -1, -1, -1};  // xyz + yaw
  std::array<int, 4> s_pose = {-1, -1, -1, -1};   // raw (pre-softplus) sigmas
  std::array<int, 3> mu_force = {-1, -1, -1};
  std::array<int, 3> s_force = {-1, -1, -1};
  std::array<int, 3> sel = {-1, -1, -1};          // force-selection logits
  std::array<int, 3> mu_gain = {-1, -1, -1};
  std::array<int, 3> s_gain = {-1, -1, -1};

  static HeadLayout make(ActionMode mode);
};

inline constexpr double kSigmaFloor = 1e-3;

// Distribution parameters decoded from one raw head vector:
// sigma = sigma_scale * (softplus(raw) + floor), phi = sigmoid(logit) is the
// per-axis force-selection probability.
struct PolicyHeads {
  const HeadLayout* layout = nullptr;
  VecX raw;
  Vec4 mu_pose = Vec4::Zero();
  Vec4 sigma_pose = Vec4::Ones();
  Vec3 mu_force = Vec3::Zero();
  Vec3 sigma_force = Vec3::Ones();
  Vec3 phi_force = Vec3::Zero();
  Vec3 mu_gain = Vec3::Zero();
  Vec3 sigma_gain = Vec3::Ones();

  static PolicyHeads from_raw(const HeadLayout& layout, VecX raw,
                              double sigma_scale = 1.0);
};

}  // namespace fpih::act
