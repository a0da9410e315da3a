#include "fpih/act/heads.hpp"

#include <stdexcept>

namespace fpih::act {

std::string mode_name(ActionMode m) {
  switch (m) {
    case ActionMode::Pose: return "pose";
    case ActionMode::Vices: return "vices";
    case ActionMode::HybridBasic: return "hybrid_basic";
    case ActionMode::Match: return "match";
  }
  return "?";
}

ActionMode mode_from_name(const std::string& s) {
  if (s == "pose") return ActionMode::Pose;
  if (s == "vices") return ActionMode::Vices;
  if (s == "hybrid_basic") return ActionMode::HybridBasic;
  if (s == "match") return ActionMode::Match;
  throw std::invalid_argument("unknown action mode: " + s);
}

HeadLayout HeadLayout::make(ActionMode mode) {
  HeadLayout h;
  h.mode = mode;
  int k = 0;
  for (int i = 0; i < 4; ++i) h.mu_pose[i] = k++;
  for (int i = 0; i < 4; ++i) h.s_pose[i] = k++;
  if (is_hybrid(mode)) {
    for (int i = 0; i < 3; ++i) h.mu_force[i] = k++;
    for (int i = 0; i < 3; ++i) h.s_force[i] = k++;
    for (int i = 0; i < 3; ++i) h.sel[i] = k++;
  } else if (mode == ActionMode::Vices) {
    for (int i = 0; i < 3; ++i) h.mu_gain[i] = k++;
    for (int i = 0; i < 3; ++i) h.s_gain[i] = k++;
  }
  h.n_raw = k;
  return h;
}

PolicyHeads PolicyHeads::from_raw(const HeadLayout& layout, VecX raw,
                                  double sigma_scale) {
  if (raw.size() != layout.n_raw)
    throw std::invalid_argument("PolicyHeads::from_raw: raw vector has " +
                                std::to_string(raw.size()) + " entries, layout needs " +
                                std::to_string(layout.n_raw));
  PolicyHeads h;
  h.layout = &layout;
  h.raw = std::move(raw);
  for (int i = 0; i < 4; ++i) {
    h.mu_pose[i] = h.raw[layout.mu_pose[i]];
    h.sigma_pose[i] =
        sigma_scale * (softplus(h.raw[layout.s_pose[i]]) + kSigmaFloor);
  }
  if (is_hybrid(layout.mode)) {
    for (int i = 0; i < 3; ++i) {
      h.mu_force[i] = h.raw[layout.mu_force[i]];
      h.sigma_force[i] =
          sigma_scale * (softplus(h.raw[layout.s_force[i]]) + kSigmaFloor);
      h.phi_force[i] = logistic(h.raw[layout.sel[i]]);
    }
  } else if (layout.mode == ActionMode::Vices) {
    for (int i = 0; i < 3; ++i) {
      h.mu_gain[i] = h.raw[layout.mu_gain[i]];
      h.sigma_gain[i] =
          sigma_scale * (softplus(h.raw[layout.s_gain[i]]) + kSigmaFloor);
    }
  }
  return h;
}

}  // namespace fpih::act
