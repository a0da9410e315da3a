#include "fpih/rl/observation.hpp"

#include <nlohmann/json.hpp>

#include "fpih/net/checkpoint.hpp"

namespace fpih::rl {

ObsSpec ObsSpec::make(ActionMode mode) {
  ObsSpec o;
  o.mode = mode;
  switch (mode) {
    case ActionMode::Pose: o.prev_action_dim = 4; break;
    case ActionMode::Vices: o.prev_action_dim = 7; break;
    case ActionMode::HybridBasic:
    case ActionMode::Match: o.prev_action_dim = 10; break;
  }
  o.actor_dim = 11 + o.prev_action_dim;
  o.critic_dim = 22 + o.prev_action_dim;
  return o;
}

VecX build_actor_obs(const sim::SimState& s, const VecX& prev_action,
                     const ObsNoiseConfig& noise, const Vec3& hole_offset,
                     RandomStream& rng) {
  VecX o(11 + prev_action.size());
  Vec3 rel = s.hole_pos + hole_offset - s.ee_pos;
  if (noise.hole_mode == ObsNoiseConfig::HoleMode::Gaussian) {
    for (int i = 0; i < 3; ++i) rel[i] += rng.normal(0.0, noise.hole_sigma);
  }
  const double yaw_rel =
      wrap_angle(s.hole_yaw - s.ee_yaw) + rng.normal(0.0, noise.hole_yaw_sigma);
  o.segment<3>(0) = rel;
  o[3] = yaw_rel;
  o.segment<3>(4) = s.ee_vel;
  o[7] = s.ee_yaw_rate;
  for (int i = 0; i < 3; ++i)
    o[8 + i] = -s.contact_force[i] + rng.normal(0.0, noise.force_sigma);
  o.tail(prev_action.size()) = prev_action;
  return o;
}

VecX build_critic_obs(const sim::SimState& s, const VecX& prev_action) {
  VecX o(22 + prev_action.size());
  o.segment<3>(0) = s.hole_pos - s.ee_pos;
  o[3] = wrap_angle(s.hole_yaw - s.ee_yaw);
  o.segment<3>(4) = s.ee_vel;
  o[7] = s.ee_yaw_rate;
  o.segment<3>(8) = -s.contact_force;
  for (int i = 0; i < 3; ++i) o[11 + i] = s.contact_flags[i] ? 1.0 : 0.0;
  o.segment<3>(14) = s.ee_pos;
  o[17] = s.ee_yaw;
  o.segment<3>(18) = s.hole_pos;
  o[21] = s.hole_yaw;
  o.tail(prev_action.size()) = prev_action;
  return o;
}

VecX encode_prev_action(const act::HybridAction& a, ActionMode mode,
                        const act::ActionScales& sc) {
  const ObsSpec spec = ObsSpec::make(mode);
  VecX v = VecX::Zero(spec.prev_action_dim);
  v.segment<3>(0) = a.pose_delta / sc.pose_limit;
  v[3] = a.yaw_delta / sc.yaw_limit;
  if (act::is_hybrid(mode)) {
    v.segment<3>(4) = a.force_target / sc.force_limit;
    for (int i = 0; i < 3; ++i) v[7 + i] = a.pose_selected[i] ? 1.0 : 0.0;
  } else if (mode == ActionMode::Vices && a.has_gains) {
    const double mid = 0.5 * (sc.kp_min + sc.kp_max);
    const double half = 0.5 * (sc.kp_max - sc.kp_min);
    v.segment<3>(4) = (a.kp_gain.array() - mid) / half;
  }
  return v;
}

void RunningNormalizer::update(const VecX& x) {
  count_ += 1.0;
  const VecX delta = x - mean_;
  mean_ += delta / count_;
  m2_ += delta.cwiseProduct(x - mean_);
}

VecX RunningNormalizer::normalize(const VecX& x) const {
  if (count_ < 2.0) return x.cwiseMax(-10.0).cwiseMin(10.0);
  const VecX var = m2_ / count_;
  VecX z = (x - mean_).cwiseQuotient((var.array() + 1e-8).sqrt().matrix());
  return z.cwiseMax(-10.0).cwiseMin(10.0);
}

nlohmann::json RunningNormalizer::to_json() const {
  return {{"count", count_},
          {"mean", net::vecx_to_json(mean_)},
          {"m2", net::vecx_to_json(m2_)}};
}

RunningNormalizer RunningNormalizer::from_json(const nlohmann::json& j) {
  RunningNormalizer n;
  n.count_ = j.at("count").get<double>();
  n.mean_ = net::vecx_from_json(j.at("mean"));
  n.m2_ = net::vecx_from_json(j.at("m2"));
  return n;
}

}  // namespace fpih::rl
