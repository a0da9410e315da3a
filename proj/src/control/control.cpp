#include "fpih/control/control.hpp"

#include <cmath>

namespace fpih::control {

namespace {

double clamp_axis(double w, double lim) { return std::clamp(w, -lim, lim); }

double pose_axis(double err, double vel, double kp, double kd, double inertia) {
  return inertia * (kp * err - kd * vel);
}

}  // namespace

Vec4 critical_kd(const Vec4& kp, const BodyParams& body) {
  Vec4 kd;
  for (int i = 0; i < 3; ++i) kd[i] = 2.0 * std::sqrt(kp[i] * body.mass);
  kd[3] = 2.0 * std::sqrt(kp[3] * body.yaw_inertia);
  return kd;
}

Vec4 pose_control(const Vec3& pose_target, double yaw_target,
                  const SimState& s, const ControllerGains& g,
                  const BodyParams& b) {
  Vec4 w;
  for (int i = 0; i < 3; ++i)
    w[i] = clamp_axis(pose_axis(pose_target[i] - s.ee_pos[i], s.ee_vel[i],
                                g.kp[i], g.kd[i], b.mass),
                      g.wrench_max[i]);
  w[3] = clamp_axis(pose_axis(wrap_angle(yaw_target - s.ee_yaw), s.ee_yaw_rate,
                              g.kp[3], g.kd[3], b.yaw_inertia),
                    g.wrench_max[3]);
  return w;
}

Vec4 hybrid_control(const ControlCommand& cmd, const SimState& s,
                    const Vec3& f_ee, const ControllerGains& g,
                    const BodyParams& b) {
  Vec4 w;
  for (int i = 0; i < 3; ++i) {
    const double raw =
        cmd.pose_selected[i]
            ? pose_axis(cmd.pose_target[i] - s.ee_pos[i], s.ee_vel[i], g.kp[i],
                        g.kd[i], b.mass)
            : b.mass * g.kf[i] * (cmd.force_target[i] - f_ee[i]);
    w[i] = clamp_axis(raw, g.wrench_max[i]);
  }
  w[3] = clamp_axis(pose_axis(wrap_angle(cmd.yaw_target - s.ee_yaw),
                              s.ee_yaw_rate, g.kp[3], g.kd[3], b.yaw_inertia),
                    g.wrench_max[3]);
  return w;
}

Vec3 ForceSensor::measure(const Vec3& applied_force, RandomStream& rng) {
  Vec3 v = applied_force;
  if (cfg_.sigma > 0.0)
    v += Vec3(rng.normal(0.0, cfg_.sigma), rng.normal(0.0, cfg_.sigma),
              rng.normal(0.0, cfg_.sigma));
  if (cfg_.ema_alpha <= 0.0) return v;
  if (!initialized_) {
    filtered_ = v;
    initialized_ = true;
  } else {
    filtered_ = cfg_.ema_alpha * v + (1.0 - cfg_.ema_alpha) * filtered_;
  }
  return filtered_;
}

SimState run_lowlevel(const ControlCommand& cmd, SimState state,
                      const TaskGeometry& geom, const ContactParams& contact,
                      const BodyParams& body, const ControllerGains& gains,
                      ForceSensor& sensor, RandomStream& rng, int n_substeps,
                      double dt, LowLevelStats* stats) {
  ControllerGains g = gains;
  if (cmd.kp_override) {
    g.kp.head<3>() = *cmd.kp_override;
    g.kd = critical_kd(g.kp, body);
  }
  for (int k = 0; k < n_substeps; ++k) {
    // Force estimate at the current state (no substep delay); applied-force
    // convention is minus the contact reaction on the peg.
    const Vec3 reaction = sim::compute_contact(state, geom, contact).force;
    const Vec3 f_ee = sensor.measure(-reaction, rng);
    const Vec4 w = hybrid_control(cmd, state, f_ee, g, body);
    const Vec3 before = state.ee_pos;
    state = sim::step(state, w, dt, geom, contact, body);
    if (stats) {
      stats->substeps += 1;
      stats->energy += w.head<3>().norm() * (state.ee_pos - before).norm();
    }
    if (state.broken) break;
  }
  return state;
}

}  // namespace fpih::control
