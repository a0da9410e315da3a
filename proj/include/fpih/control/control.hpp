#pragma once

#include <optional>

#include "fpih/random.hpp"
#include "fpih/sim/sim.hpp"

namespace fpih::control {

using sim::BodyParams;
using sim::ContactParams;
using sim::SimState;
using sim::TaskGeometry;

struct ControllerGains {
  Vec4 kp = Vec4(400.0, 400.0, 400.0, 20.0); // xyz [1/s^2-like], yaw
  Vec4 kd = Vec4::Zero();                    // zero -> derive critical damping
  Vec3 kf = Vec3(0.8, 0.8, 0.8);             // force-error gain, dimensionless
  Vec4 wrench_max = Vec4(50.0, 50.0, 50.0, 5.0); // N, N*m clamp per axis
};

// kd[i] = 2*sqrt(kp[i]*m) on xyz and 2*sqrt(kp*I) on yaw.
Vec4 critical_kd(const Vec4& kp, const BodyParams& body);

inline ControllerGains with_critical_kd(ControllerGains g,
                                        const BodyParams& body) {
  if (g.kd.isZero()) g.kd = critical_kd(g.kp, body);
  return g;
}

// One policy-level command held fixed over the decimated low-level loop.
// pose_selected[i] == true selects the position servo on that axis; yaw is
// always pose-controlled.
struct ControlCommand {
  std::array<bool, 3> pose_selected = {true, true, true};
  Vec3 pose_target = Vec3::Zero();  // m, absolute
  double yaw_target = 0.0;          // rad, absolute
  Vec3 force_target = Vec3::Zero(); // N, absolute
  std::optional<Vec3> kp_override;  // per-axis xyz kp (variable impedance)
};

// wrench[i] = m*(kp[i]*(x_d[i]-x[i]) - kd[i]*v[i]) on xyz, the analogous
// inertia-scaled PD on yaw; clamped to +/- wrench_max per axis.
Vec4 pose_control(const Vec3& pose_target, double yaw_target,
                  const SimState& state, const ControllerGains& gains,
                  const BodyParams& body);

// Per-axis switch between the pose servo and the proportional force law
// wrench[i] = m*kf[i]*(f_d[i] - f_ee[i]). f_ee is the controller's estimate
// of the force the peg applies to the environment (pressing down reads
// negative z). Reduces bitwise to pose_control when all axes select pose.
Vec4 hybrid_control(const ControlCommand& cmd, const SimState& state,
                    const Vec3& f_ee, const ControllerGains& gains,
                    const BodyParams& body);

// Wrist force estimate: true applied force plus Gaussian noise, optionally
// smoothed with an exponential moving average (ema_alpha in (0,1]; 0 = off).
struct ForceSensorConfig {
  double sigma = 0.5;     // N
  double ema_alpha = 0.0;
};

class ForceSensor {
 public:
  explicit ForceSensor(ForceSensorConfig cfg = {}) : cfg_(cfg) {}
  void reset() { initialized_ = false; }
  Vec3 measure(const Vec3& applied_force, RandomStream& rng);

 private:
  ForceSensorConfig cfg_;
  Vec3 filtered_ = Vec3::Zero();
  bool initialized_ = false;
};

struct LowLevelStats {
  int substeps = 0;
  double energy = 0.0; // sum over substeps of ||wrench_xyz|| * ||dx||
};

// Holds cmd fixed and recomputes the wrench each substep from the current
// state and force estimate; stops early if the peg breaks.
SimState run_lowlevel(const ControlCommand& cmd, SimState state,
                      const TaskGeometry& geom, const ContactParams& contact,
                      const BodyParams& body, const ControllerGains& gains,
                      ForceSensor& sensor, RandomStream& rng, int n_substeps,
                      double dt, LowLevelStats* stats = nullptr);

}  // namespace fpih::control
