#pragma once

#include <utility>

#include "fpih/random.hpp"
#include "fpih/sim/types.hpp"

namespace fpih::sim {

struct ContactResult {
  Vec3 force = Vec3::Zero();
  std::array<bool, 3> flags = {false, false, false};
};

// Penalty contact between the peg and the hole fixture. Cases:
//   (a) tip below the table plane while misaligned -> vertical spring-damper
//       support plus regularized Coulomb friction on lateral velocity;
//   (b) tip inside the hole with lateral offset beyond the clearance ->
//       radial spring-damper pushing toward the hole axis plus wall friction;
//   (c) free space -> zero.
// (a) vs (b) is decided by the cheaper resolution direction (vertical
// penetration vs lateral overlap), so a peg resting next to the opening is
// supported while a peg drifting inside the hole is pushed back on axis.
// Bottom support applies whenever the tip is below the hole bottom.
ContactResult compute_contact(const SimState& state, const TaskGeometry& geom,
                              const ContactParams& params);

// Semi-implicit Euler substep under an applied wrench (fx, fy, fz, tau_yaw).
// The contact force is evaluated at the incoming state, drives the
// integration, and is stored (with its flags) on the returned state as the
// force experienced during the substep. The break flag latches when the
// contact force norm exceeds the break threshold.
SimState step(const SimState& state, const Vec4& wrench, double dt,
              const TaskGeometry& geom, const ContactParams& params,
              const BodyParams& body);

// Fresh episode state: peg spawned above the hole with Gaussian spawn noise,
// resampled until the tip is strictly in free space; zero velocity.
SimState reset(RandomStream& rng, const TaskGeometry& geom,
               const SpawnConfig& spawn, const Vec3& hole_pos,
               double hole_yaw);

// Success: tip within 1 mm of the hole bottom, laterally within the
// clearance, and unbroken.
bool is_success(const SimState& state, const TaskGeometry& geom);

}  // namespace fpih::sim
