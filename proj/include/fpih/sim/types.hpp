#pragma once

#include <array>
#include <limits>

#include "fpih/core.hpp"

namespace fpih::sim {

// Ground-truth world state. ee_pos is the center of the peg tip disk; the peg
// is a vertical cylinder held rigidly by the end-effector, so peg pose ==
// end-effector pose up to a constant offset we set to zero.
struct SimState {
  Vec3 ee_pos = Vec3::Zero();        // m
  double ee_yaw = 0.0;               // rad
  Vec3 ee_vel = Vec3::Zero();        // m/s
  double ee_yaw_rate = 0.0;          // rad/s
  Vec3 hole_pos = Vec3::Zero();      // m, center of the hole opening
  double hole_yaw = 0.0;             // rad
  Vec3 contact_force = Vec3::Zero(); // N, reaction on the peg
  std::array<bool, 3> contact_flags = {false, false, false};
  bool broken = false;
  int t_step = 0;                    // substep counter
};

struct TaskGeometry {
  double peg_radius = 0.00375;   // m
  double hole_radius = 0.004;    // m (opening; > peg_radius)
  double hole_depth = 0.010;     // m
  double table_height = 0.0;     // m, z of the table plane / hole opening
  double break_threshold = 10.0; // N; +inf makes the peg unbreakable

  double clearance() const { return hole_radius - peg_radius; }
  double hole_bottom() const { return table_height - hole_depth; }
};

struct ContactParams {
  double normal_stiffness = 5000.0;   // N/m
  double normal_damping = 50.0;       // N*s/m
  double tangential_damping = 10.0;   // N*s/m
  double friction_coefficient = 0.3;
  double contact_epsilon = 0.05;      // N, per-axis contact flag threshold
};

// Point-body stand-in for the arm: diagonal task-space inertia with gravity
// fully compensated. Viscous drag stabilizes the 120 Hz integration and is
// configurable to zero.
struct BodyParams {
  double mass = 1.5;         // kg
  double yaw_inertia = 0.02; // kg*m^2
  double linear_drag = 2.0;  // N*s/m
  double yaw_drag = 0.02;    // N*m*s/rad
};

struct SpawnConfig {
  double height_mean = 0.05; // m above the hole opening
  double sigma_xy = 0.02;    // m
  double sigma_z = 0.01;     // m
};

}  // namespace fpih::sim
