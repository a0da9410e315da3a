#include "fpih/sim/sim.hpp"

#include <cmath>
#include <stdexcept>

namespace fpih::sim {

namespace {

// Regularized Coulomb friction: viscous in the tangential speed, capped at
// mu * normal.
Vec3 friction_force(const Vec3& v_tangential, double normal_magnitude,
                    const ContactParams& p) {
  const double speed = v_tangential.norm();
  if (speed <= 0.0 || normal_magnitude <= 0.0) return Vec3::Zero();
  const double mag = std::min(p.tangential_damping * speed,
                              p.friction_coefficient * normal_magnitude);
  return -(mag / speed) * v_tangential;
}

}  // namespace

ContactResult compute_contact(const SimState& s, const TaskGeometry& g,
                              const ContactParams& p) {
  ContactResult out;
  const double tip_z = s.ee_pos.z();
  const double depth_below_plane = g.table_height - tip_z;
  if (depth_below_plane > 0.0) {
    const Vec2 lat = s.ee_pos.head<2>() - s.hole_pos.head<2>();
    const double offset = lat.norm();
    const double wall_overlap = offset - g.clearance();
    if (wall_overlap > 0.0) {
      if (depth_below_plane <= wall_overlap) {
        // Rim / table support.
        double fn = p.normal_stiffness * depth_below_plane -
                    p.normal_damping * s.ee_vel.z();
        fn = std::max(fn, 0.0);
        out.force.z() += fn;
        Vec3 v_lat(s.ee_vel.x(), s.ee_vel.y(), 0.0);
        out.force += friction_force(v_lat, fn, p);
      } else {
        // Wall contact inside the hole: push toward the axis.
        const Vec2 radial = lat / offset;
        const double v_radial = s.ee_vel.head<2>().dot(radial);
        double fr = p.normal_stiffness * wall_overlap +
                    p.normal_damping * v_radial;
        fr = std::max(fr, 0.0);
        out.force.head<2>() += -fr * radial;
        // Friction along the wall (vertical + circumferential velocity).
        const Vec2 tang(-radial.y(), radial.x());
        const double v_tang = s.ee_vel.head<2>().dot(tang);
        Vec3 v_wall(v_tang * tang.x(), v_tang * tang.y(), s.ee_vel.z());
        out.force += friction_force(v_wall, fr, p);
      }
    }
  }
  const double depth_below_bottom = g.hole_bottom() - tip_z;
  if (depth_below_bottom > 0.0) {
    double fn = p.normal_stiffness * depth_below_bottom -
                p.normal_damping * s.ee_vel.z();
    fn = std::max(fn, 0.0);
    out.force.z() += fn;
    Vec3 v_lat(s.ee_vel.x(), s.ee_vel.y(), 0.0);
    out.force += friction_force(v_lat, fn, p);
  }
  for (int i = 0; i < 3; ++i)
    out.flags[i] = std::abs(out.force[i]) > p.contact_epsilon;
  return out;
}

SimState step(const SimState& s, const Vec4& wrench, double dt,
              const TaskGeometry& g, const ContactParams& p,
              const BodyParams& b) {
  if (!wrench.allFinite())
    throw std::invalid_argument("sim::step: non-finite wrench command");
  const ContactResult c = compute_contact(s, g, p);

  SimState n = s;
  const Vec3 acc =
      (wrench.head<3>() + c.force - b.linear_drag * s.ee_vel) / b.mass;
  const double acc_yaw =
      (wrench[3] - b.yaw_drag * s.ee_yaw_rate) / b.yaw_inertia;
  n.ee_vel += dt * acc;
  n.ee_pos += dt * n.ee_vel;
  n.ee_yaw_rate += dt * acc_yaw;
  n.ee_yaw = wrap_angle(n.ee_yaw + dt * n.ee_yaw_rate);
  n.contact_force = c.force;
  n.contact_flags = c.flags;
  if (c.force.norm() > g.break_threshold) n.broken = true;
  n.t_step = s.t_step + 1;
  return n;
}

SimState reset(RandomStream& rng, const TaskGeometry& g,
               const SpawnConfig& spawn, const Vec3& hole_pos,
               double hole_yaw) {
  if (spawn.height_mean <= 0.0)
    throw std::invalid_argument(
        "sim::reset: spawn height_mean must be positive (peg would spawn in "
        "penetration)");
  SimState s;
  s.hole_pos = hole_pos;
  s.hole_yaw = hole_yaw;
  Vec3 offset;
  do {
    offset = Vec3(rng.normal(0.0, spawn.sigma_xy),
                  rng.normal(0.0, spawn.sigma_xy),
                  spawn.height_mean + rng.normal(0.0, spawn.sigma_z));
  } while (hole_pos.z() + offset.z() <= g.table_height);
  s.ee_pos = hole_pos + offset;
  s.ee_yaw = hole_yaw;
  return s;
}

bool is_success(const SimState& s, const TaskGeometry& g) {
  if (s.broken) return false;
  const double lateral =
      (s.ee_pos.head<2>() - s.hole_pos.head<2>()).norm();
  return std::abs(s.ee_pos.z() - g.hole_bottom()) <= 1e-3 &&
         lateral <= g.clearance();
}

}  // namespace fpih::sim
