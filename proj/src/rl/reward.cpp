#include "fpih/rl/reward.hpp"

#include <cmath>

namespace fpih::rl {

bool is_engaged(const sim::SimState& s, const sim::TaskGeometry& g) {
  const double lateral = (s.ee_pos.head<2>() - s.hole_pos.head<2>()).norm();
  return s.ee_pos.z() < g.table_height && lateral <= g.clearance();
}

double reward(const sim::SimState& after, const sim::TaskGeometry& g,
              const RewardConfig& rc, bool first_success) {
  const Vec3 target(after.hole_pos.x(), after.hole_pos.y(), g.hole_bottom());
  const double dist = (after.ee_pos - target).norm();
  double r = rc.w_dist * (std::exp(-dist / rc.coarse_scale) +
                          std::exp(-dist / rc.fine_scale));
  if (is_engaged(after, g)) r += rc.w_engage;
  if (first_success) r += rc.w_success;
  return r;
}

}  // namespace fpih::rl
