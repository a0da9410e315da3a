#pragma once

#include "fpih/sim/types.hpp"

namespace fpih::rl {

// Dense task reward: two squashed distance terms (coarse and fine length
// scales), an engagement indicator (tip inside the hole opening), and a
// one-time success bonus.
struct RewardConfig {
  double w_dist = 1.0;
  double w_engage = 2.0;
  double w_success = 50.0;
  double coarse_scale = 0.05;  // m
  double fine_scale = 0.005;   // m
};

bool is_engaged(const sim::SimState& s, const sim::TaskGeometry& g);

// Evaluated on the post-transition state; `first_success` is true only on the
// first policy step of the episode that satisfies is_success.
double reward(const sim::SimState& after, const sim::TaskGeometry& g,
              const RewardConfig& rc, bool first_success);

}  // namespace fpih::rl
