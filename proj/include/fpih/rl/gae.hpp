#pragma once

#include "fpih/core.hpp"

namespace fpih::rl {

struct GaeResult {
  MatX advantages;  // T x N
  MatX returns;     // advantages + values
};

// Generalized advantage estimation over a T x N rollout (rows = time,
// columns = environments). dones[t](i) == 1 means the transition at t ended
// an episode; bootstrap holds V(s_T) per environment for rollouts cut before
// termination. When normalize is set, advantages are standardized over the
// whole batch (mean 0, std 1).
GaeResult compute_gae(const MatX& rewards, const MatX& values,
                      const Eigen::Matrix<std::uint8_t, Eigen::Dynamic,
                                          Eigen::Dynamic>& dones,
                      const VecX& bootstrap, double gamma, double lambda,
                      bool normalize = true);

}  // namespace fpih::rl
