#pragma once

#include "fpih/core.hpp"

namespace fpih::rl {

// Supervised selection loss: mean binary cross-entropy between per-axis
// force-selection probabilities and ground-truth contact labels. phi and psi
// are 3 x B (axes x batch); psi_i == 1 supervises force selection toward 1.
// Probabilities are clamped to [1e-6, 1-1e-6] inside the log only.
double ssl_loss(const MatX& phi_force, const MatX& psi);

// d(ssl_loss)/d(selection logit) for one element, already divided by the
// (3*B) mean denominator supplied by the caller as inv_count.
inline double ssl_logit_grad(double phi, double psi, double inv_count) {
  return (phi - psi) * inv_count;
}

}  // namespace fpih::rl
