#pragma once

#include "fpih/core.hpp"

namespace fpih::net {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  VecX m, v;
  long t = 0;
  long rejected = 0; // non-finite gradient batches dropped

  void init(int n) {
    m = VecX::Zero(n);
    v = VecX::Zero(n);
    t = 0;
    rejected = 0;
  }
};

// Bias-corrected adaptive-moment update. Non-finite gradients are rejected
// without touching parameters or moments; the rejection counter feeds the
// training-stability telemetry.
void adam_step(VecX& params, const VecX& grad, AdamState& state,
               const AdamConfig& cfg);

}  // namespace fpih::net
