#include "fpih/net/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace fpih::net {

void adam_step(VecX& params, const VecX& grad, AdamState& st,
               const AdamConfig& c) {
  if (params.size() != grad.size() || st.m.size() != params.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  if (!grad.allFinite()) {
    st.rejected += 1;
    return;
  }
  st.t += 1;
  st.m = c.beta1 * st.m + (1.0 - c.beta1) * grad;
  st.v = c.beta2 * st.v + (1.0 - c.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(c.beta1, double(st.t));
  const double c2 = 1.0 - std::pow(c.beta2, double(st.t));
  params -= (c.lr * (st.m / c1).array() /
             ((st.v / c2).array().sqrt() + c.eps))
                .matrix();
}

}  // namespace fpih::net
