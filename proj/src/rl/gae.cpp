#include "fpih/rl/gae.hpp"

#include <cmath>
#include <stdexcept>

namespace fpih::rl {

GaeResult compute_gae(const MatX& rewards, const MatX& values,
                      const Eigen::Matrix<std::uint8_t, Eigen::Dynamic,
                                          Eigen::Dynamic>& dones,
                      const VecX& bootstrap, double gamma, double lambda,
                      bool normalize) {
  const Eigen::Index T = rewards.rows();
  const Eigen::Index N = rewards.cols();
  if (values.rows() != T || values.cols() != N || dones.rows() != T ||
      dones.cols() != N || bootstrap.size() != N)
    throw std::invalid_argument("compute_gae: shape mismatch");

  GaeResult out;
  out.advantages = MatX::Zero(T, N);
  VecX carry = VecX::Zero(N);
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    for (Eigen::Index i = 0; i < N; ++i) {
      const double nonterminal = dones(t, i) ? 0.0 : 1.0;
      const double next_value = (t == T - 1) ? bootstrap[i] : values(t + 1, i);
      const double delta =
          rewards(t, i) + gamma * next_value * nonterminal - values(t, i);
      carry[i] = delta + gamma * lambda * nonterminal * carry[i];
      out.advantages(t, i) = carry[i];
    }
  }
  out.returns = out.advantages + values;
  if (normalize) {
    const double mean = out.advantages.mean();
    const double var =
        (out.advantages.array() - mean).square().sum() / double(T * N);
    out.advantages =
        (out.advantages.array() - mean) / std::sqrt(var + 1e-12);
  }
  return out;
}

}  // namespace fpih::rl
