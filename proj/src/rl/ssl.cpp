#include "fpih/rl/ssl.hpp"

#include <cmath>
#include <stdexcept>

namespace fpih::rl {

double ssl_loss(const MatX& phi_force, const MatX& psi) {
  if (phi_force.rows() != psi.rows() || phi_force.cols() != psi.cols())
    throw std::invalid_argument("ssl_loss: shape mismatch");
  const double eps = 1e-6;
  double acc = 0.0;
  for (Eigen::Index j = 0; j < phi_force.cols(); ++j) {
    for (Eigen::Index i = 0; i < phi_force.rows(); ++i) {
      const double p = std::clamp(phi_force(i, j), eps, 1.0 - eps);
      acc -= psi(i, j) * std::log(p) + (1.0 - psi(i, j)) * std::log(1.0 - p);
    }
  }
  return acc / double(phi_force.rows() * phi_force.cols());
}

}  // namespace fpih::rl
