#include "fpih/net/network.hpp"

#include <cmath>
#include <stdexcept>

namespace fpih::net {

namespace {

int layer_param_count(const LayerSpec& l) {
  switch (l.kind) {
    case LayerKind::Dense:
      return l.out * l.in + l.out;
    case LayerKind::Softplus:
      return 0;
    case LayerKind::Residual:
      return l.hidden * l.in + l.hidden + l.in * l.hidden + l.in;
  }
  return 0;
}

MatX softplus_mat(const MatX& x) {
  return x.unaryExpr([](double v) { return softplus(v); });
}

MatX logistic_mat(const MatX& x) {
  return x.unaryExpr([](double v) { return logistic(v); });
}

}  // namespace

int Topology::output_dim() const {
  int d = input_dim;
  for (const auto& l : layers) {
    if (l.kind == LayerKind::Dense) d = l.out;
  }
  return d;
}

int Topology::param_count() const {
  int n = 0;
  for (const auto& l : layers) n += layer_param_count(l);
  return n;
}

Topology Topology::mlp_resnet(int input, int latent, int blocks, int output,
                              double head_scale) {
  Topology t;
  t.input_dim = input;
  t.layers.push_back({LayerKind::Dense, input, latent, 0, 1.0});
  t.layers.push_back({LayerKind::Softplus, latent, latent, 0, 1.0});
  for (int i = 0; i < blocks; ++i)
    t.layers.push_back({LayerKind::Residual, latent, latent, latent, 1.0});
  t.layers.push_back({LayerKind::Dense, latent, output, 0, head_scale});
  return t;
}

Network::Network(Topology topo) : topo_(std::move(topo)) {
  offsets_.reserve(topo_.layers.size());
  int off = 0;
  for (const auto& l : topo_.layers) {
    offsets_.push_back(off);
    off += layer_param_count(l);
  }
  params_ = VecX::Zero(off);
}

void Network::init(RandomStream& rng) {
  for (size_t li = 0; li < topo_.layers.size(); ++li) {
    const LayerSpec& l = topo_.layers[li];
    double* p = params_.data() + offsets_[li];
    if (l.kind == LayerKind::Dense) {
      const double scale = l.init_scale * std::sqrt(6.0 / double(l.in + l.out));
      for (int i = 0; i < l.out * l.in; ++i) p[i] = rng.uniform(-scale, scale);
      for (int i = 0; i < l.out; ++i) p[l.out * l.in + i] = 0.0;
    } else if (l.kind == LayerKind::Residual) {
      const double scale = std::sqrt(6.0 / double(l.in + l.hidden));
      double* w1 = p;
      for (int i = 0; i < l.hidden * l.in; ++i) w1[i] = rng.uniform(-scale, scale);
      // b1, W2, b2 start at zero: the block is the identity at init.
      for (int i = l.hidden * l.in; i < layer_param_count(l); ++i) p[i] = 0.0;
    }
  }
}

MatX Network::forward(const MatX& input, Tape* tape) const {
  if (input.rows() != topo_.input_dim)
    throw std::invalid_argument("Network::forward: input has " +
                                std::to_string(input.rows()) +
                                " rows, topology expects " +
                                std::to_string(topo_.input_dim));
  MatX x = input;
  for (size_t li = 0; li < topo_.layers.size(); ++li) {
    const LayerSpec& l = topo_.layers[li];
    const double* p = params_.data() + offsets_[li];
    switch (l.kind) {
      case LayerKind::Dense: {
        Eigen::Map<const MatX> W(p, l.out, l.in);
        Eigen::Map<const VecX> b(p + l.out * l.in, l.out);
        if (tape) tape->stash.push_back(x);
        x = (W * x).colwise() + b;
        break;
      }
      case LayerKind::Softplus: {
        if (tape) tape->stash.push_back(x);
        x = softplus_mat(x);
        break;
      }
      case LayerKind::Residual: {
        Eigen::Map<const MatX> W1(p, l.hidden, l.in);
        Eigen::Map<const VecX> b1(p + l.hidden * l.in, l.hidden);
        Eigen::Map<const MatX> W2(p + l.hidden * l.in + l.hidden, l.in,
                                  l.hidden);
        Eigen::Map<const VecX> b2(
            p + l.hidden * l.in + l.hidden + l.in * l.hidden, l.in);
        MatX a = (W1 * x).colwise() + b1;
        MatX s = softplus_mat(a);
        if (tape) {
          tape->stash.push_back(x);
          tape->stash.push_back(a);
          tape->stash.push_back(s);
        }
        x = (x + ((W2 * s).colwise() + b2)).eval();
        break;
      }
    }
  }
  return x;
}

VecX Network::forward1(const VecX& input, Tape* tape) const {
  return forward(MatX(input), tape).col(0);
}

void Network::backward(Tape& tape, const MatX& d_output, VecX& grad,
                       bool head_only) const {
  if (tape.consumed)
    throw std::logic_error("Network::backward: tape already consumed");
  tape.consumed = true;
  if (grad.size() != params_.size())
    throw std::invalid_argument("Network::backward: gradient size mismatch");

  MatX dy = d_output;
  size_t stash_pos = tape.stash.size();
  for (size_t i = topo_.layers.size(); i-- > 0;) {
    const LayerSpec& l = topo_.layers[i];
    const double* p = params_.data() + offsets_[i];
    double* gp = grad.data() + offsets_[i];
    switch (l.kind) {
      case LayerKind::Dense: {
        const MatX& x = tape.stash[--stash_pos];
        Eigen::Map<const MatX> W(p, l.out, l.in);
        Eigen::Map<MatX> gW(gp, l.out, l.in);
        Eigen::Map<VecX> gb(gp + l.out * l.in, l.out);
        gW.noalias() += dy * x.transpose();
        gb += dy.rowwise().sum();
        if (head_only) return;
        dy = (W.transpose() * dy).eval();
        break;
      }
      case LayerKind::Softplus: {
        const MatX& x = tape.stash[--stash_pos];
        dy = dy.cwiseProduct(logistic_mat(x));
        break;
      }
      case LayerKind::Residual: {
        const MatX& s = tape.stash[--stash_pos];
        const MatX& a = tape.stash[--stash_pos];
        const MatX& x = tape.stash[--stash_pos];
        Eigen::Map<const MatX> W1(p, l.hidden, l.in);
        Eigen::Map<const MatX> W2(p + l.hidden * l.in + l.hidden, l.in,
                                  l.hidden);
        Eigen::Map<MatX> gW1(gp, l.hidden, l.in);
        Eigen::Map<VecX> gb1(gp + l.hidden * l.in, l.hidden);
        Eigen::Map<MatX> gW2(gp + l.hidden * l.in + l.hidden, l.in, l.hidden);
        Eigen::Map<VecX> gb2(gp + l.hidden * l.in + l.hidden + l.in * l.hidden,
                             l.in);
        gW2.noalias() += dy * s.transpose();
        gb2 += dy.rowwise().sum();
        MatX ds = W2.transpose() * dy;
        MatX da = ds.cwiseProduct(logistic_mat(a));
        gW1.noalias() += da * x.transpose();
        gb1 += da.rowwise().sum();
        dy += (W1.transpose() * da).eval();
        break;
      }
    }
  }
}

int Network::head_bias_index(int row) const {
  for (size_t i = topo_.layers.size(); i-- > 0;) {
    const LayerSpec& l = topo_.layers[i];
    if (l.kind == LayerKind::Dense) {
      if (row < 0 || row >= l.out)
        throw std::invalid_argument("head_bias_index: row out of range");
      return offsets_[i] + l.out * l.in + row;
    }
  }
  throw std::logic_error("head_bias_index: no dense layer in topology");
}

}  // namespace fpih::net
