#pragma once

#include <string>
#include <vector>

#include "fpih/core.hpp"
#include "fpih/random.hpp"

namespace fpih::net {

enum class LayerKind { Dense, Softplus, Residual };

struct LayerSpec {
  LayerKind kind = LayerKind::Dense;
  int in = 0;
  int out = 0;
  int hidden = 0;          // residual branch width
  double init_scale = 1.0; // multiplier on the Xavier range
};

struct Topology {
  int input_dim = 0;
  std::vector<LayerSpec> layers;

  int output_dim() const;
  int param_count() const;

  // Dense(in->latent), Softplus, blocks x Residual(latent), Dense(latent->out).
  // head_scale shrinks the final layer's init (policy heads start near zero;
  // value heads keep full scale so the critic can reach the return scale).
  static Topology mlp_resnet(int input, int latent, int blocks, int output,
                             double head_scale = 1.0);
};

// Recorded intermediates of one forward pass; consumed by one backward pass.
struct Tape {
  std::vector<MatX> stash;
  bool consumed = false;
};

// Dense / residual-block stack over a flat parameter vector. Forward accepts
// a matrix whose columns are samples; backward accumulates parameter
// gradients summed over columns.
class Network {
 public:
  Network() = default;
  explicit Network(Topology topo);

  const Topology& topology() const { return topo_; }
  VecX& params() { return params_; }
  const VecX& params() const { return params_; }
  int param_count() const { return static_cast<int>(params_.size()); }

  void init(RandomStream& rng);

  MatX forward(const MatX& input, Tape* tape = nullptr) const;
  VecX forward1(const VecX& input, Tape* tape = nullptr) const;

  // Accumulates d(objective)/d(params) into grad given d(objective)/d(output).
  // head_only stops after the final dense layer (used for the stop-gradient
  // variant of the selection supervision).
  void backward(Tape& tape, const MatX& d_output, VecX& grad,
                bool head_only = false) const;

  // Flat index of bias entry `row` of the final dense layer.
  int head_bias_index(int row) const;

 private:
  Topology topo_;
  VecX params_;
  std::vector<int> offsets_;
};

}  // namespace fpih::net
