#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include "fpih/net/adam.hpp"
#include "fpih/net/checkpoint.hpp"
#include "fpih/net/network.hpp"

using namespace fpih;
using namespace fpih::net;

namespace {

// Scalarized objective for gradient checks: weighted sum of outputs plus a
// quadratic term; fixed weights derived from the rng.
struct Objective {
  VecX w;
  double eval(const VecX& y) const { return w.dot(y) + 0.5 * y.squaredNorm(); }
  VecX grad(const VecX& y) const { return w + y; }
};

double fd_check_max_rel_err(Network& net, const VecX& x, const Objective& obj) {
  Tape tape;
  const VecX y = net.forward1(x, &tape);
  VecX grad = VecX::Zero(net.param_count());
  net.backward(tape, MatX(obj.grad(y)), grad);

  const double h = 1e-5;
  double max_rel = 0.0;
  for (int i = 0; i < net.param_count(); ++i) {
    const double saved = net.params()[i];
    net.params()[i] = saved + h;
    const double fp = obj.eval(net.forward1(x));
    net.params()[i] = saved - h;
    const double fm = obj.eval(net.forward1(x));
    net.params()[i] = saved;
    const double fd = (fp - fm) / (2 * h);
    const double rel =
        std::abs(fd - grad[i]) / std::max({std::abs(fd), std::abs(grad[i]), 1e-3});
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace

TEST_CASE("forward: zero-weight network maps to zero") {
  Network net(Topology::mlp_resnet(3, 8, 1, 2));
  const VecX y = net.forward1(VecX::Ones(3));
  CHECK(y.isZero());
}

TEST_CASE("forward: single dense layer affine identity") {
  Topology t;
  t.input_dim = 1;
  t.layers.push_back({LayerKind::Dense, 1, 1, 0, false});
  Network net(t);
  net.params()[0] = 2.0;  // W
  net.params()[1] = 1.0;  // b
  VecX x(1);
  x[0] = 3.0;
  CHECK(net.forward1(x)[0] == doctest::Approx(7.0));
}

TEST_CASE("forward: shape mismatch is a configuration error") {
  Network net(Topology::mlp_resnet(4, 8, 1, 2));
  CHECK_THROWS_AS(net.forward1(VecX::Ones(5)), std::invalid_argument);
}

TEST_CASE("residual block with zero branch weights is the identity") {
  Topology t;
  t.input_dim = 4;
  t.layers.push_back({LayerKind::Residual, 4, 4, 6, false});
  Network net(t);
  RandomStream rng(12);
  // W1 arbitrary, W2/b2 zero
  for (int i = 0; i < 6 * 4; ++i) net.params()[i] = rng.normal();
  VecX x(4);
  x << 0.3, -1.2, 0.0, 2.5;
  CHECK(net.forward1(x) == x);

  // init() gives the same property for a full stack's blocks
  Network full(Topology::mlp_resnet(4, 16, 2, 4));
  full.init(rng);
  // zero every residual-branch parameter region: init already zeroes W2/b2,
  // so each block is the identity on its input
  Tape tape;
  const VecX y1 = full.forward1(x);
  (void)tape;
  // removing the blocks entirely gives the same output
  Topology no_blocks = Topology::mlp_resnet(4, 16, 0, 4);
  Network shallow(no_blocks);
  // copy dense-in and head params (same layout order: dense, softplus,
  // [blocks], dense)
  const int in_params = 16 * 4 + 16;
  shallow.params().head(in_params) = full.params().head(in_params);
  shallow.params().tail(4 * 16 + 4) = full.params().tail(4 * 16 + 4);
  CHECK(shallow.forward1(x).isApprox(y1, 1e-14));
}

TEST_CASE("backward: linear network matches the analytic least-squares gradient") {
  // y = W x + b, L = 0.5*||y - t||^2: dL/dW = (y-t) x^T, dL/db = (y-t)
  Topology topo;
  topo.input_dim = 3;
  topo.layers.push_back({LayerKind::Dense, 3, 2, 0, false});
  Network net(topo);
  RandomStream rng(3);
  for (int i = 0; i < net.param_count(); ++i) net.params()[i] = rng.normal();
  VecX x(3);
  x << 0.5, -1.0, 2.0;
  VecX target(2);
  target << 1.0, -0.5;

  Tape tape;
  const VecX y = net.forward1(x, &tape);
  VecX grad = VecX::Zero(net.param_count());
  net.backward(tape, MatX(VecX(y - target)), grad);

  const VecX r = y - target;
  MatX dW = r * x.transpose();  // 2x3
  for (int col = 0; col < 3; ++col)
    for (int row = 0; row < 2; ++row)
      CHECK(grad[col * 2 + row] == doctest::Approx(dW(row, col)).epsilon(1e-10));
  CHECK(grad[6] == doctest::Approx(r[0]).epsilon(1e-10));
  CHECK(grad[7] == doctest::Approx(r[1]).epsilon(1e-10));
}

TEST_CASE("backward: zero output gradient gives zero parameter gradient") {
  Network net(Topology::mlp_resnet(3, 8, 2, 4));
  RandomStream rng(5);
  net.init(rng);
  Tape tape;
  net.forward1(VecX::Ones(3), &tape);
  VecX grad = VecX::Zero(net.param_count());
  net.backward(tape, MatX(VecX(VecX::Zero(4))), grad);
  CHECK(grad.isZero());
}

TEST_CASE("backward: tape reuse is a usage error") {
  Network net(Topology::mlp_resnet(3, 8, 1, 2));
  RandomStream rng(6);
  net.init(rng);
  Tape tape;
  net.forward1(VecX::Ones(3), &tape);
  VecX grad = VecX::Zero(net.param_count());
  net.backward(tape, MatX(VecX(VecX::Ones(2))), grad);
  CHECK_THROWS_AS(net.backward(tape, MatX(VecX(VecX::Ones(2))), grad),
                  std::logic_error);
}

TEST_CASE("gradient check: 50 random topologies vs central differences") {
  RandomStream rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int in = 1 + int(rng.uniform01() * 5);
    const int latent = 4 + int(rng.uniform01() * 8);
    const int blocks = int(rng.uniform01() * 3);
    const int out = 1 + int(rng.uniform01() * 4);
    Network net(Topology::mlp_resnet(in, latent, blocks, out));
    net.init(rng);
    // random params on top of init so residual branches are active too
    for (int i = 0; i < net.param_count(); ++i)
      net.params()[i] += 0.3 * rng.normal();
    VecX x(in);
    for (int i = 0; i < in; ++i) x[i] = rng.normal();
    Objective obj;
    obj.w = VecX(out);
    for (int i = 0; i < out; ++i) obj.w[i] = rng.normal();
    worst = std::max(worst, fd_check_max_rel_err(net, x, obj));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("batched forward/backward equals per-sample accumulation") {
  Network net(Topology::mlp_resnet(4, 12, 2, 3));
  RandomStream rng(7);
  net.init(rng);
  for (int i = 0; i < net.param_count(); ++i) net.params()[i] += 0.2 * rng.normal();

  MatX X(4, 5), dY(3, 5);
  for (int j = 0; j < 5; ++j)
    for (int i = 0; i < 4; ++i) X(i, j) = rng.normal();
  for (int j = 0; j < 5; ++j)
    for (int i = 0; i < 3; ++i) dY(i, j) = rng.normal();

  Tape tape;
  const MatX Y = net.forward(X, &tape);
  VecX grad_batched = VecX::Zero(net.param_count());
  net.backward(tape, dY, grad_batched);

  VecX grad_seq = VecX::Zero(net.param_count());
  for (int j = 0; j < 5; ++j) {
    Tape t1;
    const VecX y = net.forward1(X.col(j), &t1);
    CHECK(y.isApprox(Y.col(j), 1e-13));
    net.backward(t1, MatX(VecX(dY.col(j))), grad_seq);
  }
  CHECK(grad_batched.isApprox(grad_seq, 1e-12));
}

TEST_CASE("forward/backward determinism within one build") {
  Network net(Topology::mlp_resnet(5, 16, 2, 4));
  RandomStream rng(8);
  net.init(rng);
  VecX x(5);
  for (int i = 0; i < 5; ++i) x[i] = rng.normal();
  auto run = [&]() {
    Tape t;
    const VecX y = net.forward1(x, &t);
    VecX g = VecX::Zero(net.param_count());
    net.backward(t, MatX(VecX(y)), g);
    return std::make_pair(y, g);
  };
  const auto [y1, g1] = run();
  const auto [y2, g2] = run();
  CHECK(y1 == y2);
  CHECK(g1 == g2);
}

TEST_CASE("adam: zero gradient from fresh state leaves parameters unchanged") {
  VecX p = VecX::Ones(4);
  AdamState st;
  st.init(4);
  adam_step(p, VecX::Zero(4), st, AdamConfig{});
  CHECK(p == VecX::Ones(4));
}

TEST_CASE("adam: single step from zero moments has the closed form") {
  // m_hat = g, v_hat = g^2 -> dtheta = -lr * g / (|g| + eps)
  AdamConfig cfg;
  VecX p = VecX::Zero(3), g(3);
  g << 0.5, -2.0, 1e-9;
  AdamState st;
  st.init(3);
  adam_step(p, g, st, cfg);
  for (int i = 0; i < 3; ++i) {
    const double expected = -cfg.lr * g[i] / (std::abs(g[i]) + cfg.eps);
    CHECK(p[i] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("adam: identical calls with the same state give identical results") {
  RandomStream rng(9);
  VecX g(6);
  for (int i = 0; i < 6; ++i) g[i] = rng.normal();
  auto run = [&]() {
    VecX p = VecX::Ones(6);
    AdamState st;
    st.init(6);
    for (int k = 0; k < 10; ++k) adam_step(p, g, st, AdamConfig{});
    return p;
  };
  CHECK(run() == run());
}

TEST_CASE("adam: non-finite gradients are rejected and counted") {
  VecX p = VecX::Ones(2);
  AdamState st;
  st.init(2);
  VecX g(2);
  g << 1.0, std::numeric_limits<double>::quiet_NaN();
  adam_step(p, g, st, AdamConfig{});
  CHECK(p == VecX::Ones(2));
  CHECK(st.rejected == 1);
  CHECK(st.t == 0);
}

TEST_CASE("checkpoint: network + optimizer round-trip is lossless") {
  Network net(Topology::mlp_resnet(6, 24, 2, 9));
  RandomStream rng(10);
  net.init(rng);
  for (int i = 0; i < net.param_count(); ++i) net.params()[i] += rng.normal() * 0.7;
  AdamState st;
  st.init(net.param_count());
  for (int i = 0; i < net.param_count(); ++i) {
    st.m[i] = rng.normal() * 1e-3;
    st.v[i] = std::abs(rng.normal()) * 1e-6;
  }
  st.t = 1234;

  // through text, as the file format does
  const std::string text = network_to_json(net).dump();
  const Network back = network_from_json(nlohmann::json::parse(text));
  CHECK(back.params() == net.params());
  CHECK(back.topology().input_dim == net.topology().input_dim);

  const std::string atext = adam_to_json(st).dump();
  const AdamState ast = adam_from_json(nlohmann::json::parse(atext));
  CHECK(ast.m == st.m);
  CHECK(ast.v == st.v);
  CHECK(ast.t == st.t);
}
