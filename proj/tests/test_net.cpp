#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "iatnet/net.hpp"
#include "iatnet/rng.hpp"

using namespace iatnet;

namespace {

Matrix random_matrix(int r, int c, RngStream& rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(r, c);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) m(i, j) = rng.uniform(lo, hi);
  }
  return m;
}

ArchDescriptor small_iat_arch(BasisFamily in, BasisFamily out, bool analytic, int M = 64) {
  ArchDescriptor a;
  a.input_dim = 2;
  a.output_dim = 1;
  a.width = 6;
  a.depth = 3;
  a.use_iat = true;
  a.sigma = Sigma::ReLU;
  a.basis_in = in;
  a.basis_out = out;
  a.analytic = analytic;
  a.M = M;
  return a;
}

}  // namespace

TEST_CASE("init_network determinism and seed separation") {
  ArchDescriptor a = small_iat_arch(BasisFamily::Fourier, BasisFamily::PWQ, false);
  Network n1 = init_network(a, 7);
  Network n2 = init_network(a, 7);
  Network n3 = init_network(a, 8);
  for (size_t i = 0; i < n1.layers.size(); ++i) {
    if (n1.layers[i].kind != LayerKind::Affine) continue;
    CHECK(n1.layers[i].W == n2.layers[i].W);
    CHECK(n1.layers[i].b == n2.layers[i].b);
  }
  bool any_diff = false;
  for (size_t i = 0; i < n1.layers.size(); ++i) {
    if (n1.layers[i].kind != LayerKind::Affine) continue;
    any_diff = any_diff || n1.layers[i].W != n3.layers[i].W;
  }
  CHECK(any_diff);

  ArchDescriptor bad = a;
  bad.width = 0;
  CHECK_THROWS_AS(init_network(bad, 1), std::invalid_argument);
}

TEST_CASE("forward basics") {
  SUBCASE("single affine layer computes X W^T + b") {
    Network net;
    net.arch.input_dim = 3;
    net.arch.output_dim = 2;
    net.arch.depth = 1;
    Matrix W(2, 3);
    W << 1, 2, 3, 4, 5, 6;
    Vector b(2);
    b << -1, 1;
    net.layers.push_back(Layer::affine(W, b));
    Matrix X(2, 3);
    X << 1, 0, 0, 0, 1, 0;
    Matrix Y = forward(net, X).first;
    CHECK(Y(0, 0) == 0.0);   // 1 - 1
    CHECK(Y(0, 1) == 5.0);   // 4 + 1
    CHECK(Y(1, 0) == 1.0);   // 2 - 1
    CHECK(Y(1, 1) == 6.0);   // 5 + 1
  }
  SUBCASE("zero weights map everything to zero") {
    ArchDescriptor a = small_iat_arch(BasisFamily::Rect, BasisFamily::Rect, false, 12);
    Network net = make_skeleton(a);
    RngStream rng(3, "x");
    Matrix X = random_matrix(5, 2, rng);
    CHECK(forward(net, X).first.isZero());
  }
  SUBCASE("shape mismatch throws") {
    ArchDescriptor a = small_iat_arch(BasisFamily::Rect, BasisFamily::Rect, false, 12);
    Network net = init_network(a, 1);
    Matrix X(2, 5);
    X.setZero();
    CHECK_THROWS_AS(forward(net, X), std::invalid_argument);
  }
}

TEST_CASE("rect/rect analytic IAT layer equals scalar relu network") {
  ArchDescriptor iat = small_iat_arch(BasisFamily::Rect, BasisFamily::Rect, true);
  ArchDescriptor scal = iat;
  scal.use_iat = false;
  Network a = init_network(iat, 17);
  Network b = init_network(scal, 17);
  RngStream rng(5, "x");
  Matrix X = random_matrix(20, 2, rng);
  Matrix T = random_matrix(20, 1, rng);

  auto [Ya, ta] = forward(a, X);
  auto [Yb, tb] = forward(b, X);
  CHECK((Ya - Yb).cwiseAbs().maxCoeff() < 1e-12);

  Gradients ga = backward(a, ta, mse_grad(Ya, T));
  Gradients gb = backward(b, tb, mse_grad(Yb, T));
  for (size_t i = 0; i < a.layers.size(); ++i) {
    if (a.layers[i].kind != LayerKind::Affine) continue;
    CHECK((ga.layers[i].dW - gb.layers[i].dW).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((ga.layers[i].db - gb.layers[i].db).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("backward examples") {
  SUBCASE("single affine with mse matches the linear regression formula") {
    Network net;
    net.arch.input_dim = 2;
    net.arch.output_dim = 1;
    net.arch.depth = 1;
    Matrix W(1, 2);
    W << 0.5, -0.25;
    Vector b(1);
    b << 0.1;
    net.layers.push_back(Layer::affine(W, b));
    Matrix X(1, 2);
    X << 2.0, 1.0;
    Matrix T(1, 1);
    T << 3.0;
    auto [Y, tape] = forward(net, X);
    double yhat = 0.5 * 2.0 - 0.25 * 1.0 + 0.1;
    CHECK(Y(0, 0) == doctest::Approx(yhat).epsilon(1e-15));
    Gradients g = backward(net, tape, mse_grad(Y, T));
    CHECK(g.layers[0].dW(0, 0) == doctest::Approx(2 * (yhat - 3.0) * 2.0).epsilon(1e-14));
    CHECK(g.layers[0].dW(0, 1) == doctest::Approx(2 * (yhat - 3.0) * 1.0).epsilon(1e-14));
    CHECK(g.layers[0].db(0) == doctest::Approx(2 * (yhat - 3.0)).epsilon(1e-14));
  }
  SUBCASE("zero upstream gradient gives zero parameter gradients") {
    ArchDescriptor a = small_iat_arch(BasisFamily::PWL, BasisFamily::Fourier, false);
    a.width = 6;
    Network net = init_network(a, 2);
    RngStream rng(8, "x");
    Matrix X = random_matrix(4, 2, rng);
    auto [Y, tape] = forward(net, X);
    Gradients g = backward(net, tape, Matrix::Zero(Y.rows(), Y.cols()));
    for (size_t i = 0; i < net.layers.size(); ++i) {
      if (net.layers[i].kind != LayerKind::Affine) continue;
      CHECK(g.layers[i].dW.isZero());
      CHECK(g.layers[i].db.isZero());
    }
  }
}

TEST_CASE("loss and accuracy examples") {
  Matrix Y(2, 1), T(2, 1);
  Y << 1, -1;
  T << 1, -1;
  CHECK(mse_loss(Y, T) == 0.0);
  CHECK(accuracy_sign(Y, T) == 1.0);
  T << -1, 1;
  CHECK(mse_loss(Y, T) == 4.0);
  CHECK(accuracy_sign(Y, T) == 0.0);
  Y << 0.2, -3;
  T << 1, -1;
  CHECK(accuracy_sign(Y, T) == 1.0);
  Matrix bad(3, 1);
  CHECK_THROWS_AS(mse_loss(Y, bad), std::invalid_argument);
}

TEST_CASE("adam examples") {
  Network net;
  net.arch.input_dim = 1;
  net.arch.output_dim = 1;
  net.arch.depth = 1;
  net.layers.push_back(Layer::affine(Matrix::Ones(1, 1), Vector::Zero(1)));
  AdamState st = make_adam_state(net);

  SUBCASE("zero gradient leaves parameters unchanged") {
    Gradients g;
    g.layers.resize(1);
    g.layers[0].dW = Matrix::Zero(1, 1);
    g.layers[0].db = Vector::Zero(1);
    adam_step(net, g, st, 0.05);
    CHECK(net.layers[0].W(0, 0) == 1.0);
    CHECK(net.layers[0].b(0) == 0.0);
  }
  SUBCASE("first bias-corrected step is -lr for unit gradient") {
    Gradients g;
    g.layers.resize(1);
    g.layers[0].dW = Matrix::Ones(1, 1);
    g.layers[0].db = Vector::Zero(1);
    adam_step(net, g, st, 0.05);
    CHECK(net.layers[0].W(0, 0) == doctest::Approx(1.0 - 0.05).epsilon(1e-7));
  }
}

TEST_CASE("grad_check across layer kinds") {
  RngStream rng(100, "gc");
  SUBCASE("pure affine network is exact to fd noise") {
    ArchDescriptor a;
    a.input_dim = 3;
    a.output_dim = 2;
    a.depth = 1;
    Network net = init_network(a, 3);
    Matrix X = random_matrix(6, 3, rng);
    Matrix T = random_matrix(6, 2, rng);
    CHECK(grad_check(net, X, T) < 1e-9);
  }
  SUBCASE("scalar tanh network") {
    ArchDescriptor a;
    a.input_dim = 2;
    a.output_dim = 1;
    a.width = 8;
    a.depth = 3;
    a.use_iat = false;
    a.sigma = Sigma::Tanh;
    Network net = init_network(a, 4);
    Matrix X = random_matrix(6, 2, rng);
    Matrix T = random_matrix(6, 1, rng);
    CHECK(grad_check(net, X, T) < 1e-7);
  }
  SUBCASE("iat discretized relu network") {
    Network net = init_network(small_iat_arch(BasisFamily::Fourier, BasisFamily::PWQ, false), 5);
    Matrix X = sample_nondegenerate_inputs(net, 6, 11);
    RngStream r2(6, "t");
    Matrix T = random_matrix(6, 1, r2);
    CHECK(grad_check(net, X, T) < 1e-5);
  }
  SUBCASE("iat analytic relu network") {
    Network net = init_network(small_iat_arch(BasisFamily::Fourier, BasisFamily::PWQ, true), 5);
    RngStream r2(61, "t");
    Matrix X = random_matrix(6, 2, r2);
    Matrix T = random_matrix(6, 1, r2);
    CHECK(grad_check(net, X, T) < 1e-5);
  }
  SUBCASE("iat tanh discretized network") {
    ArchDescriptor a = small_iat_arch(BasisFamily::PWL, BasisFamily::PWL, false);
    a.sigma = Sigma::Tanh;
    Network net = init_network(a, 9);
    RngStream r2(62, "t");
    Matrix X = random_matrix(6, 2, r2);
    Matrix T = random_matrix(6, 1, r2);
    CHECK(grad_check(net, X, T) < 1e-6);
  }
  SUBCASE("standardize layer parameters get exact gradients") {
    ArchDescriptor a;
    a.input_dim = 2;
    a.output_dim = 1;
    a.width = 5;
    a.depth = 3;
    a.use_iat = false;
    a.sigma = Sigma::Tanh;
    a.standardize = true;
    Network net = init_network(a, 12);
    Matrix X = random_matrix(8, 2, rng);
    Matrix T = random_matrix(8, 1, rng);
    CHECK(grad_check(net, X, T) < 1e-6);
  }
}

TEST_CASE("gradients across every basis family pair stay below 1e-5") {
  // one batch per (input family, output family) over both modes
  const BasisFamily fams[] = {BasisFamily::Rect,       BasisFamily::PWL,
                              BasisFamily::PWQ,        BasisFamily::Fourier,
                              BasisFamily::PWLWavelet, BasisFamily::RectWavelet};
  int pair_index = 0;
  for (BasisFamily fi : fams) {
    for (BasisFamily fo : fams) {
      bool analytic = (pair_index % 2 == 0);
      ArchDescriptor a = small_iat_arch(fi, fo, analytic, 48);
      Network net = init_network(a, 1000 + pair_index);
      Matrix X = sample_nondegenerate_inputs(net, 4, 2000 + pair_index);
      RngStream rt(3000 + pair_index, "t");
      Matrix T = random_matrix(4, 1, rt);
      double err = grad_check(net, X, T);
      INFO(family_name(fi) << "/" << family_name(fo) << " analytic=" << analytic);
      CHECK(err < 1e-5);
      ++pair_index;
    }
  }
}

TEST_CASE("train: convex least squares reaches machine floor") {
  RngStream rng(2, "ls");
  Matrix X = random_matrix(32, 3, rng);
  Matrix Wtrue(1, 3);
  Wtrue << 0.3, -1.2, 0.7;
  Matrix T = X * Wtrue.transpose();
  ArchDescriptor a;
  a.input_dim = 3;
  a.output_dim = 1;
  a.depth = 1;
  Network net = init_network(a, 21);
  TrainConfig cfg;
  cfg.lr = 1e-2;
  cfg.epochs = 500;
  cfg.seed = 21;
  TrainReport rep = train(net, X, T, cfg);
  CHECK(rep.final_loss < 1e-10);
  CHECK(rep.loss_curve.size() == 500);
}

TEST_CASE("train config validation and determinism") {
  RngStream rng(2, "cfg");
  Matrix X = random_matrix(8, 2, rng);
  Matrix T = random_matrix(8, 1, rng);
  ArchDescriptor a = small_iat_arch(BasisFamily::Fourier, BasisFamily::Rect, false, 32);
  TrainConfig cfg;
  cfg.epochs = 0;
  {
    Network net = init_network(a, 3);
    CHECK_THROWS_AS(train(net, X, T, cfg), std::invalid_argument);
  }
  cfg.epochs = 25;
  cfg.lr = 1e-3;
  cfg.seed = 77;
  Network n1 = init_network(a, 3);
  Network n2 = init_network(a, 3);
  TrainReport r1 = train(n1, X, T, cfg);
  TrainReport r2 = train(n2, X, T, cfg);
  CHECK(r1.loss_curve == r2.loss_curve);
  CHECK(r1.final_loss == r2.final_loss);
}

TEST_CASE("full-batch sgd on a linear model decreases monotonically") {
  RngStream rng(15, "sgd");
  Matrix X = random_matrix(16, 2, rng);
  Matrix T = random_matrix(16, 1, rng);
  ArchDescriptor a;
  a.input_dim = 2;
  a.output_dim = 1;
  a.depth = 1;
  Network net = init_network(a, 4);
  TrainConfig cfg;
  cfg.optimizer = TrainConfig::Optimizer::SGD;
  cfg.lr = 1e-3;
  cfg.epochs = 100;
  TrainReport rep = train(net, X, T, cfg);
  for (size_t i = 1; i < rep.loss_curve.size(); ++i) {
    CHECK(rep.loss_curve[i] <= rep.loss_curve[i - 1] + 1e-15);
  }
}

TEST_CASE("divergence aborts with diagnostic") {
  RngStream rng(1, "div");
  Matrix X = random_matrix(8, 2, rng, -1, 1);
  Matrix T = random_matrix(8, 1, rng);
  ArchDescriptor a;
  a.input_dim = 2;
  a.output_dim = 1;
  a.width = 8;
  a.depth = 3;
  a.use_iat = false;
  a.sigma = Sigma::ReLU;
  Network net = init_network(a, 5);
  TrainConfig cfg;
  cfg.optimizer = TrainConfig::Optimizer::SGD;
  cfg.lr = 1e12;  // guaranteed blow-up
  cfg.epochs = 50;
  CHECK_THROWS_AS(train(net, X, T, cfg), TrainDivergence);
}

TEST_CASE("mini-batch training runs deterministically") {
  RngStream rng(3, "mb");
  Matrix X = random_matrix(20, 2, rng);
  Matrix T = random_matrix(20, 1, rng);
  ArchDescriptor a = small_iat_arch(BasisFamily::PWQ, BasisFamily::PWL, false, 24);
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.batch = 6;
  cfg.seed = 9;
  Network n1 = init_network(a, 6);
  Network n2 = init_network(a, 6);
  CHECK(train(n1, X, T, cfg).loss_curve == train(n2, X, T, cfg).loss_curve);
}

TEST_CASE("checkpoint round-trip is bitwise exact") {
  ArchDescriptor a = small_iat_arch(BasisFamily::Fourier, BasisFamily::PWQ, false, 40);
  a.standardize = true;
  Network net = init_network(a, 123);
  RngStream rng(4, "ck");
  Matrix X = random_matrix(10, 2, rng);
  Matrix T = random_matrix(10, 1, rng);
  TrainConfig cfg;
  cfg.epochs = 5;
  train(net, X, T, cfg);  // give the running stats non-trivial values

  std::string path = (std::filesystem::temp_directory_path() / "iatnet_test.ckpt").string();
  save_checkpoint(net, path);
  Network back = load_checkpoint(path);
  REQUIRE(back.layers.size() == net.layers.size());
  for (size_t i = 0; i < net.layers.size(); ++i) {
    const Layer& l1 = net.layers[i];
    const Layer& l2 = back.layers[i];
    CHECK(l1.kind == l2.kind);
    if (l1.kind == LayerKind::Affine) {
      CHECK(l1.W == l2.W);
      CHECK(l1.b == l2.b);
    }
    if (l1.kind == LayerKind::Standardize) {
      CHECK(l1.scale == l2.scale);
      CHECK(l1.run_mean == l2.run_mean);
      CHECK(l1.run_var == l2.run_var);
    }
  }
  Matrix Y1 = predict(net, X);
  Matrix Y2 = predict(back, X);
  CHECK(Y1 == Y2);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_checkpoint("/nonexistent/path.ckpt"), std::runtime_error);
}
