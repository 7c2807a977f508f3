#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "iatnet/iat.hpp"
#include "iatnet/linalg.hpp"

namespace iatnet {

enum class LayerKind { Affine, ScalarActivation, IATActivation, Standardize };

// Tagged layer record. Backward passes are hand-derived per kind; there is no
// general autodiff graph.
struct Layer {
  LayerKind kind;

  Matrix W;  // Affine: out x in
  Vector b;

  Sigma sigma = Sigma::ReLU;  // ScalarActivation

  std::shared_ptr<const IATLayerConfig> iat;  // IATActivation

  Vector scale, shift, run_mean, run_var;  // Standardize
  double momentum = 0.1;

  static Layer affine(Matrix W, Vector b);
  static Layer activation(Sigma s);
  static Layer iat_activation(std::shared_ptr<const IATLayerConfig> cfg);
  static Layer standardize(int dim, double momentum = 0.1);

  int in_dim() const;   // -1 when any width is accepted
  int out_dim() const;  // -1 when it matches the input
};

struct ArchDescriptor {
  int input_dim = 1;
  int output_dim = 1;
  int width = 50;
  int depth = 3;  // number of affine layers; depth-1 activation layers between
  bool use_iat = true;
  Sigma sigma = Sigma::ReLU;
  BasisFamily basis_in = BasisFamily::Fourier;
  BasisFamily basis_out = BasisFamily::PWQ;
  bool analytic = false;
  int M = 500;
  bool standardize = false;
  double std_momentum = 0.1;

  std::string to_string() const;
  static ArchDescriptor parse(const std::string& line);
};

struct Network {
  std::vector<Layer> layers;
  ArchDescriptor arch;
};

// Affine weights ~ U(-1/sqrt(fan_in), +1/sqrt(fan_in)) from the counter-based
// stream (seed, "winit:<k>"); biases zero. Bitwise deterministic per seed.
Network init_network(const ArchDescriptor& arch, std::uint64_t seed);
Network make_skeleton(const ArchDescriptor& arch);  // zero weights

struct LayerTape {
  Matrix X;                 // layer input
  Matrix pre;               // pre-activation values (scalar/IAT-disc state)
  Matrix dmask;             // sigma' at the pre-activation
  std::vector<Matrix> Smats;  // IAT analytic: per-sample activation matrix
  Matrix xhat;              // standardize
  Vector inv_std, batch_mean, batch_var;
};

struct Tape {
  std::vector<LayerTape> layers;
};

// Pure: never mutates the network (standardize uses batch statistics and the
// new running stats are applied separately by train()).
std::pair<Matrix, Tape> forward(const Network& net, const Matrix& X);

// Inference path: standardize layers use their running statistics.
Matrix predict(const Network& net, const Matrix& X);

struct LayerGrads {
  Matrix dW;
  Vector db;
  Vector dscale, dshift;
};

struct Gradients {
  std::vector<LayerGrads> layers;
};

Gradients backward(const Network& net, const Tape& tape, const Matrix& dY);

double mse_loss(const Matrix& Y, const Matrix& T);
Matrix mse_grad(const Matrix& Y, const Matrix& T);
// fraction of rows whose signs all match; sign(0) counts as +1
double accuracy_sign(const Matrix& Y, const Matrix& T);

// flat views over every trainable array, in a fixed layer order
struct ParamRef {
  double* data;
  Eigen::Index size;
};
std::vector<ParamRef> parameters(Network& net);
std::vector<ParamRef> grad_arrays(Gradients& g, const Network& net);

struct AdamState {
  std::vector<Vector> m, v;
  long t = 0;
};
AdamState make_adam_state(Network& net);
void adam_step(Network& net, Gradients& grads, AdamState& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
void sgd_step(Network& net, Gradients& grads, double lr);

struct TrainConfig {
  enum class Optimizer { Adam, SGD };
  Optimizer optimizer = Optimizer::Adam;
  double lr = 1e-3;
  int epochs = 3000;
  int batch = 0;  // 0 = full batch
  std::uint64_t seed = 1;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

struct TrainReport {
  std::vector<double> loss_curve;  // one entry per epoch
  double final_loss = 0.0;
  double final_accuracy = 0.0;
  double wall_ms = 0.0;
  std::uint64_t seed = 0;
};

struct TrainDivergence : std::runtime_error {
  TrainDivergence(double last, int at_epoch);
  double last_finite_loss;
  int epoch;
};

TrainReport train(Network& net, const Matrix& X, const Matrix& T, const TrainConfig& cfg);

// Inputs resampled until every IAT layer is clear of pattern degeneracies:
// discretized layers keep |state| >= margin at every midpoint the input can
// move; analytic layers keep roots simple and separated.
Matrix sample_nondegenerate_inputs(const Network& net, int n, std::uint64_t seed,
                                   double margin = 1e-4);

// max over parameters of |analytic - central FD| / max(1, |analytic| + |FD|)
double grad_check(Network& net, const Matrix& X, const Matrix& T, double fd_step = 1e-6);

// Versioned text checkpoint, 17 significant digits (round-trip exact).
void save_checkpoint(const Network& net, const std::string& path);
Network load_checkpoint(const std::string& path);

}  // namespace iatnet
