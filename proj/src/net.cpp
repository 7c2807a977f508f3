#include "iatnet/net.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "iatnet/rng.hpp"

namespace iatnet {

namespace {

constexpr double kStdEps = 1e-5;

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

Layer Layer::affine(Matrix W, Vector b) {
  require(W.rows() == b.size(), "affine: W rows must match b size");
  Layer l;
  l.kind = LayerKind::Affine;
  l.W = std::move(W);
  l.b = std::move(b);
  return l;
}

Layer Layer::activation(Sigma s) {
  Layer l;
  l.kind = LayerKind::ScalarActivation;
  l.sigma = s;
  return l;
}

Layer Layer::iat_activation(std::shared_ptr<const IATLayerConfig> cfg) {
  Layer l;
  l.kind = LayerKind::IATActivation;
  l.iat = std::move(cfg);
  return l;
}

Layer Layer::standardize(int dim, double momentum) {
  Layer l;
  l.kind = LayerKind::Standardize;
  l.scale = Vector::Ones(dim);
  l.shift = Vector::Zero(dim);
  l.run_mean = Vector::Zero(dim);
  l.run_var = Vector::Ones(dim);
  l.momentum = momentum;
  return l;
}

int Layer::in_dim() const {
  switch (kind) {
    case LayerKind::Affine: return static_cast<int>(W.cols());
    case LayerKind::ScalarActivation: return -1;
    case LayerKind::IATActivation: return iat->in_dim();
    case LayerKind::Standardize: return static_cast<int>(scale.size());
  }
  return -1;
}

int Layer::out_dim() const {
  switch (kind) {
    case LayerKind::Affine: return static_cast<int>(W.rows());
    case LayerKind::ScalarActivation: return -1;
    case LayerKind::IATActivation: return iat->out_dim();
    case LayerKind::Standardize: return static_cast<int>(scale.size());
  }
  return -1;
}

std::string ArchDescriptor::to_string() const {
  std::ostringstream os;
  os << "in=" << input_dim << " out=" << output_dim << " width=" << width
     << " depth=" << depth << " act=" << (use_iat ? "iat" : "scalar")
     << " sigma=" << sigma_name(sigma);
  if (use_iat) {
    os << " basis-in=" << family_name(basis_in) << " basis-out=" << family_name(basis_out)
       << " mode=" << (analytic ? "analytic" : "disc") << " m=" << M;
  }
  os << " std=" << (standardize ? 1 : 0) << " std-mom=" << std_momentum;
  return os.str();
}

ArchDescriptor ArchDescriptor::parse(const std::string& line) {
  ArchDescriptor a;
  std::istringstream is(line);
  std::string kv;
  while (is >> kv) {
    auto eq = kv.find('=');
    require(eq != std::string::npos, "bad arch token: " + kv);
    std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
    if (key == "in") a.input_dim = std::stoi(val);
    else if (key == "out") a.output_dim = std::stoi(val);
    else if (key == "width") a.width = std::stoi(val);
    else if (key == "depth") a.depth = std::stoi(val);
    else if (key == "act") a.use_iat = (val == "iat");
    else if (key == "sigma") a.sigma = parse_sigma(val);
    else if (key == "basis-in") a.basis_in = parse_family(val);
    else if (key == "basis-out") a.basis_out = parse_family(val);
    else if (key == "mode") a.analytic = (val == "analytic");
    else if (key == "m") a.M = std::stoi(val);
    else if (key == "std") a.standardize = (val == "1");
    else if (key == "std-mom") a.std_momentum = std::stod(val);
    else throw std::invalid_argument("unknown arch key: " + key);
  }
  return a;
}

namespace {

Network build(const ArchDescriptor& arch) {
  require(arch.input_dim >= 1 && arch.output_dim >= 1, "network dims must be positive");
  require(arch.depth >= 1, "depth must be >= 1");
  require(arch.depth == 1 || arch.width >= 1, "hidden width must be positive");
  Network net;
  net.arch = arch;

  std::shared_ptr<const IATLayerConfig> iat_cfg;
  if (arch.use_iat && arch.depth > 1) {
    BasisSet p = make_basis(arch.basis_in, arch.width, BasisRole::Input);
    BasisSet q = make_basis(arch.basis_out, arch.width, BasisRole::Output);
    if (arch.analytic) {
      require(arch.sigma == Sigma::ReLU, "analytic mode requires relu");
      iat_cfg = std::make_shared<const IATLayerConfig>(
          IATLayerConfig::analytic_relu(std::move(p), std::move(q)));
    } else {
      iat_cfg = std::make_shared<const IATLayerConfig>(
          IATLayerConfig::discretized(std::move(p), std::move(q), arch.sigma, arch.M));
    }
  }

  for (int k = 0; k < arch.depth; ++k) {
    int in = (k == 0) ? arch.input_dim : arch.width;
    int out = (k == arch.depth - 1) ? arch.output_dim : arch.width;
    net.layers.push_back(Layer::affine(Matrix::Zero(out, in), Vector::Zero(out)));
    if (k + 1 < arch.depth) {
      if (arch.use_iat) {
        net.layers.push_back(Layer::iat_activation(iat_cfg));
      } else {
        net.layers.push_back(Layer::activation(arch.sigma));
      }
      if (arch.standardize) {
        net.layers.push_back(Layer::standardize(arch.width, arch.std_momentum));
      }
    }
  }
  return net;
}

}  // namespace

Network make_skeleton(const ArchDescriptor& arch) { return build(arch); }

Network init_network(const ArchDescriptor& arch, std::uint64_t seed) {
  Network net = build(arch);
  int affine_index = 0;
  for (Layer& l : net.layers) {
    if (l.kind != LayerKind::Affine) continue;
    RngStream rng(seed, "winit:" + std::to_string(affine_index++));
    double bound = 1.0 / std::sqrt(static_cast<double>(l.W.cols()));
    for (Eigen::Index i = 0; i < l.W.rows(); ++i) {
      for (Eigen::Index j = 0; j < l.W.cols(); ++j) l.W(i, j) = rng.uniform(-bound, bound);
    }
  }
  return net;
}

std::pair<Matrix, Tape> forward(const Network& net, const Matrix& X) {
  Matrix cur = X;
  Tape tape;
  tape.layers.resize(net.layers.size());
  for (size_t li = 0; li < net.layers.size(); ++li) {
    const Layer& l = net.layers[li];
    LayerTape& t = tape.layers[li];
    if (l.in_dim() >= 0 && cur.cols() != l.in_dim()) {
      throw std::invalid_argument("forward: layer " + std::to_string(li) + " expects " +
                                  std::to_string(l.in_dim()) + " columns, got " +
                                  std::to_string(cur.cols()));
    }
    switch (l.kind) {
      case LayerKind::Affine: {
        t.X = cur;
        cur = (cur * l.W.transpose()).rowwise() + l.b.transpose();
        break;
      }
      case LayerKind::ScalarActivation: {
        t.pre = cur;
        t.dmask.resize(cur.rows(), cur.cols());
        for (Eigen::Index i = 0; i < cur.rows(); ++i) {
          for (Eigen::Index j = 0; j < cur.cols(); ++j) {
            t.dmask(i, j) = sigma_deriv(l.sigma, cur(i, j));
            cur(i, j) = sigma_eval(l.sigma, cur(i, j));
          }
        }
        break;
      }
      case LayerKind::IATActivation: {
        const IATLayerConfig& cfg = *l.iat;
        if (cfg.analytic) {
          t.pre = cur;  // the layer inputs z, one per row
          Matrix out(cur.rows(), cfg.out_dim());
          t.Smats.resize(cur.rows());
          for (Eigen::Index i = 0; i < cur.rows(); ++i) {
            Vector z = cur.row(i).transpose();
            t.Smats[i] = activation_matrix(cfg.p, cfg.q, pattern(cfg.p, z));
            out.row(i) = (t.Smats[i] * z).transpose();
          }
          cur = std::move(out);
        } else {
          t.pre = cur * cfg.P;  // n x M state values at the midpoints
          t.dmask.resize(t.pre.rows(), t.pre.cols());
          Matrix u(t.pre.rows(), t.pre.cols());
          for (Eigen::Index i = 0; i < t.pre.rows(); ++i) {
            for (Eigen::Index j = 0; j < t.pre.cols(); ++j) {
              t.dmask(i, j) = sigma_deriv(cfg.sigma, t.pre(i, j));
              u(i, j) = sigma_eval(cfg.sigma, t.pre(i, j));
            }
          }
          cur = (2.0 / cfg.M) * (u * cfg.Q.transpose());
        }
        break;
      }
      case LayerKind::Standardize: {
        t.batch_mean = cur.colwise().mean().transpose();
        Matrix xc = cur.rowwise() - t.batch_mean.transpose();
        t.batch_var = xc.array().square().colwise().mean().transpose();
        t.inv_std = (t.batch_var.array() + kStdEps).rsqrt();
        t.xhat = xc.array().rowwise() * t.inv_std.transpose().array();
        cur = (t.xhat.array().rowwise() * l.scale.transpose().array()).matrix().rowwise() +
              l.shift.transpose();
        break;
      }
    }
  }
  return {std::move(cur), std::move(tape)};
}

Matrix predict(const Network& net, const Matrix& X) {
  Matrix cur = X;
  for (const Layer& l : net.layers) {
    switch (l.kind) {
      case LayerKind::Affine:
        cur = (cur * l.W.transpose()).rowwise() + l.b.transpose();
        break;
      case LayerKind::ScalarActivation:
        for (Eigen::Index i = 0; i < cur.size(); ++i) {
          cur.data()[i] = sigma_eval(l.sigma, cur.data()[i]);
        }
        break;
      case LayerKind::IATActivation: {
        const IATLayerConfig& cfg = *l.iat;
        if (cfg.analytic) {
          Matrix out(cur.rows(), cfg.out_dim());
          for (Eigen::Index i = 0; i < cur.rows(); ++i) {
            out.row(i) = forward_analytic_relu(cfg, cur.row(i).transpose()).transpose();
          }
          cur = std::move(out);
        } else {
          Matrix s = cur * cfg.P;
          for (Eigen::Index i = 0; i < s.size(); ++i) {
            s.data()[i] = sigma_eval(cfg.sigma, s.data()[i]);
          }
          cur = (2.0 / cfg.M) * (s * cfg.Q.transpose());
        }
        break;
      }
      case LayerKind::Standardize: {
        Vector inv = (l.run_var.array() + kStdEps).rsqrt();
        Matrix xc = cur.rowwise() - l.run_mean.transpose();
        Matrix xhat = xc.array().rowwise() * inv.transpose().array();
        cur = (xhat.array().rowwise() * l.scale.transpose().array()).matrix().rowwise() +
              l.shift.transpose();
        break;
      }
    }
  }
  return cur;
}

Gradients backward(const Network& net, const Tape& tape, const Matrix& dY) {
  if (tape.layers.size() != net.layers.size()) {
    throw std::invalid_argument("backward: tape does not match network");
  }
  Gradients g;
  g.layers.resize(net.layers.size());
  Matrix cur = dY;
  for (size_t ri = net.layers.size(); ri-- > 0;) {
    const Layer& l = net.layers[ri];
    const LayerTape& t = tape.layers[ri];
    LayerGrads& lg = g.layers[ri];
    switch (l.kind) {
      case LayerKind::Affine: {
        lg.dW = cur.transpose() * t.X;
        lg.db = cur.colwise().sum().transpose();
        cur = cur * l.W;
        break;
      }
      case LayerKind::ScalarActivation: {
        cur = cur.cwiseProduct(t.dmask);
        break;
      }
      case LayerKind::IATActivation: {
        const IATLayerConfig& cfg = *l.iat;
        if (cfg.analytic) {
          Matrix dz(cur.rows(), cfg.in_dim());
          for (Eigen::Index i = 0; i < cur.rows(); ++i) {
            dz.row(i) = cur.row(i) * t.Smats[i];
          }
          cur = std::move(dz);
        } else {
          cur = (2.0 / cfg.M) * ((cur * cfg.Q).cwiseProduct(t.dmask) * cfg.P.transpose());
        }
        break;
      }
      case LayerKind::Standardize: {
        const double n = static_cast<double>(cur.rows());
        lg.dscale = cur.cwiseProduct(t.xhat).colwise().sum().transpose();
        lg.dshift = cur.colwise().sum().transpose();
        Matrix dxhat = cur.array().rowwise() * l.scale.transpose().array();
        Vector sum_dxhat = dxhat.colwise().sum().transpose();
        Vector sum_dxhat_xhat = dxhat.cwiseProduct(t.xhat).colwise().sum().transpose();
        Matrix term = (n * dxhat).rowwise() - sum_dxhat.transpose();
        term -= (t.xhat.array().rowwise() * sum_dxhat_xhat.transpose().array()).matrix();
        cur = term.array().rowwise() * (t.inv_std / n).transpose().array();
        break;
      }
    }
  }
  return g;
}

double mse_loss(const Matrix& Y, const Matrix& T) {
  require(Y.rows() == T.rows() && Y.cols() == T.cols(), "mse_loss: shape mismatch");
  return (Y - T).squaredNorm() / static_cast<double>(Y.size());
}

Matrix mse_grad(const Matrix& Y, const Matrix& T) {
  require(Y.rows() == T.rows() && Y.cols() == T.cols(), "mse_grad: shape mismatch");
  return 2.0 * (Y - T) / static_cast<double>(Y.size());
}

double accuracy_sign(const Matrix& Y, const Matrix& T) {
  require(Y.rows() == T.rows() && Y.cols() == T.cols(), "accuracy_sign: shape mismatch");
  auto sgn = [](double v) { return v >= 0.0 ? 1 : -1; };
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < Y.rows(); ++i) {
    bool all = true;
    for (Eigen::Index j = 0; j < Y.cols(); ++j) all = all && sgn(Y(i, j)) == sgn(T(i, j));
    hits += all;
  }
  return static_cast<double>(hits) / static_cast<double>(Y.rows());
}

std::vector<ParamRef> parameters(Network& net) {
  std::vector<ParamRef> refs;
  for (Layer& l : net.layers) {
    switch (l.kind) {
      case LayerKind::Affine:
        refs.push_back({l.W.data(), l.W.size()});
        refs.push_back({l.b.data(), l.b.size()});
        break;
      case LayerKind::Standardize:
        refs.push_back({l.scale.data(), l.scale.size()});
        refs.push_back({l.shift.data(), l.shift.size()});
        break;
      default:
        break;
    }
  }
  return refs;
}

std::vector<ParamRef> grad_arrays(Gradients& g, const Network& net) {
  std::vector<ParamRef> refs;
  for (size_t i = 0; i < net.layers.size(); ++i) {
    LayerGrads& lg = g.layers[i];
    switch (net.layers[i].kind) {
      case LayerKind::Affine:
        refs.push_back({lg.dW.data(), lg.dW.size()});
        refs.push_back({lg.db.data(), lg.db.size()});
        break;
      case LayerKind::Standardize:
        refs.push_back({lg.dscale.data(), lg.dscale.size()});
        refs.push_back({lg.dshift.data(), lg.dshift.size()});
        break;
      default:
        break;
    }
  }
  return refs;
}

AdamState make_adam_state(Network& net) {
  AdamState st;
  for (const ParamRef& p : parameters(net)) {
    st.m.push_back(Vector::Zero(p.size));
    st.v.push_back(Vector::Zero(p.size));
  }
  return st;
}

void adam_step(Network& net, Gradients& grads, AdamState& state, double lr, double beta1,
               double beta2, double eps) {
  auto ps = parameters(net);
  auto gs = grad_arrays(grads, net);
  require(ps.size() == gs.size() && ps.size() == state.m.size(), "adam_step: state mismatch");
  ++state.t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (size_t k = 0; k < ps.size(); ++k) {
    require(ps[k].size == gs[k].size, "adam_step: gradient size mismatch");
    double* p = ps[k].data;
    const double* g = gs[k].data;
    Vector& m = state.m[k];
    Vector& v = state.v[k];
    for (Eigen::Index i = 0; i < ps[k].size; ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
      p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
  }
}

void sgd_step(Network& net, Gradients& grads, double lr) {
  auto ps = parameters(net);
  auto gs = grad_arrays(grads, net);
  for (size_t k = 0; k < ps.size(); ++k) {
    for (Eigen::Index i = 0; i < ps[k].size; ++i) ps[k].data[i] -= lr * gs[k].data[i];
  }
}

TrainDivergence::TrainDivergence(double last, int at_epoch)
    : std::runtime_error("training diverged at epoch " + std::to_string(at_epoch) +
                         "; last finite loss " + std::to_string(last)),
      last_finite_loss(last),
      epoch(at_epoch) {}

namespace {

void apply_running_stats(Network& net, const Tape& tape) {
  for (size_t i = 0; i < net.layers.size(); ++i) {
    Layer& l = net.layers[i];
    if (l.kind != LayerKind::Standardize) continue;
    const LayerTape& t = tape.layers[i];
    l.run_mean = (1.0 - l.momentum) * l.run_mean + l.momentum * t.batch_mean;
    l.run_var = (1.0 - l.momentum) * l.run_var + l.momentum * t.batch_var;
  }
}

void optimize_step(Network& net, Gradients& g, AdamState& adam, const TrainConfig& cfg) {
  if (cfg.optimizer == TrainConfig::Optimizer::Adam) {
    adam_step(net, g, adam, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);
  } else {
    sgd_step(net, g, cfg.lr);
  }
}

}  // namespace

TrainReport train(Network& net, const Matrix& X, const Matrix& T, const TrainConfig& cfg) {
  require(cfg.lr > 0.0, "train: lr must be positive");
  require(cfg.epochs >= 1, "train: epochs must be >= 1");
  require(X.rows() == T.rows(), "train: X and T row mismatch");
  const auto t0 = std::chrono::steady_clock::now();

  AdamState adam = make_adam_state(net);
  TrainReport rep;
  rep.seed = cfg.seed;
  double last_finite = 0.0;

  const Eigen::Index n = X.rows();
  const Eigen::Index bs =
      cfg.batch > 0 ? std::min<Eigen::Index>(cfg.batch, n) : n;
  RngStream shuffle_rng(cfg.seed, "shuffle");
  std::vector<Eigen::Index> order(n);
  for (Eigen::Index i = 0; i < n; ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    if (bs == n) {
      auto [Y, tape] = forward(net, X);
      epoch_loss = mse_loss(Y, T);
      if (!std::isfinite(epoch_loss)) throw TrainDivergence(last_finite, epoch);
      last_finite = epoch_loss;
      Gradients g = backward(net, tape, mse_grad(Y, T));
      optimize_step(net, g, adam, cfg);
      apply_running_stats(net, tape);
    } else {
      for (Eigen::Index i = n - 1; i > 0; --i) {
        std::swap(order[i], order[shuffle_rng.uniform_index(i + 1)]);
      }
      long seen = 0;
      for (Eigen::Index start = 0; start < n; start += bs) {
        Eigen::Index cnt = std::min<Eigen::Index>(bs, n - start);
        Matrix xb(cnt, X.cols()), tb(cnt, T.cols());
        for (Eigen::Index r = 0; r < cnt; ++r) {
          xb.row(r) = X.row(order[start + r]);
          tb.row(r) = T.row(order[start + r]);
        }
        auto [Y, tape] = forward(net, xb);
        double loss = mse_loss(Y, tb);
        if (!std::isfinite(loss)) throw TrainDivergence(last_finite, epoch);
        last_finite = loss;
        epoch_loss += loss * static_cast<double>(cnt);
        seen += cnt;
        Gradients g = backward(net, tape, mse_grad(Y, tb));
        optimize_step(net, g, adam, cfg);
        apply_running_stats(net, tape);
      }
      epoch_loss /= static_cast<double>(seen);
    }
    rep.loss_curve.push_back(epoch_loss);
  }

  Matrix Yfin = predict(net, X);
  rep.final_loss = mse_loss(Yfin, T);
  if (!std::isfinite(rep.final_loss)) throw TrainDivergence(last_finite, cfg.epochs);
  rep.final_accuracy = accuracy_sign(Yfin, T);
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  return rep;
}

Matrix sample_nondegenerate_inputs(const Network& net, int n, std::uint64_t seed,
                                   double margin) {
  RngStream rng(seed, "inputs");
  Matrix X(n, net.arch.input_dim);
  auto row_ok = [&](const Tape& tape, Eigen::Index row) {
    for (size_t li = 0; li < net.layers.size(); ++li) {
      const Layer& l = net.layers[li];
      if (l.kind != LayerKind::IATActivation) continue;
      const IATLayerConfig& cfg = *l.iat;
      const Matrix& pre = tape.layers[li].pre;
      if (cfg.analytic) {
        Vector z = pre.row(row).transpose();
        RootReport rep = sign_change_roots(cfg.p, z);
        for (size_t k = 1; k < rep.roots.size(); ++k) {
          if (rep.roots[k] - rep.roots[k - 1] < 1e-3) return false;
        }
        for (double r : rep.roots) {
          bool bp = false;
          for (double bpk : rep.breakpoints) bp = bp || bpk == r;
          if (!bp && std::abs(z.dot(eval_derivative(cfg.p, r))) < 0.05 * z.norm()) {
            return false;
          }
        }
      } else {
        for (Eigen::Index m = 0; m < pre.cols(); ++m) {
          if (std::abs(pre(row, m)) < margin && cfg.P.col(m).norm() > 0.0) return false;
        }
      }
    }
    return true;
  };
  for (int i = 0; i < n; ++i) {
    for (int attempt = 0;; ++attempt) {
      for (int j = 0; j < net.arch.input_dim; ++j) X(i, j) = rng.uniform(-1.0, 1.0);
      Tape tape = forward(net, X.topRows(i + 1)).second;
      if (row_ok(tape, i) || attempt > 500) break;
    }
  }
  return X;
}

double grad_check(Network& net, const Matrix& X, const Matrix& T, double fd_step) {
  auto [Y, tape] = forward(net, X);
  Gradients g = backward(net, tape, mse_grad(Y, T));
  auto ps = parameters(net);
  auto gs = grad_arrays(g, net);
  double worst = 0.0;
  for (size_t k = 0; k < ps.size(); ++k) {
    for (Eigen::Index i = 0; i < ps[k].size; ++i) {
      double saved = ps[k].data[i];
      ps[k].data[i] = saved + fd_step;
      double lp = mse_loss(forward(net, X).first, T);
      ps[k].data[i] = saved - fd_step;
      double lm = mse_loss(forward(net, X).first, T);
      ps[k].data[i] = saved;
      double fd = (lp - lm) / (2.0 * fd_step);
      double an = gs[k].data[i];
      worst = std::max(worst, std::abs(an - fd) / std::max(1.0, std::abs(an) + std::abs(fd)));
    }
  }
  return worst;
}

void save_checkpoint(const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  out << "iatnet-ckpt v1\n";
  out << "arch " << net.arch.to_string() << "\n";
  char buf[64];
  auto emit = [&](const double* data, Eigen::Index rows, Eigen::Index cols) {
    out << "W " << rows << " " << cols << "\n";
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", data[i * cols + j]);
        out << buf << (j + 1 < cols ? " " : "\n");
      }
    }
  };
  for (const Layer& l : net.layers) {
    if (l.kind == LayerKind::Affine) {
      emit(l.W.data(), l.W.rows(), l.W.cols());
      emit(l.b.data(), l.b.size(), 1);
    } else if (l.kind == LayerKind::Standardize) {
      emit(l.scale.data(), l.scale.size(), 1);
      emit(l.shift.data(), l.shift.size(), 1);
      emit(l.run_mean.data(), l.run_mean.size(), 1);
      emit(l.run_var.data(), l.run_var.size(), 1);
    }
  }
  if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

Network load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string line;
  std::getline(in, line);
  if (line != "iatnet-ckpt v1") throw std::runtime_error("bad checkpoint header: " + line);
  std::getline(in, line);
  if (line.rfind("arch ", 0) != 0) throw std::runtime_error("missing arch line");
  Network net = make_skeleton(ArchDescriptor::parse(line.substr(5)));

  auto read_block = [&](double* data, Eigen::Index rows, Eigen::Index cols) {
    std::string tag;
    Eigen::Index r, c;
    if (!(in >> tag >> r >> c) || tag != "W" || r != rows || c != cols) {
      throw std::runtime_error("checkpoint block mismatch");
    }
    for (Eigen::Index i = 0; i < rows * cols; ++i) {
      if (!(in >> data[i])) throw std::runtime_error("checkpoint truncated");
    }
  };
  for (Layer& l : net.layers) {
    if (l.kind == LayerKind::Affine) {
      read_block(l.W.data(), l.W.rows(), l.W.cols());
      read_block(l.b.data(), l.b.size(), 1);
    } else if (l.kind == LayerKind::Standardize) {
      read_block(l.scale.data(), l.scale.size(), 1);
      read_block(l.shift.data(), l.shift.size(), 1);
      read_block(l.run_mean.data(), l.run_mean.size(), 1);
      read_block(l.run_var.data(), l.run_var.size(), 1);
    }
  }
  return net;
}

}  // namespace iatnet
