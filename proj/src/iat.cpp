#include "iatnet/iat.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace iatnet {

Sigma parse_sigma(std::string_view name) {
  std::string n;
  for (char c : name) n.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (n == "relu") return Sigma::ReLU;
  if (n == "tanh") return Sigma::Tanh;
  if (n == "sigmoid") return Sigma::Sigmoid;
  throw std::invalid_argument("unknown activation: " + std::string(name));
}

std::string sigma_name(Sigma s) {
  switch (s) {
    case Sigma::ReLU: return "relu";
    case Sigma::Tanh: return "tanh";
    case Sigma::Sigmoid: return "sigmoid";
  }
  return "?";
}

double sigma_eval(Sigma s, double x) {
  switch (s) {
    case Sigma::ReLU: return x > 0.0 ? x : 0.0;
    case Sigma::Tanh: return std::tanh(x);
    case Sigma::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
  }
  return 0.0;
}

double sigma_deriv(Sigma s, double x) {
  switch (s) {
    case Sigma::ReLU: return x > 0.0 ? 1.0 : 0.0;
    case Sigma::Tanh: {
      double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Sigma::Sigmoid: {
      double g = 1.0 / (1.0 + std::exp(-x));
      return g * (1.0 - g);
    }
  }
  return 0.0;
}

double ActivationPattern::measure() const {
  double m = 0.0;
  for (const auto& [lo, hi] : intervals) m += hi - lo;
  return m;
}

ActivationPattern pattern(const BasisSet& p, const Vector& z) {
  RootReport rep = sign_change_roots(p, z);
  ActivationPattern pat;
  std::vector<double> pts;
  pts.push_back(-1.0);
  pts.insert(pts.end(), rep.roots.begin(), rep.roots.end());
  pts.push_back(1.0);
  for (size_t i = 0; i < rep.signs.size(); ++i) {
    if (rep.signs[i] > 0 && pts[i + 1] > pts[i]) {
      pat.intervals.emplace_back(pts[i], pts[i + 1]);
    }
  }
  return pat;
}

Matrix activation_matrix(const BasisSet& p, const BasisSet& q, const ActivationPattern& pat) {
  Matrix S = Matrix::Zero(q.size, p.size);
  for (const auto& [lo, hi] : pat.intervals) S += pair_integral(p, q, lo, hi);
  return S;
}

IATLayerConfig IATLayerConfig::discretized(BasisSet p, BasisSet q, Sigma sigma, int M) {
  if (M < 1) throw std::invalid_argument("IAT discretization requires M >= 1");
  IATLayerConfig cfg;
  cfg.p = std::move(p);
  cfg.q = std::move(q);
  cfg.sigma = sigma;
  cfg.analytic = false;
  cfg.M = M;
  cfg.P = eval_grid(cfg.p, M);
  cfg.Q = eval_grid(cfg.q, M);
  return cfg;
}

IATLayerConfig IATLayerConfig::analytic_relu(BasisSet p, BasisSet q) {
  IATLayerConfig cfg;
  cfg.p = std::move(p);
  cfg.q = std::move(q);
  cfg.sigma = Sigma::ReLU;
  cfg.analytic = true;
  return cfg;
}

Vector forward_analytic_relu(const IATLayerConfig& cfg, const Vector& z) {
  return jacobian_analytic_relu(cfg, z) * z;
}

Matrix jacobian_analytic_relu(const IATLayerConfig& cfg, const Vector& z) {
  if (cfg.sigma != Sigma::ReLU) {
    throw std::invalid_argument("analytic evaluation is defined for ReLU only");
  }
  return activation_matrix(cfg.p, cfg.q, pattern(cfg.p, z));
}

Vector forward_discretized(const IATLayerConfig& cfg, const Vector& z) {
  Vector s = cfg.P.transpose() * z;
  for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = sigma_eval(cfg.sigma, s[i]);
  return (2.0 / cfg.M) * (cfg.Q * s);
}

Matrix jacobian_discretized(const IATLayerConfig& cfg, const Vector& z) {
  Vector s = cfg.P.transpose() * z;
  for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = sigma_deriv(cfg.sigma, s[i]);
  return (2.0 / cfg.M) * (cfg.Q * s.asDiagonal() * cfg.P.transpose());
}

Vector root_sensitivity(const BasisSet& p, const Vector& z, double r) {
  for (double k : p.knots) {
    if (std::abs(r - k) <= 1e-12 && !family_is_continuous(p.family)) {
      return Vector::Zero(p.size);  // fixed discontinuity, the root does not move
    }
  }
  double denom = z.dot(eval_derivative(p, r));
  if (std::abs(denom) <= 1e-12) {
    throw degeneracy_error("root_sensitivity: |z^T p'(r)| <= 1e-12 (non-simple root)");
  }
  return -eval(p, r) / denom;
}

}  // namespace iatnet
