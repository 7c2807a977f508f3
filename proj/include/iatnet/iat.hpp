#pragma once

#include <utility>
#include <vector>

#include "iatnet/basis.hpp"
#include "iatnet/linalg.hpp"

namespace iatnet {

enum class Sigma { ReLU, Tanh, Sigmoid };

Sigma parse_sigma(std::string_view name);
std::string sigma_name(Sigma s);
double sigma_eval(Sigma s, double x);
double sigma_deriv(Sigma s, double x);  // ReLU uses sigma'(0) = 0

// The subset of [-1,1] where the state function z^T p(s) is strictly positive:
// disjoint open intervals, sorted.
struct ActivationPattern {
  std::vector<std::pair<double, double>> intervals;

  double measure() const;
  bool operator==(const ActivationPattern&) const = default;
};

ActivationPattern pattern(const BasisSet& p, const Vector& z);

// S(D) = \int_D q(s) p(s)^T ds, evaluated interval by interval. For IAT-ReLU
// this matrix is simultaneously the linear-form coefficient and the Jacobian.
Matrix activation_matrix(const BasisSet& p, const BasisSet& q, const ActivationPattern& pat);

// One IAT layer: z in R^{d1} -> u in R^{d2}. Immutable after construction;
// discretized configs precompute the d x M midpoint grids P and Q.
struct IATLayerConfig {
  BasisSet p;  // input basis, size d1
  BasisSet q;  // output basis, size d2
  Sigma sigma = Sigma::ReLU;
  bool analytic = false;
  int M = 0;
  Matrix P;  // d1 x M (discretized mode)
  Matrix Q;  // d2 x M

  static IATLayerConfig discretized(BasisSet p, BasisSet q, Sigma sigma, int M);
  static IATLayerConfig analytic_relu(BasisSet p, BasisSet q);

  int in_dim() const { return p.size; }
  int out_dim() const { return q.size; }
};

// S(D(z)) z
Vector forward_analytic_relu(const IATLayerConfig& cfg, const Vector& z);
// exactly S(D(z)): the boundary terms of the general gradient vanish
Matrix jacobian_analytic_relu(const IATLayerConfig& cfg, const Vector& z);
// (2/M) Q sigma(P^T z)
Vector forward_discretized(const IATLayerConfig& cfg, const Vector& z);
// (2/M) Q diag(sigma'(P^T z)) P^T
Matrix jacobian_discretized(const IATLayerConfig& cfg, const Vector& z);

// dr/dz = -p(r) / (z^T p'(r)) for a simple root r; zero for breakpoint roots.
// Throws degeneracy_error when |z^T p'(r)| <= 1e-12.
struct degeneracy_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
Vector root_sensitivity(const BasisSet& p, const Vector& z, double r);

}  // namespace iatnet
