#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "iatnet/linalg.hpp"

namespace iatnet {

// The six basis families. Properties:
//   continuous:   PWL, PWQ, Fourier, PWLWavelet
//   smooth (C1):  PWQ, Fourier
//   global:       Fourier
//   zero integral: Fourier, PWLWavelet, RectWavelet
enum class BasisFamily { Rect, PWL, PWQ, Fourier, PWLWavelet, RectWavelet };

// Role affects amplitude only: Rect/RectWavelet in Output role use height d/2
// so that a Rect/Rect layer reduces exactly to the element-wise activation.
enum class BasisRole { Input, Output };

BasisFamily parse_family(std::string_view name);  // rect|pwl|pwq|fourier|pwl-w|rect-w
std::string family_name(BasisFamily f);
bool family_is_continuous(BasisFamily f);
bool family_is_smooth(BasisFamily f);
bool family_is_global(BasisFamily f);
bool family_has_zero_integral(BasisFamily f);

// A collection of d one-dimensional functions on [-1,1]. Immutable after
// construction; every operation below is a pure function of its arguments.
struct BasisSet {
  BasisFamily family;
  int size = 0;           // d
  BasisRole role = BasisRole::Input;
  double amplitude = 1.0;
  std::vector<double> knots;  // piecewise families: segment boundaries incl. +-1
  int k_max = 0;              // Fourier: highest frequency index
};

BasisSet make_basis(BasisFamily family, int d, BasisRole role);

// Componentwise values p_i(s); right-continuous at discontinuity breakpoints.
Vector eval(const BasisSet& b, double s);

// Componentwise p_i'(s); one-sided (right) at breakpoints, left at s = 1.
Vector eval_derivative(const BasisSet& b, double s);

// d x M matrix of values at the midpoints s_m = -1 + (2m-1)/M.
Matrix eval_grid(const BasisSet& b, int M);

// Exact \int_{-1}^{1} p_i(s) ds per component.
Vector integrals(const BasisSet& b);

// Where f(s) = z^T p(s) changes sign on (-1,1).
//   roots:       strictly increasing; adjacent interval signs always differ
//   breakpoints: the subset of roots sitting on fixed basis discontinuities
//   signs:       one of -1/0/+1 per interval of {-1} u roots u {1}
struct RootReport {
  std::vector<double> roots;
  std::vector<double> breakpoints;
  std::vector<int> signs;
};

RootReport sign_change_roots(const BasisSet& b, const Vector& z);

// Entry (i,j) = \int_a^b q_i(s) p_j(s) ds, segmented 8-point Gauss-Legendre
// split at the knots of both sets; absolute accuracy 1e-12.
Matrix pair_integral(const BasisSet& p, const BasisSet& q, double a, double b);

}  // namespace iatnet
