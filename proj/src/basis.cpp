#include "iatnet/basis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace iatnet {

namespace {

constexpr double kPi = 3.14159265358979323846;

// 8-point Gauss-Legendre nodes/weights on [-1,1].
constexpr double kGlNode[8] = {
    -0.9602898564975362316835609, -0.7966664774136267395915539,
    -0.5255324099163289858177390, -0.1834346424956498049394761,
    0.1834346424956498049394761,  0.5255324099163289858177390,
    0.7966664774136267395915539,  0.9602898564975362316835609};
constexpr double kGlWeight[8] = {
    0.1012285362903762591525314, 0.2223810344533744705443560,
    0.3137066458778872873379622, 0.3626837833783619829651504,
    0.3626837833783619829651504, 0.3137066458778872873379622,
    0.2223810344533744705443560, 0.1012285362903762591525314};

void check_domain(double s) {
  if (!(s >= -1.0 && s <= 1.0)) {
    throw std::domain_error("basis evaluation outside [-1,1]: s=" + std::to_string(s));
  }
}

int min_size(BasisFamily f) { return f == BasisFamily::PWL ? 3 : 2; }

// Quadratic B-spline on [0,3] with unit knot spacing, peak 3/4 at t=1.5.
double bspline2(double t) {
  if (t <= 0.0 || t >= 3.0) return 0.0;
  if (t < 1.0) return 0.5 * t * t;
  if (t < 2.0) return 0.5 * (-2.0 * t * t + 6.0 * t - 3.0);
  return 0.5 * (3.0 - t) * (3.0 - t);
}

double bspline2_deriv(double t) {
  if (t <= 0.0 || t >= 3.0) return 0.0;
  if (t < 1.0) return t;
  if (t < 2.0) return 3.0 - 2.0 * t;
  return t - 3.0;
}

// index of the length-h cell containing s, clamped so s = 1 lands in the last
// cell (right-continuous convention at interior breakpoints)
int cell_index(double s, int ncells, double h) {
  int k = static_cast<int>(std::floor((s + 1.0) / h));
  return std::clamp(k, 0, ncells - 1);
}

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

double state_value(const BasisSet& b, const Vector& z, double s) { return z.dot(eval(b, s)); }

}  // namespace

BasisFamily parse_family(std::string_view name) {
  std::string n;
  n.reserve(name.size());
  for (char c : name) n.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (n == "rect") return BasisFamily::Rect;
  if (n == "pwl") return BasisFamily::PWL;
  if (n == "pwq") return BasisFamily::PWQ;
  if (n == "fourier") return BasisFamily::Fourier;
  if (n == "pwl-w") return BasisFamily::PWLWavelet;
  if (n == "rect-w") return BasisFamily::RectWavelet;
  throw std::invalid_argument("unknown basis family: " + std::string(name));
}

std::string family_name(BasisFamily f) {
  switch (f) {
    case BasisFamily::Rect: return "rect";
    case BasisFamily::PWL: return "pwl";
    case BasisFamily::PWQ: return "pwq";
    case BasisFamily::Fourier: return "fourier";
    case BasisFamily::PWLWavelet: return "pwl-w";
    case BasisFamily::RectWavelet: return "rect-w";
  }
  return "?";
}

bool family_is_continuous(BasisFamily f) {
  return f != BasisFamily::Rect && f != BasisFamily::RectWavelet;
}
bool family_is_smooth(BasisFamily f) {
  return f == BasisFamily::PWQ || f == BasisFamily::Fourier;
}
bool family_is_global(BasisFamily f) { return f == BasisFamily::Fourier; }
bool family_has_zero_integral(BasisFamily f) {
  return f == BasisFamily::Fourier || f == BasisFamily::PWLWavelet ||
         f == BasisFamily::RectWavelet;
}

BasisSet make_basis(BasisFamily family, int d, BasisRole role) {
  if (d < min_size(family)) {
    throw std::invalid_argument("basis size too small for " + family_name(family) + ": d=" +
                                std::to_string(d));
  }
  BasisSet b;
  b.family = family;
  b.size = d;
  b.role = role;
  b.amplitude = 1.0;
  if (role == BasisRole::Output &&
      (family == BasisFamily::Rect || family == BasisFamily::RectWavelet)) {
    b.amplitude = d / 2.0;
  }
  auto uniform_knots = [d](int per_cell) {
    std::vector<double> k;
    int n = d * per_cell;
    k.reserve(n + 1);
    for (int i = 0; i <= n; ++i) k.push_back(-1.0 + 2.0 * i / n);
    return k;
  };
  switch (family) {
    case BasisFamily::Rect:
    case BasisFamily::PWQ:
      b.knots = uniform_knots(1);
      break;
    case BasisFamily::PWL: {
      b.knots.reserve(d);
      for (int i = 0; i < d; ++i) b.knots.push_back(-1.0 + 2.0 * i / (d - 1));
      break;
    }
    case BasisFamily::RectWavelet:
      b.knots = uniform_knots(2);
      break;
    case BasisFamily::PWLWavelet:
      b.knots = uniform_knots(4);
      break;
    case BasisFamily::Fourier:
      b.k_max = (d + 1) / 2;
      break;
  }
  return b;
}

Vector eval(const BasisSet& b, double s) {
  check_domain(s);
  const int d = b.size;
  const double amp = b.amplitude;
  Vector v = Vector::Zero(d);
  switch (b.family) {
    case BasisFamily::Rect: {
      v[cell_index(s, d, 2.0 / d)] = amp;
      break;
    }
    case BasisFamily::PWL: {
      const double h = 2.0 / (d - 1);
      for (int i = 0; i < d; ++i) {
        double node = -1.0 + i * h;
        v[i] = std::max(0.0, 1.0 - std::abs(s - node) / h);
      }
      break;
    }
    case BasisFamily::PWQ: {
      const double h = 2.0 / d;
      int k = cell_index(s, d, h);
      for (int i = k; i <= k + 2; ++i) {  // 1-based bump ids covering cell k
        if (i < 1 || i > d) continue;
        double u = (s - (-1.0 + (i - 2) * h)) / h;
        v[i - 1] = amp * (4.0 / 3.0) * bspline2(u);
      }
      break;
    }
    case BasisFamily::Fourier: {
      for (int j = 0; j < d; ++j) {
        int k = j / 2 + 1;
        v[j] = (j % 2 == 0) ? std::sin(k * kPi * s) : std::cos(k * kPi * s);
      }
      break;
    }
    case BasisFamily::RectWavelet: {
      int j = cell_index(s, 2 * d, 1.0 / d);
      v[j / 2] = (j % 2 == 0) ? amp : -amp;
      break;
    }
    case BasisFamily::PWLWavelet: {
      // interpolate between exact vertex values so the structural zeros at
      // subinterval edges and centers evaluate to exactly 0
      static constexpr double vert[5] = {0.0, 1.0, 0.0, -1.0, 0.0};
      int j = cell_index(s, 4 * d, 0.5 / d);
      double t0 = b.knots[j], t1 = b.knots[j + 1];
      double lam = (s - t0) / (t1 - t0);
      v[j / 4] = amp * (vert[j % 4] * (1.0 - lam) + vert[j % 4 + 1] * lam);
      break;
    }
  }
  return v;
}

Vector eval_derivative(const BasisSet& b, double s) {
  check_domain(s);
  const int d = b.size;
  const double amp = b.amplitude;
  Vector v = Vector::Zero(d);
  switch (b.family) {
    case BasisFamily::Rect:
    case BasisFamily::RectWavelet:
      break;  // piecewise constant
    case BasisFamily::PWL: {
      const double h = 2.0 / (d - 1);
      int k = cell_index(s, d - 1, h);  // node segment [x_k, x_{k+1}]
      v[k] = -1.0 / h;
      v[k + 1] = 1.0 / h;
      break;
    }
    case BasisFamily::PWQ: {
      const double h = 2.0 / d;
      int k = cell_index(s, d, h);
      for (int i = k; i <= k + 2; ++i) {
        if (i < 1 || i > d) continue;
        double u = (s - (-1.0 + (i - 2) * h)) / h;
        v[i - 1] = amp * (4.0 / 3.0) * bspline2_deriv(u) / h;
      }
      break;
    }
    case BasisFamily::Fourier: {
      for (int j = 0; j < d; ++j) {
        int k = j / 2 + 1;
        double w = k * kPi;
        v[j] = (j % 2 == 0) ? w * std::cos(w * s) : -w * std::sin(w * s);
      }
      break;
    }
    case BasisFamily::PWLWavelet: {
      static constexpr double vert[5] = {0.0, 1.0, 0.0, -1.0, 0.0};
      int j = cell_index(s, 4 * d, 0.5 / d);
      v[j / 4] = amp * (vert[j % 4 + 1] - vert[j % 4]) / (b.knots[j + 1] - b.knots[j]);
      break;
    }
  }
  return v;
}

Matrix eval_grid(const BasisSet& b, int M) {
  if (M < 1) throw std::invalid_argument("eval_grid: M must be >= 1");
  Matrix G(b.size, M);
  for (int m = 1; m <= M; ++m) {
    G.col(m - 1) = eval(b, -1.0 + (2.0 * m - 1.0) / M);
  }
  return G;
}

Vector integrals(const BasisSet& b) {
  const int d = b.size;
  const double amp = b.amplitude;
  Vector v = Vector::Zero(d);
  switch (b.family) {
    case BasisFamily::Rect:
      v.setConstant(amp * 2.0 / d);
      break;
    case BasisFamily::PWL: {
      const double h = 2.0 / (d - 1);
      v.setConstant(h);
      v[0] = v[d - 1] = h / 2.0;
      break;
    }
    case BasisFamily::PWQ: {
      // unit-spacing cell masses of the B-spline: 1/6, 2/3, 1/6;
      // boundary bumps lose the cells that fall outside [-1,1]
      const double h = 2.0 / d;
      const double cell_mass[3] = {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0};
      for (int i = 1; i <= d; ++i) {
        double m = 0.0;
        for (int j = 0; j < 3; ++j) {
          int seg = i - 2 + j;
          if (seg >= 0 && seg <= d - 1) m += cell_mass[j];
        }
        v[i - 1] = amp * (4.0 / 3.0) * h * m;
      }
      break;
    }
    case BasisFamily::Fourier:
    case BasisFamily::RectWavelet:
    case BasisFamily::PWLWavelet:
      break;  // zero-integral families, exactly 0 per component
  }
  return v;
}

namespace {

struct Candidate {
  double s;
  bool breakpoint;
};

// closed-form sign-change candidates of the piecewise-linear interpolant
// through (x0,f0)-(x1,f1); identically-zero segments contribute their edges
void linear_candidates(double x0, double f0, double x1, double f1,
                       std::vector<Candidate>& out) {
  if (f0 == 0.0 && f1 == 0.0) {
    out.push_back({x0, false});
    out.push_back({x1, false});
    return;
  }
  if (f0 == 0.0) out.push_back({x0, false});
  if (f1 == 0.0) out.push_back({x1, false});
  if (f0 * f1 < 0.0) {
    out.push_back({x0 + (x1 - x0) * f0 / (f0 - f1), false});
  }
}

// roots of the quadratic through three samples of a parabolic segment
void quadratic_candidates(const BasisSet& b, const Vector& z, double x0, double x1,
                          std::vector<Candidate>& out) {
  const double mid = 0.5 * (x0 + x1);
  const double half = 0.5 * (x1 - x0);
  const double fa = state_value(b, z, x0);
  const double fm = state_value(b, z, mid);
  const double fb = state_value(b, z, x1);
  const double scale = std::max({std::abs(fa), std::abs(fm), std::abs(fb)});
  if (scale == 0.0) {
    out.push_back({x0, false});
    out.push_back({x1, false});
    return;
  }
  // f(mid + t) = a t^2 + c t + f(mid)
  const double a = (fb + fa - 2.0 * fm) / (2.0 * half * half);
  const double c = (fb - fa) / (2.0 * half);
  auto emit = [&](double t) {
    double s = mid + t;
    if (s >= x0 - 1e-14 && s <= x1 + 1e-14) {
      out.push_back({std::clamp(s, x0, x1), false});
    }
  };
  if (std::abs(a) * half * half < 1e-13 * scale) {
    if (std::abs(c) * half >= 1e-13 * scale) {
      linear_candidates(x0, fa, x1, fb, out);
    }
    return;
  }
  const double disc = c * c - 4.0 * a * fm;
  if (disc <= 0.0) return;  // no crossing or tangential touch
  const double sq = std::sqrt(disc);
  const double qq = -0.5 * (c + std::copysign(sq, c));
  emit(qq / a);
  if (qq != 0.0) emit(fm / qq);
}

void fourier_candidates(const BasisSet& b, const Vector& z, std::vector<Candidate>& out) {
  const int n = std::max(256, 32 * b.k_max);
  double prev_s = -1.0;
  double prev_f = state_value(b, z, prev_s);
  for (int j = 1; j <= n; ++j) {
    double s = -1.0 + 2.0 * j / n;
    double f = state_value(b, z, s);
    if (prev_f == 0.0) out.push_back({prev_s, false});
    if (prev_f * f < 0.0) {
      double lo = prev_s, hi = s, flo = prev_f;
      while (hi - lo > 1e-13) {
        double m = 0.5 * (lo + hi);
        double fm = state_value(b, z, m);
        if (fm == 0.0) { lo = hi = m; break; }
        if ((flo < 0.0) == (fm < 0.0)) { lo = m; flo = fm; } else { hi = m; }
      }
      double r = 0.5 * (lo + hi);
      double fp = z.dot(eval_derivative(b, r));
      if (std::abs(fp) > 1e-30) {
        double r2 = r - state_value(b, z, r) / fp;
        if (r2 > prev_s && r2 < s) r = r2;
      }
      out.push_back({r, false});
    }
    prev_s = s;
    prev_f = f;
  }
  if (prev_f == 0.0) out.push_back({prev_s, false});
}

}  // namespace

RootReport sign_change_roots(const BasisSet& b, const Vector& z) {
  if (z.size() != b.size) throw std::invalid_argument("sign_change_roots: z size mismatch");
  std::vector<Candidate> cands;

  switch (b.family) {
    case BasisFamily::Rect:
    case BasisFamily::RectWavelet: {
      for (size_t k = 1; k + 1 < b.knots.size(); ++k) cands.push_back({b.knots[k], true});
      break;
    }
    case BasisFamily::PWL:
    case BasisFamily::PWLWavelet: {
      const auto& kn = b.knots;
      double f0 = state_value(b, z, kn[0]);
      for (size_t k = 0; k + 1 < kn.size(); ++k) {
        double f1 = state_value(b, z, kn[k + 1]);
        linear_candidates(kn[k], f0, kn[k + 1], f1, cands);
        f0 = f1;
      }
      break;
    }
    case BasisFamily::PWQ: {
      const auto& kn = b.knots;
      for (size_t k = 0; k + 1 < kn.size(); ++k) {
        quadratic_candidates(b, z, kn[k], kn[k + 1], cands);
      }
      break;
    }
    case BasisFamily::Fourier:
      fourier_candidates(b, z, cands);
      break;
  }

  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& c) {
    return a.s < c.s;
  });
  std::vector<Candidate> uniq;
  for (const auto& c : cands) {
    if (c.s <= -1.0 + 1e-14 || c.s >= 1.0 - 1e-14) continue;
    if (!uniq.empty() && c.s - uniq.back().s < 1e-12) {
      uniq.back().breakpoint = uniq.back().breakpoint || c.breakpoint;
      continue;
    }
    uniq.push_back(c);
  }

  // signs on the finest partition, then merge away non-separating candidates;
  // sample more than one spot per interval because the midpoint can land
  // exactly on a tangential structural zero of the wavelet families
  auto interval_sign = [&](double lo, double hi) {
    static constexpr double frac[3] = {0.5, 0.38196601125010515, 0.61803398874989485};
    for (double fr : frac) {
      int sg = sign_of(state_value(b, z, lo + (hi - lo) * fr));
      if (sg != 0) return sg;
    }
    return 0;
  };
  std::vector<double> pts;
  pts.push_back(-1.0);
  for (const auto& c : uniq) pts.push_back(c.s);
  pts.push_back(1.0);
  std::vector<int> fine(pts.size() - 1);
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    fine[i] = interval_sign(pts[i], pts[i + 1]);
  }

  RootReport rep;
  rep.signs.push_back(fine[0]);
  for (size_t i = 0; i < uniq.size(); ++i) {
    if (fine[i + 1] != rep.signs.back()) {
      rep.roots.push_back(uniq[i].s);
      if (uniq[i].breakpoint) rep.breakpoints.push_back(uniq[i].s);
      rep.signs.push_back(fine[i + 1]);
    }
  }
  return rep;
}

Matrix pair_integral(const BasisSet& p, const BasisSet& q, double a, double b) {
  if (a > b) throw std::invalid_argument("pair_integral: a > b");
  check_domain(a);
  check_domain(b);
  Matrix acc = Matrix::Zero(q.size, p.size);
  if (a == b) return acc;

  std::vector<double> cuts;
  cuts.push_back(a);
  for (const auto& bs : {std::cref(p), std::cref(q)}) {
    for (double k : bs.get().knots) {
      if (k > a && k < b) cuts.push_back(k);
    }
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double x, double y) { return std::abs(x - y) < 1e-15; }),
             cuts.end());

  double cap = 0.25;
  if (p.family == BasisFamily::Fourier) cap = std::min(cap, 1.0 / (2.0 * p.k_max));
  if (q.family == BasisFamily::Fourier) cap = std::min(cap, 1.0 / (2.0 * q.k_max));

  for (size_t c = 0; c + 1 < cuts.size(); ++c) {
    double x0 = cuts[c], x1 = cuts[c + 1];
    int nseg = std::max(1, static_cast<int>(std::ceil((x1 - x0) / cap)));
    for (int s = 0; s < nseg; ++s) {
      double lo = x0 + (x1 - x0) * s / nseg;
      double hi = x0 + (x1 - x0) * (s + 1) / nseg;
      double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
      for (int g = 0; g < 8; ++g) {
        double x = mid + half * kGlNode[g];
        acc.noalias() += (half * kGlWeight[g]) * eval(q, x) * eval(p, x).transpose();
      }
    }
  }
  return acc;
}

}  // namespace iatnet
