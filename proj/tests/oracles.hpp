#pragma once

// Reference computations that share no code with the library: plain central
// differences, dense grid searches, closed forms and exhaustive enumeration.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Fn = std::function<double(const Vec&)>;
using Map = std::function<Vec(const Vec&)>;

inline Vec unit(int n, int i) {
  Vec e = Vec::Zero(n);
  e(i) = 1.0;
  return e;
}

inline Vec gradient(const Fn& f, const Vec& x, double h = 1e-5) {
  Vec g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    const Vec e = unit(static_cast<int>(x.size()), i) * h;
    g(i) = (f(x + e) - f(x - e)) / (2 * h);
  }
  return g;
}

/// Jacobian of a vector map, rows = outputs.
inline Mat jacobian(const Map& f, const Vec& x, double h = 1e-5) {
  const Vec f0 = f(x);
  Mat J(f0.size(), x.size());
  for (int j = 0; j < x.size(); ++j) {
    const Vec e = unit(static_cast<int>(x.size()), j) * h;
    J.col(j) = (f(x + e) - f(x - e)) / (2 * h);
  }
  return J;
}

/// d^2/ds dt f(a + s e_i, c + t e_j) for a function of two blocks.
inline Mat mixed(const std::function<double(const Vec&, const Vec&)>& f, const Vec& a,
                 const Vec& c, double h = 1e-3) {
  Mat out(a.size(), c.size());
  for (int i = 0; i < a.size(); ++i) {
    for (int j = 0; j < c.size(); ++j) {
      const Vec ei = unit(static_cast<int>(a.size()), i) * h;
      const Vec ej = unit(static_cast<int>(c.size()), j) * h;
      out(i, j) = (f(a + ei, c + ej) - f(a + ei, c - ej) - f(a - ei, c + ej) +
                   f(a - ei, c - ej)) /
                  (4 * h * h);
    }
  }
  return out;
}

inline double rel_err(const Mat& a, const Mat& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

/// Real root of z + eps z^3 = s.
inline double cubic_root(double s, double eps = 1.0) {
  if (eps == 0.0) return s;
  const double p = 1.0 / eps;
  const double q = -s / eps;
  const double d = std::sqrt(q * q / 4 + p * p * p / 27);
  return std::cbrt(-q / 2 + d) + std::cbrt(-q / 2 - d);
}

/// H for H*(z) = z^2/2 + eps z^4/4 in one variable.
inline double quartic_H(double s, double eps = 1.0) {
  const double z = cubic_root(s, eps);
  return s * z - (z * z / 2 + eps * z * z * z * z / 4);
}

/// One-dimensional curvature of b = H(x+y) for the quartic family:
/// (H'')^4 u^2 v^2 (-6 eps + 72 eps^2 z^2 H'').
inline double quartic_mtw_1d(double x, double y, double u, double v, double eps = 1.0) {
  const double z = cubic_root(x + y, eps);
  const double Hpp = 1.0 / (1 + 3 * eps * z * z);
  return std::pow(Hpp, 4) * u * u * v * v * (-6 * eps + 72 * eps * eps * z * z * Hpp);
}

/// Sign factor of the quartic curvature at x+y = s.
inline double quartic_sign_factor(double s) {
  const double z = cubic_root(s);
  return -6 + 72 * z * z / (1 + 3 * z * z);
}

/// Maximum of f on [lo, hi] by a dense grid and golden-section refinement.
inline std::pair<double, double> grid_max_1d(const std::function<double(double)>& f, double lo,
                                             double hi, int points = 2001) {
  double best = -std::numeric_limits<double>::infinity();
  double arg = lo;
  for (int k = 0; k < points; ++k) {
    const double z = lo + (hi - lo) * k / (points - 1);
    const double v = f(z);
    if (v > best) {
      best = v;
      arg = z;
    }
  }
  const double cell = (hi - lo) / (points - 1);
  double a = std::max(lo, arg - cell), b = std::min(hi, arg + cell);
  const double r = (std::sqrt(5.0) - 1) / 2;
  for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
    const double c = b - r * (b - a), d = a + r * (b - a);
    if (f(c) > f(d)) b = d;
    else a = c;
  }
  const double z = (a + b) / 2;
  return {z, f(z)};
}

/// Exhaustive maximum-weight assignment.
inline double brute_force_assignment(const Mat& w) {
  std::vector<int> perm(static_cast<size_t>(w.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = -std::numeric_limits<double>::infinity();
  do {
    double s = 0;
    for (size_t i = 0; i < perm.size(); ++i) s += w(static_cast<Eigen::Index>(i), perm[i]);
    best = std::max(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline Vec random_unit(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng);
  return v.normalized();
}

inline Vec random_in(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

}  // namespace oracle
