#pragma once

#include "hedonic/linalg.hpp"

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace hedonic {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Axis-aligned closed box; one interval per coordinate.
class Box {
 public:
  Box() = default;
  explicit Box(std::vector<Interval> sides) : sides_(std::move(sides)) {}

  static Box cube(int dim, double lo, double hi);

  int dimension() const { return static_cast<int>(sides_.size()); }
  const Interval& operator[](int i) const { return sides_[static_cast<size_t>(i)]; }
  const std::vector<Interval>& sides() const { return sides_; }

  /// True when every coordinate sits at least `margin[i]` inside the box.
  bool contains(const Vector& x, double margin = 0.0) const;
  Vector center() const;
  Vector lower() const;
  Vector upper() const;

  /// Cartesian product [this] x [other].
  Box times(const Box& other) const;

 private:
  std::vector<Interval> sides_;
};

/// A smooth real-valued function on a box with optional analytic derivatives.
///
/// The evaluator is mandatory. Analytic callbacks are optional; when a callback
/// is missing, derivative queries fall back to finite differences of the
/// evaluator.
class ScalarField {
 public:
  using Value = std::function<double(const Vector&)>;
  using Gradient = std::function<Vector(const Vector&)>;
  using Hessian = std::function<Matrix(const Vector&)>;
  /// Mixed partial for a multi-index of coordinate positions (order <= 4).
  using Partial = std::function<double(const Vector&, std::span<const int>)>;

  ScalarField() = default;
  ScalarField(Box domain, Value value);

  ScalarField& with_gradient(Gradient g);
  ScalarField& with_hessian(Hessian h);
  ScalarField& with_partials(Partial p, int max_order);

  int dimension() const { return domain_.dimension(); }
  const Box& domain() const { return domain_; }

  double operator()(const Vector& x) const { return value_(x); }

  bool has_gradient() const { return static_cast<bool>(gradient_) || partial_order_ >= 1; }
  bool has_hessian() const { return static_cast<bool>(hessian_) || partial_order_ >= 2; }
  bool has_partials(int order) const;

  /// Analytic mixed partial; requires `has_partials(order)` (or the gradient /
  /// Hessian callbacks for orders 1 and 2).
  double analytic_partial(const Vector& x, std::span<const int> index) const;
  Vector analytic_gradient(const Vector& x) const;
  Matrix analytic_hessian(const Vector& x) const;

 private:
  Box domain_;
  Value value_;
  Gradient gradient_;
  Hessian hessian_;
  Partial partial_;
  int partial_order_ = 0;
};

enum class DiffScheme { kAnalytic, kCentral, kRichardson };

struct DerivativeRequest {
  std::vector<int> index;  // coordinate positions; order = size, at most 4
  DiffScheme scheme = DiffScheme::kCentral;
  double step = 0.0;  // <= 0 selects default_step(order, x)
};

/// Balanced step for an order-k central stencil: eps^(1/(k+2)) * max(1, |x|_inf).
double default_step(int order, const Vector& x);

double differentiate(const ScalarField& f, const Vector& x, const DerivativeRequest& req);

/// Analytic when available, central differences otherwise.
Vector gradient(const ScalarField& f, const Vector& x);
/// Analytic when available, central differences otherwise; always symmetrized.
Matrix hessian(const ScalarField& f, const Vector& x);

/// Order-3 and order-4 derivative tensors, flattened row-major (n^3 and n^4 entries).
/// Only sorted multi-indices are evaluated; the rest are filled by symmetry.
std::vector<double> third_tensor(const ScalarField& f, const Vector& x);
std::vector<double> fourth_tensor(const ScalarField& f, const Vector& x);

struct ConjugateResult {
  double value = 0.0;   // sup_z [p.z - f(z)]
  Point argmax;         // grad f(argmax) = p
  double residual = 0.0;
  int iterations = 0;
};

struct NewtonOptions {
  int max_iterations = 100;
  int max_halvings = 30;
  double tolerance = 1e-10;
};

/// Legendre-Fenchel conjugate of a strictly convex field at covector p, via
/// damped Newton on grad f(z) = p starting from z0.
ConjugateResult legendre_conjugate(const ScalarField& f, const Vector& p, const Point& z0,
                                   const NewtonOptions& opts = {});

}  // namespace hedonic
