#include "hedonic/tensor_calc.hpp"

#include "hedonic/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace hedonic {

// ---------------------------------------------------------------------------
// Box

Box Box::cube(int dim, double lo, double hi) {
  return Box(std::vector<Interval>(static_cast<size_t>(dim), Interval{lo, hi}));
}

bool Box::contains(const Vector& x, double margin) const {
  if (x.size() != dimension()) return false;
  for (int i = 0; i < dimension(); ++i) {
    if (!(x(i) >= sides_[i].lo + margin && x(i) <= sides_[i].hi - margin)) return false;
  }
  return true;
}

Vector Box::center() const {
  Vector c(dimension());
  for (int i = 0; i < dimension(); ++i) c(i) = 0.5 * (sides_[i].lo + sides_[i].hi);
  return c;
}

Vector Box::lower() const {
  Vector c(dimension());
  for (int i = 0; i < dimension(); ++i) c(i) = sides_[i].lo;
  return c;
}

Vector Box::upper() const {
  Vector c(dimension());
  for (int i = 0; i < dimension(); ++i) c(i) = sides_[i].hi;
  return c;
}

Box Box::times(const Box& other) const {
  std::vector<Interval> s = sides_;
  s.insert(s.end(), other.sides_.begin(), other.sides_.end());
  return Box(std::move(s));
}

// ---------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField(Box domain, Value value)
    : domain_(std::move(domain)), value_(std::move(value)) {}

ScalarField& ScalarField::with_gradient(Gradient g) {
  gradient_ = std::move(g);
  return *this;
}

ScalarField& ScalarField::with_hessian(Hessian h) {
  hessian_ = std::move(h);
  return *this;
}

ScalarField& ScalarField::with_partials(Partial p, int max_order) {
  partial_ = std::move(p);
  partial_order_ = std::clamp(max_order, 0, 4);
  return *this;
}

bool ScalarField::has_partials(int order) const {
  if (order == 1 && gradient_) return true;
  if (order == 2 && hessian_) return true;
  return partial_order_ >= order;
}

double ScalarField::analytic_partial(const Vector& x, std::span<const int> index) const {
  const int order = static_cast<int>(index.size());
  if (order == 1 && gradient_ && partial_order_ < 1) return gradient_(x)(index[0]);
  if (order == 2 && hessian_ && partial_order_ < 2) return hessian_(x)(index[0], index[1]);
  if (partial_order_ < order) {
    throw Error(ErrorCode::kAnalyticUnavailable,
                "no analytic partial of order " + std::to_string(order));
  }
  return partial_(x, index);
}

Vector ScalarField::analytic_gradient(const Vector& x) const {
  if (gradient_) return gradient_(x);
  Vector g(dimension());
  for (int i = 0; i < dimension(); ++i) {
    const std::array<int, 1> idx{i};
    g(i) = analytic_partial(x, idx);
  }
  return g;
}

Matrix ScalarField::analytic_hessian(const Vector& x) const {
  if (hessian_) return hessian_(x);
  const int n = dimension();
  Matrix h(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const std::array<int, 2> idx{i, j};
      h(i, j) = h(j, i) = analytic_partial(x, idx);
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Finite differences

namespace {

struct Stencil1D {
  std::vector<std::pair<int, double>> taps;  // (offset in steps, weight)
  int reach = 0;
};

// Central stencils for derivative multiplicity 1..4, truncation O(h^2).
const Stencil1D& central_stencil(int multiplicity) {
  static const std::array<Stencil1D, 4> kStencils = {{
      {{{-1, -0.5}, {1, 0.5}}, 1},
      {{{-1, 1.0}, {0, -2.0}, {1, 1.0}}, 1},
      {{{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}}, 2},
      {{{-2, 1.0}, {-1, -4.0}, {0, 6.0}, {1, -4.0}, {2, 1.0}}, 2},
  }};
  return kStencils[static_cast<size_t>(multiplicity - 1)];
}

struct Axis {
  int coord;
  int multiplicity;
};

std::vector<Axis> group_axes(std::span<const int> index) {
  std::vector<int> sorted(index.begin(), index.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<Axis> axes;
  for (int c : sorted) {
    if (!axes.empty() && axes.back().coord == c) {
      ++axes.back().multiplicity;
    } else {
      axes.push_back({c, 1});
    }
  }
  return axes;
}

double checked_eval(const ScalarField& f, const Vector& x) {
  const double v = f(x);
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "field evaluated to " << v << " at [" << x.transpose() << "]";
    throw Error(ErrorCode::kNonFinite, os.str());
  }
  return v;
}

double central_difference(const ScalarField& f, const Vector& x, const std::vector<Axis>& axes,
                          double step) {
  const int order = [&] {
    int o = 0;
    for (const auto& a : axes) o += a.multiplicity;
    return o;
  }();
  // Odometer over the tensor product of the per-axis stencils.
  std::vector<size_t> pos(axes.size(), 0);
  double acc = 0.0;
  Vector probe = x;
  while (true) {
    double weight = 1.0;
    probe = x;
    for (size_t a = 0; a < axes.size(); ++a) {
      const auto& tap = central_stencil(axes[a].multiplicity).taps[pos[a]];
      weight *= tap.second;
      probe(axes[a].coord) += tap.first * step;
    }
    if (weight != 0.0) acc += weight * checked_eval(f, probe);
    size_t a = 0;
    for (; a < axes.size(); ++a) {
      if (++pos[a] < central_stencil(axes[a].multiplicity).taps.size()) break;
      pos[a] = 0;
    }
    if (a == axes.size()) break;
  }
  return acc / std::pow(step, order);
}

void require_interior(const ScalarField& f, const Vector& x, const std::vector<Axis>& axes,
                      double reach_factor, double step) {
  for (const auto& a : axes) {
    const double reach = reach_factor * central_stencil(a.multiplicity).reach * step;
    const auto& side = f.domain()[a.coord];
    if (x(a.coord) - reach < side.lo || x(a.coord) + reach > side.hi) {
      std::ostringstream os;
      os << "coordinate " << a.coord << " = " << x(a.coord) << " needs reach " << reach
         << " inside [" << side.lo << ", " << side.hi << "]";
      throw Error(ErrorCode::kNearBoundary, os.str());
    }
  }
}

double richardson_step(int order, const Vector& x) {
  const double eps = std::numeric_limits<double>::epsilon();
  return std::pow(eps, 1.0 / (order + 4)) * std::max(1.0, x.lpNorm<Eigen::Infinity>());
}

}  // namespace

double default_step(int order, const Vector& x) {
  const double eps = std::numeric_limits<double>::epsilon();
  return std::pow(eps, 1.0 / (order + 2)) * std::max(1.0, x.lpNorm<Eigen::Infinity>());
}

double differentiate(const ScalarField& f, const Vector& x, const DerivativeRequest& req) {
  const int order = static_cast<int>(req.index.size());
  if (order > 4) throw Error(ErrorCode::kOrderTooHigh, "order " + std::to_string(order));
  if (x.size() != f.dimension()) {
    throw Error(ErrorCode::kInvalidArgument, "point dimension does not match field");
  }
  for (int c : req.index) {
    if (c < 0 || c >= f.dimension()) {
      throw Error(ErrorCode::kInvalidArgument, "coordinate index out of range");
    }
  }
  if (order == 0) return checked_eval(f, x);

  if (req.scheme == DiffScheme::kAnalytic) {
    const double v = f.analytic_partial(x, req.index);
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "analytic partial");
    return v;
  }

  const auto axes = group_axes(req.index);
  if (req.scheme == DiffScheme::kCentral) {
    const double h = req.step > 0.0 ? req.step : default_step(order, x);
    require_interior(f, x, axes, 1.0, h);
    return central_difference(f, x, axes, h);
  }
  const double h = req.step > 0.0 ? req.step : richardson_step(order, x);
  require_interior(f, x, axes, 2.0, h);
  const double fine = central_difference(f, x, axes, h);
  const double coarse = central_difference(f, x, axes, 2.0 * h);
  return (4.0 * fine - coarse) / 3.0;
}

Vector gradient(const ScalarField& f, const Vector& x) {
  if (f.has_gradient()) return f.analytic_gradient(x);
  const int n = f.dimension();
  Vector g(n);
  DerivativeRequest req{{0}, DiffScheme::kCentral, default_step(1, x)};
  for (int i = 0; i < n; ++i) {
    req.index[0] = i;
    g(i) = differentiate(f, x, req);
  }
  return g;
}

Matrix hessian(const ScalarField& f, const Vector& x) {
  if (f.has_hessian()) return symmetrized(f.analytic_hessian(x));
  const int n = f.dimension();
  Matrix h(n, n);
  DerivativeRequest req{{0, 0}, DiffScheme::kCentral, default_step(2, x)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      req.index = {i, j};
      h(i, j) = differentiate(f, x, req);
    }
  }
  return symmetrized(h);
}

namespace {

std::vector<double> symmetric_tensor(const ScalarField& f, const Vector& x, int order) {
  const int n = f.dimension();
  size_t total = 1;
  for (int k = 0; k < order; ++k) total *= static_cast<size_t>(n);
  std::vector<double> out(total, 0.0);

  DerivativeRequest req;
  req.scheme = f.has_partials(order) ? DiffScheme::kAnalytic : DiffScheme::kRichardson;
  std::vector<int> idx(static_cast<size_t>(order), 0);
  for (size_t flat = 0; flat < total; ++flat) {
    size_t rem = flat;
    for (int k = order - 1; k >= 0; --k) {
      idx[static_cast<size_t>(k)] = static_cast<int>(rem % static_cast<size_t>(n));
      rem /= static_cast<size_t>(n);
    }
    if (!std::is_sorted(idx.begin(), idx.end())) continue;
    req.index = idx;
    const double value = differentiate(f, x, req);
    // Scatter to every permutation.
    std::vector<int> perm = idx;
    do {
      size_t pos = 0;
      for (int c : perm) pos = pos * static_cast<size_t>(n) + static_cast<size_t>(c);
      out[pos] = value;
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return out;
}

}  // namespace

std::vector<double> third_tensor(const ScalarField& f, const Vector& x) {
  return symmetric_tensor(f, x, 3);
}

std::vector<double> fourth_tensor(const ScalarField& f, const Vector& x) {
  return symmetric_tensor(f, x, 4);
}

// ---------------------------------------------------------------------------
// Legendre conjugate

ConjugateResult legendre_conjugate(const ScalarField& f, const Vector& p, const Point& z0,
                                   const NewtonOptions& opts) {
  if (p.size() != f.dimension() || z0.size() != f.dimension()) {
    throw Error(ErrorCode::kInvalidArgument, "legendre_conjugate: dimension mismatch");
  }
  Point z = z0;
  Vector r = gradient(f, z) - p;
  double rnorm = r.norm();
  const double floor = 1e-15 * std::max(1.0, p.norm());
  int it = 0;
  int polish = 0;
  for (; it < opts.max_iterations; ++it) {
    if (rnorm <= floor) break;
    if (rnorm <= opts.tolerance && polish >= 3) break;
    const Matrix hess = hessian(f, z);
    Eigen::LDLT<Matrix> ldlt(hess);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array().abs() > 1e-14).all()) {
      throw Error(ErrorCode::kSingularMatrix, "Hessian singular during conjugation");
    }
    const Vector step = ldlt.solve(-r);
    double alpha = 1.0;
    bool improved = false;
    Point trial;
    Vector trial_r;
    for (int k = 0; k <= opts.max_halvings; ++k, alpha *= 0.5) {
      trial = z + alpha * step;
      if (!f.domain().contains(trial)) continue;
      trial_r = gradient(f, trial) - p;
      if (trial_r.norm() < rnorm) {
        improved = true;
        break;
      }
    }
    if (!improved) break;
    if (rnorm <= opts.tolerance) ++polish;
    z = trial;
    r = trial_r;
    rnorm = r.norm();
  }
  if (!(rnorm <= opts.tolerance)) {
    std::ostringstream os;
    os << "residual " << rnorm << " after " << it << " iterations";
    throw Error(ErrorCode::kNoConvergence, os.str());
  }
  return {p.dot(z) - f(z), z, rnorm, it};
}

}  // namespace hedonic
