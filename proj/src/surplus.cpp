#include "hedonic/surplus.hpp"

#include "hedonic/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>

namespace hedonic {

void PreferencePair::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidArgument, what); };
  if (n < 1) fail("dimension must be positive");
  if (x_box.dimension() != n || y_box.dimension() != n || z_box.dimension() != n) {
    fail("box dimensions must equal n");
  }
  if (h.dimension() != 2 * n) fail("h must take 2n arguments [x; z]");
  if (g.dimension() != 2 * n) fail("g must take 2n arguments [y; z]");
}

JointDerivatives joint_derivatives(const ScalarField& f, const Vector& a, const Vector& z) {
  const auto n = a.size();
  const Vector p = concat(a, z);
  const Vector grad = gradient(f, p);
  const Matrix hess = hessian(f, p);
  return {grad.head(n), grad.tail(n), hess.topLeftCorner(n, n), hess.topRightCorner(n, n),
          hess.bottomRightCorner(n, n)};
}

std::vector<Point> lattice_starts(const Box& box) {
  const int n = box.dimension();
  std::vector<Point> out;
  int total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  for (int k = 0; k < total; ++k) {
    Point p(n);
    int rem = k;
    for (int i = 0; i < n; ++i) {
      const int cell = rem % 3;
      rem /= 3;
      const double w = box[i].hi - box[i].lo;
      p(i) = box[i].lo + w * (2 * cell + 1) / 6.0;
    }
    out.push_back(std::move(p));
  }
  // Centre first so that warm paths prefer it.
  std::stable_partition(out.begin(), out.end(),
                        [&](const Point& p) { return (p - box.center()).norm() < 1e-12; });
  return out;
}

namespace {

struct Ascent {
  Point z;
  double value = -std::numeric_limits<double>::infinity();
  double grad_norm = std::numeric_limits<double>::infinity();
  Matrix M;
  bool at_boundary = false;
};

Point clamp_to(const Box& box, const Point& z) {
  Point out = z;
  for (int i = 0; i < box.dimension(); ++i) out(i) = std::clamp(z(i), box[i].lo, box[i].hi);
  return out;
}

bool near_boundary(const Box& box, const Point& z, double margin) {
  for (int i = 0; i < box.dimension(); ++i) {
    if (z(i) <= box[i].lo + margin || z(i) >= box[i].hi - margin) return true;
  }
  return false;
}

// Damped, eigenvalue-modified Newton ascent on z -> h(x,z) + g(y,z), kept
// inside the z-box by projection.
Ascent ascend(const PreferencePair& pp, const Point& x, const Point& y, Point z) {
  const auto objective = [&](const Point& zz) {
    return pp.h(concat(x, zz)) + pp.g(concat(y, zz));
  };
  const auto derivs = [&](const Point& zz, Vector& grad, Matrix& hess) {
    const JointDerivatives dh = joint_derivatives(pp.h, x, zz);
    const JointDerivatives dg = joint_derivatives(pp.g, y, zz);
    grad = dh.grad_z + dg.grad_z;
    hess = dh.zz + dg.zz;
  };

  z = clamp_to(pp.z_box, z);
  double value = objective(z);
  Vector grad;
  Matrix hess;
  derivs(z, grad, hess);
  const double floor = 1e-15 * std::max(1.0, z.norm());

  for (int it = 0; it < 200; ++it) {
    const double gn = grad.norm();
    if (!std::isfinite(gn) || gn <= floor) break;

    Eigen::SelfAdjointEigenSolver<Matrix> es(hess);
    const Vector& lam = es.eigenvalues();
    const Matrix& vecs = es.eigenvectors();
    Vector coeff = vecs.transpose() * grad;
    for (Eigen::Index i = 0; i < lam.size(); ++i) coeff(i) /= std::max(std::abs(lam(i)), 1e-10);
    const Vector dir = vecs * coeff;
    const bool concave = lam.maxCoeff() < 0.0;

    if (concave && gn <= 1e-6) {
      // Close to the maximizer the objective no longer resolves progress;
      // take plain Newton steps while the gradient keeps shrinking.
      const Point trial = z + dir;
      if (!pp.z_box.contains(trial)) break;
      Vector tg;
      Matrix th;
      derivs(trial, tg, th);
      if (!(tg.norm() < gn)) break;
      z = trial;
      grad = tg;
      hess = th;
      value = objective(z);
      continue;
    }

    double alpha = 1.0;
    bool accepted = false;
    for (int k = 0; k <= 30; ++k, alpha *= 0.5) {
      const Point trial = clamp_to(pp.z_box, z + alpha * dir);
      const double tv = objective(trial);
      const double gain = grad.dot(trial - z);
      if (std::isfinite(tv) && tv > value && tv - value >= 1e-4 * gain) {
        z = trial;
        value = tv;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    derivs(z, grad, hess);
  }

  Ascent out;
  out.z = z;
  out.value = value;
  out.grad_norm = grad.norm();
  out.M = symmetrized(hess);
  out.at_boundary = near_boundary(pp.z_box, z, pp.tol.boundary_margin);
  return out;
}

}  // namespace

InnerMaximum inner_maximize(const PreferencePair& pp, const Point& x, const Point& y,
                            const std::vector<Point>& starts) {
  if (starts.empty()) throw Error(ErrorCode::kInvalidArgument, "inner_maximize needs a start");
  if (!pp.x_box.contains(x) || !pp.y_box.contains(y)) {
    std::ostringstream os;
    os << "pair (" << x.transpose() << "), (" << y.transpose() << ") outside the domain";
    throw Error(ErrorCode::kOutOfDomain, os.str());
  }

  std::vector<Ascent> accepted;
  const Ascent* best_boundary = nullptr;
  std::vector<Ascent> boundary;
  bool saw_stationary_indefinite = false;
  double worst_lambda = 0.0;
  for (const Point& s : starts) {
    Ascent a = ascend(pp, x, y, s);
    if (a.at_boundary) {
      boundary.push_back(std::move(a));
      continue;
    }
    if (!(a.grad_norm <= pp.tol.stationarity)) continue;
    const double lam_max = max_eigenvalue(a.M);
    if (lam_max < -pp.tol.negative_definite) {
      accepted.push_back(std::move(a));
    } else {
      saw_stationary_indefinite = true;
      worst_lambda = lam_max;
    }
  }
  for (const auto& b : boundary) {
    if (!best_boundary || b.value > best_boundary->value) best_boundary = &b;
  }

  if (accepted.empty()) {
    std::ostringstream os;
    os << "at x=(" << x.transpose() << "), y=(" << y.transpose() << ")";
    if (best_boundary) throw Error(ErrorCode::kBoundaryMaximizer, os.str());
    if (saw_stationary_indefinite) {
      os << ", max eig(M) = " << worst_lambda;
      throw Error(std::abs(worst_lambda) <= pp.tol.negative_definite
                      ? ErrorCode::kSingularMatrix
                      : ErrorCode::kNotNegativeDefinite,
                  os.str());
    }
    throw Error(ErrorCode::kNoConvergence, "no start converged " + os.str());
  }

  const auto best_it = std::max_element(
      accepted.begin(), accepted.end(),
      [](const Ascent& a, const Ascent& b) { return a.value < b.value; });
  const Ascent& best = *best_it;
  if (best_boundary && best_boundary->value > best.value + pp.tol.tie_value) {
    std::ostringstream os;
    os << "boundary point (" << best_boundary->z.transpose() << ") beats interior maximizer";
    throw Error(ErrorCode::kBoundaryMaximizer, os.str());
  }

  InnerMaximum out;
  out.z_star = best.z;
  out.M = best.M;
  out.value = best.value;
  out.stationarity = best.grad_norm;
  out.converged_starts = static_cast<int>(accepted.size());
  for (const Ascent& a : accepted) {
    if (std::abs(a.value - best.value) <= pp.tol.tie_value &&
        (a.z - best.z).norm() > pp.tol.tie_distance) {
      out.non_unique = true;
    }
  }
  return out;
}

InnerMaximum inner_maximize(const PreferencePair& pp, const Point& x, const Point& y) {
  return inner_maximize(pp, x, y, lattice_starts(pp.z_box));
}

namespace {

InnerMaximum warm_or_lattice(const PreferencePair& pp, const Point& x, const Point& y,
                             const Point& warm) {
  try {
    return inner_maximize(pp, x, y, {warm});
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kOutOfDomain) throw;
    std::vector<Point> starts = lattice_starts(pp.z_box);
    starts.insert(starts.begin(), warm);
    return inner_maximize(pp, x, y, starts);
  }
}

SurplusEvaluation assemble(const PreferencePair& pp, const Point& x, const Point& y,
                           const InnerMaximum& inner) {
  if (inner.non_unique) {
    std::ostringstream os;
    os << "tied maximizers at x=(" << x.transpose() << "), y=(" << y.transpose() << ")";
    throw Error(ErrorCode::kNonUniqueMaximizer, os.str());
  }
  const JointDerivatives dh = joint_derivatives(pp.h, x, inner.z_star);
  const JointDerivatives dg = joint_derivatives(pp.g, y, inner.z_star);

  SurplusEvaluation ev;
  ev.x = x;
  ev.y = y;
  ev.z_star = inner.z_star;
  ev.b_value = inner.value;
  ev.M = symmetrized(dh.zz + dg.zz);
  ev.stationarity = (dh.grad_z + dg.grad_z).norm();
  ev.b_x = dh.grad_a;
  ev.b_y = dg.grad_a;
  ev.h_xx = dh.aa;
  ev.h_xz = dh.az;
  ev.g_yz = dg.az;

  Eigen::PartialPivLU<Matrix> lu(ev.M);
  if (!(std::abs(lu.determinant()) > 0.0) || !std::isfinite(lu.determinant())) {
    throw Error(ErrorCode::kSingularMatrix, "M is singular");
  }
  ev.z_x = -lu.solve(Matrix(dh.az.transpose()));
  ev.z_y = -lu.solve(Matrix(dg.az.transpose()));
  ev.b_xy = dh.az * ev.z_y;
  ev.b_xx = symmetrized(dh.aa + dh.az * ev.z_x);
  return ev;
}

}  // namespace

double surplus_value(const PreferencePair& pp, const Point& x, const Point& y, Point& warm) {
  const InnerMaximum inner = warm_or_lattice(pp, x, y, warm);
  warm = inner.z_star;
  return inner.value;
}

SurplusEvaluation evaluate_surplus(const PreferencePair& pp, const Point& x, const Point& y) {
  return assemble(pp, x, y, inner_maximize(pp, x, y));
}

SurplusEvaluation evaluate_surplus(const PreferencePair& pp, const Point& x, const Point& y,
                                   const Point& z_guess) {
  return assemble(pp, x, y, warm_or_lattice(pp, x, y, z_guess));
}

// ---------------------------------------------------------------------------
// Structure screening

std::vector<Point> grid_points(const Box& box, int per_axis) {
  const int n = box.dimension();
  per_axis = std::max(per_axis, 1);
  size_t total = 1;
  for (int i = 0; i < n; ++i) total *= static_cast<size_t>(per_axis);
  std::vector<Point> out;
  out.reserve(total);
  for (size_t k = 0; k < total; ++k) {
    Point p(n);
    size_t rem = k;
    for (int i = 0; i < n; ++i) {
      const auto cell = static_cast<int>(rem % static_cast<size_t>(per_axis));
      rem /= static_cast<size_t>(per_axis);
      p(i) = per_axis == 1 ? 0.5 * (box[i].lo + box[i].hi)
                           : box[i].lo + (box[i].hi - box[i].lo) * cell / (per_axis - 1);
    }
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

Witness point_witness(std::vector<std::pair<std::string, Vector>> vectors, double value,
                      std::string note) {
  Witness w;
  w.vectors = std::move(vectors);
  w.value = value;
  w.note = std::move(note);
  return w;
}

// Evidence that f is C^4: pure derivatives of order 1..4 along every
// coordinate and the mixed (c,c,d,d) partials must be finite and stable under
// halving the Richardson step.
ConditionReport smoothness_report(const ScalarField& f, const std::string& subject,
                                  const std::vector<Point>& first,
                                  const std::vector<Point>& second) {
  ConditionReport rep;
  rep.condition = Condition::kA0;
  rep.subject = subject;
  const int dim = f.dimension();
  std::vector<std::vector<int>> indices;
  for (int c = 0; c < dim; ++c) {
    for (int k = 1; k <= 4; ++k) indices.emplace_back(static_cast<size_t>(k), c);
    for (int d = c + 1; d < dim; ++d) indices.push_back({c, c, d, d});
  }
  bool non_finite = false;
  double worst = 0.0;
  for (const Point& a : first) {
    for (const Point& z : second) {
      const Vector p = concat(a, z);
      ++rep.probes_total;
      try {
        const double scale = std::max(1.0, std::abs(f(p)));
        for (const auto& idx : indices) {
          const int order = static_cast<int>(idx.size());
          const double h = std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (order + 4)) *
                           std::max(1.0, p.lpNorm<Eigen::Infinity>());
          const double coarse = differentiate(f, p, {idx, DiffScheme::kRichardson, h});
          const double fine = differentiate(f, p, {idx, DiffScheme::kRichardson, 0.5 * h});
          const double drift = std::abs(coarse - fine) / std::max({scale, std::abs(coarse), 1.0});
          if (drift > worst) {
            worst = drift;
            if (drift > 1e-3 && rep.witnesses.size() < 8) {
              rep.witnesses.push_back(point_witness({{"point", p}}, drift, "unstable derivative"));
            }
          }
        }
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kNonFinite) {
          non_finite = true;
          rep.witnesses.push_back(point_witness({{"point", p}}, NAN, e.what()));
        } else {
          ++rep.probes_rejected;
        }
      }
    }
  }
  rep.worst_value = worst;
  if (non_finite) {
    rep.verdict = Verdict::kFail;
  } else if (worst > 1e-3 || rep.probes_rejected == rep.probes_total) {
    rep.verdict = Verdict::kInconclusive;
  } else {
    rep.verdict = Verdict::kPass;
  }
  return rep;
}

ConditionReport nondegeneracy_report(
    const std::string& subject, const std::vector<Point>& first, const std::vector<Point>& second,
    const std::function<Matrix(size_t, size_t)>& mixed, double det_tol,
    const std::string& first_name, const std::string& second_name) {
  ConditionReport rep;
  rep.condition = Condition::kA2;
  rep.subject = subject;
  double worst = std::numeric_limits<double>::infinity();
  Witness worst_w;
  for (size_t i = 0; i < first.size(); ++i) {
    for (size_t j = 0; j < second.size(); ++j) {
      ++rep.probes_total;
      try {
        const double d = std::abs(mixed(i, j).determinant());
        if (d < worst) {
          worst = d;
          worst_w = point_witness({{first_name, first[i]}, {second_name, second[j]}}, d,
                                  "min |det|");
        }
      } catch (const Error&) {
        ++rep.probes_rejected;
      }
    }
  }
  rep.worst_value = worst;
  if (rep.probes_total == rep.probes_rejected) {
    rep.verdict = Verdict::kInconclusive;
    return rep;
  }
  rep.witnesses.push_back(worst_w);
  if (worst <= det_tol) {
    rep.verdict = Verdict::kFail;
  } else {
    rep.verdict = rep.probes_rejected > 0 ? Verdict::kInconclusive : Verdict::kPass;
  }
  return rep;
}

// Twist as global injectivity: for each fixed point, the images of the moving
// grid must be pairwise separated.
ConditionReport injectivity_report(
    const std::string& subject, const std::vector<Point>& fixed,
    const std::vector<Point>& moving,
    const std::function<Vector(size_t, size_t)>& image, double separation,
    const std::string& fixed_name, const std::string& moving_name) {
  ConditionReport rep;
  rep.condition = Condition::kA1;
  rep.subject = subject;
  double worst = std::numeric_limits<double>::infinity();
  for (size_t fi = 0; fi < fixed.size(); ++fi) {
    const Point& a = fixed[fi];
    std::vector<Vector> imgs;
    std::vector<const Point*> srcs;
    for (size_t mi = 0; mi < moving.size(); ++mi) {
      ++rep.probes_total;
      try {
        imgs.push_back(image(fi, mi));
        srcs.push_back(&moving[mi]);
      } catch (const Error&) {
        ++rep.probes_rejected;
      }
    }
    for (size_t i = 0; i < imgs.size(); ++i) {
      for (size_t j = i + 1; j < imgs.size(); ++j) {
        const double d = (imgs[i] - imgs[j]).norm();
        if (d < worst) worst = d;
        if (d <= separation && rep.witnesses.size() < 8) {
          rep.witnesses.push_back(point_witness(
              {{fixed_name, a}, {moving_name + "_0", *srcs[i]}, {moving_name + "_1", *srcs[j]}},
              d, "coincident images"));
        }
      }
    }
  }
  rep.worst_value = worst;
  if (!rep.witnesses.empty()) {
    rep.verdict = Verdict::kFail;
  } else if (rep.probes_rejected > 0) {
    rep.verdict = Verdict::kInconclusive;
  } else {
    rep.verdict = Verdict::kPass;
  }
  return rep;
}

}  // namespace

std::vector<ConditionReport> check_structure(const PreferencePair& pp,
                                             const StructureSampler& sampler) {
  pp.validate();
  const auto xs = grid_points(sampler.x_box, sampler.grid_points);
  const auto ys = grid_points(sampler.y_box, sampler.grid_points);
  const auto zs = grid_points(sampler.z_box, sampler.grid_points);
  const double sep = pp.tol.twist_separation;
  const double det_tol = pp.tol.nondegeneracy_det;
  std::vector<ConditionReport> out;

  out.push_back(smoothness_report(pp.h, "h", xs, zs));
  out.push_back(smoothness_report(pp.g, "g", ys, zs));

  out.push_back(nondegeneracy_report(
      "h", xs, zs,
      [&](size_t i, size_t j) { return joint_derivatives(pp.h, xs[i], zs[j]).az; }, det_tol,
      "x", "z"));
  out.push_back(nondegeneracy_report(
      "g", ys, zs,
      [&](size_t i, size_t j) { return joint_derivatives(pp.g, ys[i], zs[j]).az; }, det_tol,
      "y", "z"));

  // Surplus evaluations on the x-y grid, shared by the b-level checks.
  std::vector<std::optional<SurplusEvaluation>> evals(xs.size() * ys.size());
  for (size_t i = 0; i < xs.size(); ++i) {
    for (size_t j = 0; j < ys.size(); ++j) {
      try {
        evals[i * ys.size() + j] = evaluate_surplus(pp, xs[i], ys[j]);
      } catch (const Error&) {
      }
    }
  }
  const auto lookup = [&](size_t i, size_t j) -> const SurplusEvaluation& {
    const auto& ev = evals[i * ys.size() + j];
    if (!ev) throw Error(ErrorCode::kNoConvergence, "surplus unavailable at grid point");
    return *ev;
  };
  out.push_back(nondegeneracy_report(
      "b", xs, ys, [&](size_t i, size_t j) { return lookup(i, j).b_xy; }, det_tol, "x", "y"));

  out.push_back(injectivity_report(
      "h (x,z)-twist", xs, zs,
      [&](size_t i, size_t j) { return joint_derivatives(pp.h, xs[i], zs[j]).grad_a; }, sep,
      "x", "z"));
  out.push_back(injectivity_report(
      "h (z,x)-twist", zs, xs,
      [&](size_t i, size_t j) { return joint_derivatives(pp.h, xs[j], zs[i]).grad_z; }, sep,
      "z", "x"));
  out.push_back(injectivity_report(
      "g (y,z)-twist", ys, zs,
      [&](size_t i, size_t j) { return joint_derivatives(pp.g, ys[i], zs[j]).grad_a; }, sep,
      "y", "z"));
  out.push_back(injectivity_report(
      "g (z,y)-twist", zs, ys,
      [&](size_t i, size_t j) { return joint_derivatives(pp.g, ys[j], zs[i]).grad_z; }, sep,
      "z", "y"));
  out.push_back(injectivity_report(
      "b (x,y)-twist", xs, ys, [&](size_t i, size_t j) { return lookup(i, j).b_x; }, sep, "x",
      "y"));
  out.push_back(injectivity_report(
      "b (y,x)-twist", ys, xs, [&](size_t i, size_t j) { return lookup(j, i).b_y; }, sep, "y",
      "x"));
  return out;
}

}  // namespace hedonic
