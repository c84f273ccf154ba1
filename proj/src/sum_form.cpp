#include "hedonic/sum_form.hpp"

#include "hedonic/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace hedonic {

namespace {

size_t flat(int n, std::initializer_list<int> idx) {
  size_t k = 0;
  for (int i : idx) k = k * static_cast<size_t>(n) + static_cast<size_t>(i);
  return k;
}

Point conjugate_point(const ScalarField& H_star, const Vector& s) {
  return legendre_conjugate(H_star, s, H_star.domain().center()).argmax;
}

}  // namespace

void SumFormProblem::validate() const {
  if (H_star.dimension() != n || z_box.dimension() != n || x_box.dimension() != n ||
      y_box.dimension() != n) {
    throw Error(ErrorCode::kInvalidArgument, "sum-form problem: dimension mismatch");
  }
  for (const Point& z : grid_points(z_box, 5)) {
    const double lam = min_eigenvalue(hessian(H_star, z));
    if (!(lam >= 1e-8)) {
      std::ostringstream os;
      os << "H* not uniformly convex at z = (" << z.transpose() << "): min eigenvalue " << lam;
      throw Error(ErrorCode::kInvalidArgument, os.str());
    }
  }
  if (!H) return;
  std::mt19937_64 rng(20240611);
  for (int k = 0; k < 20; ++k) {
    Vector s(n);
    for (int i = 0; i < n; ++i) {
      std::uniform_real_distribution<double> d(x_box[i].lo + y_box[i].lo,
                                               x_box[i].hi + y_box[i].hi);
      s(i) = d(rng);
    }
    const ConjugateResult c = legendre_conjugate(H_star, s, z_box.center());
    const double gap = (*H)(s) + H_star(c.argmax) - s.dot(c.argmax);
    if (!(std::abs(gap) <= 1e-7)) {
      std::ostringstream os;
      os << "Fenchel-Young gap " << gap << " at s = (" << s.transpose() << ")";
      throw Error(ErrorCode::kInvalidArgument, os.str());
    }
  }
}

ScalarField conjugate_field(const ScalarField& H_star, const Box& domain) {
  ScalarField H(domain, [H_star](const Vector& s) {
    return legendre_conjugate(H_star, s, H_star.domain().center()).value;
  });
  H.with_gradient([H_star](const Vector& s) { return Vector(conjugate_point(H_star, s)); });
  H.with_hessian([H_star](const Vector& s) {
    const Point z = conjugate_point(H_star, s);
    return Matrix(symmetrized(hessian(H_star, z).inverse()));
  });
  return H;
}

ScalarField conjugate_field(const ScalarField& H_star) {
  return conjugate_field(H_star, H_star.domain());
}

SumFormProbeResult mtw_sum_form(const SumFormProblem& prob, const Point& x, const Point& y,
                                const Vector& u, const Vector& v) {
  const int n = prob.n;
  SumFormProbeResult out;
  out.z_bar = conjugate_point(prob.H_star, x + y);
  const Matrix d2h_star = hessian(prob.H_star, out.z_bar);
  if (!(min_eigenvalue(d2h_star) > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "H* not convex at the conjugate point");
  }
  const Matrix d2h = symmetrized(d2h_star.inverse());
  out.p = d2h * u;
  out.w = d2h * v;
  const std::vector<double> t3 = third_tensor(prob.H_star, out.z_bar);
  const std::vector<double> t4 = fourth_tensor(prob.H_star, out.z_bar);
  for (double d : t4) {
    if (!std::isfinite(d)) throw Error(ErrorCode::kNonFinite, "fourth tensor of H*");
  }
  const Vector& p = out.p;
  const Vector& w = out.w;
  double t1 = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) t1 += t4[flat(n, {i, j, k, l})] * p(k) * p(l) * w(i) * w(j);
  Vector c = Vector::Zero(n);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) c(l) += t3[flat(n, {i, l, k})] * w(i) * p(k);
  out.term1 = -t1;
  out.term2 = 2.0 * c.dot(d2h * c);
  out.total = out.term1 + out.term2;
  return out;
}

PreferencePair as_preference_pair(const SumFormProblem& prob) {
  const int n = prob.n;
  const ScalarField hs = prob.H_star;
  int order = 0;
  for (int k = 4; k >= 1; --k) {
    if (hs.has_partials(k)) {
      order = k;
      break;
    }
  }

  ScalarField h(prob.x_box.times(prob.z_box), [n, hs](const Vector& a) {
    return a.head(n).dot(a.tail(n)) - hs(a.tail(n));
  });
  h.with_gradient([n, hs](const Vector& a) {
    return Vector(concat(a.tail(n), a.head(n) - gradient(hs, a.tail(n))));
  });
  h.with_hessian([n, hs](const Vector& a) {
    Matrix m = Matrix::Zero(2 * n, 2 * n);
    m.topRightCorner(n, n).setIdentity();
    m.bottomLeftCorner(n, n).setIdentity();
    m.bottomRightCorner(n, n) = -hessian(hs, a.tail(n));
    return m;
  });
  if (order >= 3) {
    h.with_partials(
        [n, hs](const Vector& a, std::span<const int> idx) -> double {
          if (idx.size() == 1) {
            const int i = idx[0];
            return i < n ? a(n + i) : a(i - n) - hs.analytic_partial(a.tail(n), std::vector<int>{i - n});
          }
          int xs = 0;
          std::vector<int> zi;
          for (int i : idx) {
            if (i < n) ++xs;
            else zi.push_back(i - n);
          }
          if (idx.size() == 2 && xs == 1) {
            const int a0 = idx[0] < n ? idx[0] : idx[0] - n;
            const int a1 = idx[1] < n ? idx[1] : idx[1] - n;
            return a0 == a1 ? 1.0 : 0.0;
          }
          if (xs > 0) return 0.0;
          return -hs.analytic_partial(a.tail(n), zi);
        },
        order);
  }

  ScalarField g(prob.y_box.times(prob.z_box),
                [n](const Vector& a) { return a.head(n).dot(a.tail(n)); });
  g.with_gradient([n](const Vector& a) { return Vector(concat(a.tail(n), a.head(n))); });
  g.with_hessian([n](const Vector&) {
    Matrix m = Matrix::Zero(2 * n, 2 * n);
    m.topRightCorner(n, n).setIdentity();
    m.bottomLeftCorner(n, n).setIdentity();
    return m;
  });
  g.with_partials(
      [n](const Vector& a, std::span<const int> idx) -> double {
        if (idx.size() == 1) return idx[0] < n ? a(n + idx[0]) : a(idx[0] - n);
        if (idx.size() == 2) {
          const bool mixed = (idx[0] < n) != (idx[1] < n);
          return mixed && (idx[0] % n) == (idx[1] % n) ? 1.0 : 0.0;
        }
        return 0.0;
      },
      4);

  PreferencePair pp;
  pp.n = n;
  pp.h = std::move(h);
  pp.g = std::move(g);
  pp.x_box = prob.x_box;
  pp.y_box = prob.y_box;
  pp.z_box = prob.z_box;
  return pp;
}

SmallnessCertificate b3s_smallness(const SumFormProblem& prob, const Box& x_box,
                                   const Box& y_box, int grid_points_per_axis, int directions) {
  const int n = prob.n;
  std::vector<Interval> sides;
  for (int i = 0; i < n; ++i) sides.push_back({x_box[i].lo + y_box[i].lo, x_box[i].hi + y_box[i].hi});
  const Box s_box(std::move(sides));

  std::vector<std::pair<Vector, Vector>> dirs;
  if (n == 1) {
    dirs.emplace_back(Vector::Ones(1), Vector::Ones(1));
  } else {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    for (int k = 0; k < directions; ++k) {
      Vector w(n), p(n);
      for (int i = 0; i < n; ++i) {
        w(i) = normal(rng);
        p(i) = normal(rng);
      }
      dirs.emplace_back(w.normalized(), p.normalized());
    }
  }

  SmallnessCertificate cert;
  for (const Point& s : grid_points(s_box, grid_points_per_axis)) {
    const Point z = conjugate_point(prob.H_star, s);
    const std::vector<double> t3 = third_tensor(prob.H_star, z);
    const std::vector<double> t4 = fourth_tensor(prob.H_star, z);
    const double lam = min_eigenvalue(symmetrized(hessian(prob.H_star, z).inverse()));
    double d4 = 0.0;
    double c_min = std::numeric_limits<double>::infinity();
    for (const auto& [w, p] : dirs) {
      double q = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) q += t4[flat(n, {i, j, k, l})] * w(i) * w(j) * p(k) * p(l);
      d4 = std::max(d4, std::abs(q));
      Vector c = Vector::Zero(n);
      for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
          for (int k = 0; k < n; ++k) c(l) += t3[flat(n, {i, l, k})] * w(i) * p(k);
      c_min = std::min(c_min, c.squaredNorm());
    }
    const double denom = lam * c_min;
    const double ratio = denom > 0.0 ? d4 / denom : std::numeric_limits<double>::infinity();
    if (ratio >= cert.ratio || cert.worst_z.size() == 0) {
      cert.ratio = ratio;
      cert.worst_z = z;
    }
  }
  cert.holds = cert.ratio < cert.bound;
  return cert;
}

}  // namespace hedonic
