#include "hedonic/families.hpp"

#include "hedonic/error.hpp"
#include "hedonic/expression.hpp"

#include <algorithm>
#include <cmath>

namespace hedonic {

FamilyBoxes FamilyBoxes::defaults(int n) {
  return {Box::cube(n, -3.0, 3.0), Box::cube(n, -3.0, 3.0), Box::cube(n, -6.0, 6.0)};
}

namespace {

bool all_same(std::span<const int> idx) {
  return std::all_of(idx.begin(), idx.end(), [&](int i) { return i == idx[0]; });
}

SumFormProblem sum_form_problem(int n, const FamilyBoxes& boxes, ScalarField H_star) {
  SumFormProblem prob;
  prob.n = n;
  prob.H_star = std::move(H_star);
  prob.x_box = boxes.x;
  prob.y_box = boxes.y;
  prob.z_box = boxes.z;
  return prob;
}

Family from_sum_form(std::string name, SumFormProblem prob) {
  Family f;
  f.name = std::move(name);
  f.pair = as_preference_pair(prob);
  f.sum_form = std::move(prob);
  return f;
}

// Categorical cumulants of the log-sum-exp part.
struct Lse {
  Matrix a;  // rows are the a_k
  Vector pi;
  Vector mean;
  Matrix centered;  // rows a_k - mean
  Matrix cov;

  Lse(const Matrix& atoms, const Vector& z) : a(atoms) {
    const Vector logits = a * z;
    const double mx = logits.maxCoeff();
    pi = (logits.array() - mx).exp();
    pi /= pi.sum();
    mean = a.transpose() * pi;
    centered = a.rowwise() - mean.transpose();
    cov = centered.transpose() * pi.asDiagonal() * centered;
  }

  static double value(const Matrix& atoms, const Vector& z) {
    const Vector logits = atoms * z;
    const double mx = logits.maxCoeff();
    return mx + std::log((logits.array() - mx).exp().sum());
  }

  double moment(std::span<const int> idx) const {
    double s = 0.0;
    for (Eigen::Index k = 0; k < a.rows(); ++k) {
      double prod = pi(k);
      for (int i : idx) prod *= centered(k, i);
      s += prod;
    }
    return s;
  }
};

Matrix logconvex_atoms(int n) {
  Matrix a = Matrix::Zero(n + 2, n);
  for (int i = 0; i < n; ++i) {
    a(1 + i, i) = 1.0;
    a(n + 1, i) = (i % 2 == 0 ? 0.5 : -0.5);
  }
  return a;
}

}  // namespace

Family quadratic_family(int n, const FamilyBoxes& boxes, std::optional<Matrix> A_opt) {
  const Matrix A = A_opt ? *A_opt : Matrix::Identity(n, n);
  if (A.rows() != n || A.cols() != n) throw Error(ErrorCode::kInvalidArgument, "A must be n x n");
  if (!((A - A.transpose()).norm() <= 1e-12) || !(min_eigenvalue(A) > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "A must be symmetric positive definite");
  }
  ScalarField hs(boxes.z, [A](const Vector& z) { return 0.5 * z.dot(A * z); });
  hs.with_gradient([A](const Vector& z) { return Vector(A * z); });
  hs.with_hessian([A](const Vector&) { return A; });
  hs.with_partials(
      [A](const Vector& z, std::span<const int> idx) -> double {
        if (idx.size() == 1) return A.row(idx[0]).dot(z);
        if (idx.size() == 2) return A(idx[0], idx[1]);
        return 0.0;
      },
      4);
  SumFormProblem prob = sum_form_problem(n, boxes, std::move(hs));
  const Matrix Ainv = A.inverse();
  std::vector<Interval> s;
  for (int i = 0; i < n; ++i) s.push_back({boxes.x[i].lo + boxes.y[i].lo, boxes.x[i].hi + boxes.y[i].hi});
  ScalarField H(Box(std::move(s)), [Ainv](const Vector& p) { return 0.5 * p.dot(Ainv * p); });
  H.with_gradient([Ainv](const Vector& p) { return Vector(Ainv * p); });
  H.with_hessian([Ainv](const Vector&) { return Ainv; });
  prob.H = std::move(H);
  return from_sum_form("quadratic", std::move(prob));
}

Family bilinear_family(int n, const FamilyBoxes& boxes) {
  ScalarField h(boxes.x.times(boxes.z), [n](const Vector& a) {
    return -0.5 * (a.head(n) - a.tail(n)).squaredNorm();
  });
  h.with_gradient([n](const Vector& a) {
    const Vector d = a.head(n) - a.tail(n);
    return Vector(concat(-d, d));
  });
  h.with_hessian([n](const Vector&) {
    Matrix m(2 * n, 2 * n);
    const Matrix I = Matrix::Identity(n, n);
    m << -I, I, I, -I;
    return m;
  });
  h.with_partials(
      [n](const Vector& a, std::span<const int> idx) -> double {
        if (idx.size() == 1) {
          const int i = idx[0] % n;
          const double d = a(i) - a(n + i);
          return idx[0] < n ? -d : d;
        }
        if (idx.size() == 2) {
          if (idx[0] % n != idx[1] % n) return 0.0;
          return (idx[0] < n) == (idx[1] < n) ? -1.0 : 1.0;
        }
        return 0.0;
      },
      4);

  ScalarField g(boxes.y.times(boxes.z), [n](const Vector& a) {
    return a.head(n).dot(a.tail(n)) - 0.5 * a.head(n).squaredNorm();
  });
  g.with_gradient([n](const Vector& a) {
    return Vector(concat(a.tail(n) - a.head(n), a.head(n)));
  });
  g.with_hessian([n](const Vector&) {
    Matrix m(2 * n, 2 * n);
    const Matrix I = Matrix::Identity(n, n);
    m << -I, I, I, Matrix::Zero(n, n);
    return m;
  });
  g.with_partials(
      [n](const Vector& a, std::span<const int> idx) -> double {
        if (idx.size() == 1) {
          const int i = idx[0] % n;
          return idx[0] < n ? a(n + i) - a(i) : a(i);
        }
        if (idx.size() == 2) {
          if (idx[0] % n != idx[1] % n) return 0.0;
          const bool y0 = idx[0] < n;
          const bool y1 = idx[1] < n;
          if (y0 && y1) return -1.0;
          return y0 != y1 ? 1.0 : 0.0;
        }
        return 0.0;
      },
      4);

  Family f;
  f.name = "bilinear";
  f.pair.n = n;
  f.pair.h = std::move(h);
  f.pair.g = std::move(g);
  f.pair.x_box = boxes.x;
  f.pair.y_box = boxes.y;
  f.pair.z_box = boxes.z;
  return f;
}

Family quartic_family(int n, const FamilyBoxes& boxes, double eps) {
  if (!(eps >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "epsilon must be non-negative");
  ScalarField hs(boxes.z, [eps](const Vector& z) {
    return 0.5 * z.squaredNorm() + 0.25 * eps * z.array().pow(4).sum();
  });
  hs.with_gradient([eps](const Vector& z) { return Vector(z.array() + eps * z.array().cube()); });
  hs.with_hessian([eps](const Vector& z) {
    return Matrix((1.0 + 3.0 * eps * z.array().square()).matrix().asDiagonal());
  });
  hs.with_partials(
      [eps](const Vector& z, std::span<const int> idx) -> double {
        if (!all_same(idx)) return 0.0;
        const double zi = z(idx[0]);
        switch (idx.size()) {
          case 1: return zi + eps * zi * zi * zi;
          case 2: return 1.0 + 3.0 * eps * zi * zi;
          case 3: return 6.0 * eps * zi;
          default: return 6.0 * eps;
        }
      },
      4);
  return from_sum_form("quartic_sum_form", sum_form_problem(n, boxes, std::move(hs)));
}

Family logconvex_family(int n, const FamilyBoxes& boxes) {
  const Matrix atoms = logconvex_atoms(n);
  ScalarField hs(boxes.z, [atoms](const Vector& z) {
    return 0.5 * z.squaredNorm() + Lse::value(atoms, z);
  });
  hs.with_gradient([atoms](const Vector& z) { return Vector(z + Lse(atoms, z).mean); });
  hs.with_hessian([atoms, n](const Vector& z) {
    return Matrix(Matrix::Identity(n, n) + Lse(atoms, z).cov);
  });
  hs.with_partials(
      [atoms](const Vector& z, std::span<const int> idx) -> double {
        const Lse l(atoms, z);
        switch (idx.size()) {
          case 1: return z(idx[0]) + l.mean(idx[0]);
          case 2: return (idx[0] == idx[1] ? 1.0 : 0.0) + l.cov(idx[0], idx[1]);
          case 3: return l.moment(idx);
          default: {
            const Matrix& c = l.cov;
            const int i = idx[0], j = idx[1], k = idx[2], m = idx[3];
            return l.moment(idx) - c(i, j) * c(k, m) - c(i, k) * c(j, m) - c(i, m) * c(j, k);
          }
        }
      },
      4);
  return from_sum_form("logconvex_sum_form", sum_form_problem(n, boxes, std::move(hs)));
}

Family custom_family(int n, const FamilyBoxes& boxes, const std::string& h_text,
                     const std::string& g_text) {
  Expression h_expr;
  Expression g_expr;
  try {
    h_expr = Expression::parse(h_text, block_resolver('x', n));
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("h: ") + e.what());
  }
  try {
    g_expr = Expression::parse(g_text, block_resolver('y', n));
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("g: ") + e.what());
  }
  Family f;
  f.name = "custom";
  f.pair.n = n;
  f.pair.h = ScalarField(boxes.x.times(boxes.z), [h_expr](const Vector& a) { return h_expr(a); });
  f.pair.g = ScalarField(boxes.y.times(boxes.z), [g_expr](const Vector& a) { return g_expr(a); });
  f.pair.x_box = boxes.x;
  f.pair.y_box = boxes.y;
  f.pair.z_box = boxes.z;
  return f;
}

const std::vector<std::string>& family_names() {
  static const std::vector<std::string> names = {"quadratic", "bilinear", "quartic_sum_form",
                                                 "logconvex_sum_form", "custom"};
  return names;
}

Family make_family(std::string_view name, int n, const FamilyBoxes& boxes,
                   const FamilyParams& params) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "dimension must be positive");
  if (name == "quadratic") return quadratic_family(n, boxes, params.A);
  if (name == "bilinear") return bilinear_family(n, boxes);
  if (name == "quartic_sum_form") return quartic_family(n, boxes, params.epsilon);
  if (name == "logconvex_sum_form") return logconvex_family(n, boxes);
  if (name == "custom") return custom_family(n, boxes, params.h, params.g);
  throw Error(ErrorCode::kInvalidArgument, "unknown family '" + std::string(name) + "'");
}

std::vector<Family> shipped_families(int n) {
  const FamilyBoxes boxes = FamilyBoxes::defaults(n);
  return {quadratic_family(n, boxes), bilinear_family(n, boxes), quartic_family(n, boxes),
          logconvex_family(n, boxes)};
}

}  // namespace hedonic
