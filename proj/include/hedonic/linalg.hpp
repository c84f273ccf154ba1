#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace hedonic {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Points in X, Y and Z are plain coordinate vectors of the ambient dimension.
using Point = Vector;

inline Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

inline double min_eigenvalue(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline double max_eigenvalue(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

inline double min_singular_value(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

/// Concatenation [a; b].
inline Vector concat(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

inline std::vector<double> to_std(const Vector& v) {
  return {v.data(), v.data() + v.size()};
}

inline Vector from_std(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace hedonic
