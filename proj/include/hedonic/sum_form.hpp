#pragma once

#include "hedonic/surplus.hpp"
#include "hedonic/tensor_calc.hpp"

#include <optional>

namespace hedonic {

/// h(x,z) = x.z - H*(z), g(y,z) = y.z, so that b(x,y) = H(x+y) with H the
/// Legendre transform of the uniformly convex H*.
struct SumFormProblem {
  int n = 1;
  ScalarField H_star;           // on z_box
  std::optional<ScalarField> H;  // closed-form conjugate, when known
  Box x_box;
  Box y_box;
  Box z_box;

  /// Convexity of H* on a grid of z_box (min eigenvalue >= 1e-8) and, if H is
  /// given, the Fenchel-Young equality at 20 seeded points.
  void validate() const;
};

/// H as a field: each evaluation solves the conjugate problem; the gradient is
/// the argmax and the Hessian the inverse Hessian of H* there.
ScalarField conjugate_field(const ScalarField& H_star, const Box& domain);
ScalarField conjugate_field(const ScalarField& H_star);

struct SumFormProbeResult {
  double term1 = 0.0;  // -D^4 H*[w,w,p,p]
  double term2 = 0.0;  // 2 c^T D^2H c with c = D^3 H*[w,p,.]
  double total = 0.0;
  Vector p;  // D^2H(x+y) u
  Vector w;  // D^2H(x+y) v
  Point z_bar;
};

/// Curvature of b = H(x+y) in closed form over the tensors of H* at z_bar,
/// where D H*(z_bar) = x + y.
SumFormProbeResult mtw_sum_form(const SumFormProblem& prob, const Point& x, const Point& y,
                                const Vector& u, const Vector& v);

/// The pair (h, g) above with analytic partials inherited from H*.
PreferencePair as_preference_pair(const SumFormProblem& prob);

/// Sufficient condition for strictly positive curvature on a box of x+y:
/// sup |D^4 H*| / (lambda_min(D^2 H) inf |D^3 H*[w,p,.]|^2) < 2 over unit w, p,
/// taken pointwise in z_bar. Exact in one dimension; directions are sampled
/// (fixed seed) otherwise.
struct SmallnessCertificate {
  double ratio = 0.0;  // worst pointwise ratio over the sampled points
  double bound = 2.0;
  bool holds = false;
  Point worst_z;
};

SmallnessCertificate b3s_smallness(const SumFormProblem& prob, const Box& x_box,
                                   const Box& y_box, int grid_points = 9, int directions = 64);

}  // namespace hedonic
