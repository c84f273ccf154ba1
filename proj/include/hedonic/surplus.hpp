#pragma once

#include "hedonic/condition.hpp"
#include "hedonic/linalg.hpp"
#include "hedonic/tensor_calc.hpp"

#include <vector>

namespace hedonic {

/// Numerical tolerances shared by the surplus and curvature machinery.
struct SurplusTolerances {
  double stationarity = 1e-9;     // |grad_z (h+g)| at an accepted maximizer
  double negative_definite = 1e-10;  // max eig(M) must be below minus this
  double tie_value = 1e-9;        // two maximizers whose values tie within this...
  double tie_distance = 1e-6;     // ...but sit further apart than this are flagged
  double boundary_margin = 1e-9;  // maximizer this close to the z-box edge is rejected
  double twist_separation = 1e-7;
  double nondegeneracy_det = 1e-10;
};

/// Buyer preference h(x,z) and seller preference g(y,z); the surplus is
/// b(x,y) = sup_z h(x,z) + g(y,z).
///
/// `h` is a field on x_box × z_box (arguments [x; z]) and `g` on y_box × z_box
/// (arguments [y; z]).
struct PreferencePair {
  int n = 1;
  ScalarField h;
  ScalarField g;
  Box x_box;
  Box y_box;
  Box z_box;
  SurplusTolerances tol;

  /// Throws kInvalidArgument when the boxes and fields disagree on dimension.
  void validate() const;
};

/// First and second derivatives of a field f(a, z), split into blocks.
struct JointDerivatives {
  Vector grad_a;
  Vector grad_z;
  Matrix aa;  // D^2_aa f
  Matrix az;  // D^2_az f (rows a, cols z)
  Matrix zz;  // D^2_zz f
};

JointDerivatives joint_derivatives(const ScalarField& f, const Vector& a, const Vector& z);

struct InnerMaximum {
  Point z_star;
  Matrix M;  // D^2_zz h + D^2_zz g at z_star
  double value = 0.0;
  double stationarity = 0.0;
  bool non_unique = false;
  int converged_starts = 0;
};

/// Cell centres of a 3-per-axis subdivision of the box (3^n points).
std::vector<Point> lattice_starts(const Box& box);

/// Best interior stationary point of z -> h(x,z) + g(y,z) over the given starts.
/// Throws kNoConvergence if no start converges, kBoundaryMaximizer if the best
/// candidate sits on the z-box boundary and kSingularMatrix / kNotNegativeDefinite
/// if M fails the non-singularity assumption.
InnerMaximum inner_maximize(const PreferencePair& pp, const Point& x, const Point& y,
                            const std::vector<Point>& starts);
/// Lattice starts.
InnerMaximum inner_maximize(const PreferencePair& pp, const Point& x, const Point& y);

/// Surplus value alone; `warm` seeds the inner Newton solve and is updated.
double surplus_value(const PreferencePair& pp, const Point& x, const Point& y, Point& warm);

/// z(x,y) and all envelope-derived derivative blocks at a pair (x,y).
struct SurplusEvaluation {
  Point x;
  Point y;
  Point z_star;
  double b_value = 0.0;
  Matrix M;
  Vector b_x;
  Vector b_y;
  Matrix z_x;   // D_x z = -M^{-1} h_zx
  Matrix z_y;   // D_y z = -M^{-1} g_zy
  Matrix b_xy;  // -h_xz M^{-1} g_zy
  Matrix b_xx;  // h_xx + h_xz z_x
  Matrix h_xx;
  Matrix h_xz;  // rows x, cols z
  Matrix g_yz;  // rows y, cols z
  double stationarity = 0.0;
};

SurplusEvaluation evaluate_surplus(const PreferencePair& pp, const Point& x, const Point& y);
/// Same, warm-started from a single z guess (lattice fallback on failure).
SurplusEvaluation evaluate_surplus(const PreferencePair& pp, const Point& x, const Point& y,
                                   const Point& z_guess);

struct StructureSampler {
  Box x_box;
  Box y_box;
  Box z_box;
  int grid_points = 5;  // per axis
};

/// Regular grid with `per_axis` points per coordinate including the box faces.
std::vector<Point> grid_points(const Box& box, int per_axis);

/// Screens (A0) for h and g, non-degeneracy of h, g and b, and the twist
/// conditions of h, g and b on sample grids.
std::vector<ConditionReport> check_structure(const PreferencePair& pp,
                                             const StructureSampler& sampler);

}  // namespace hedonic
