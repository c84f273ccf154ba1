#pragma once

#include "hedonic/surplus.hpp"
#include "hedonic/tensor_calc.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hedonic {

struct DiscreteMarket {
  std::vector<Point> buyers;
  std::vector<Point> sellers;
  Matrix surplus;  // b(buyers[i], sellers[j])
  std::uint64_t seed = 0;
};

/// Surplus matrix for given samples; throws kNonFinite on a non-finite entry.
DiscreteMarket make_market(const PreferencePair& pp, std::vector<Point> buyers,
                           std::vector<Point> sellers, std::uint64_t seed = 0, int threads = 1);

/// N buyers and N sellers drawn uniformly from the boxes.
DiscreteMarket sample_market(const PreferencePair& pp, size_t count, const Box& buyer_box,
                             const Box& seller_box, std::uint64_t seed, int threads = 1);

/// Uniform samples in a box from a seeded generator.
std::vector<Point> sample_box(const Box& box, size_t count, std::uint64_t seed);

struct Assignment {
  std::vector<int> sigma;  // buyer i is matched with seller sigma[i]
  Vector u;                // buyer potentials
  Vector v;                // seller potentials; u_i + v_j >= b_ij
  double total = 0.0;
};

/// Maximum-surplus assignment with optimal dual potentials (Hungarian method, O(N^3)).
Assignment solve_assignment(const Matrix& surplus);
Assignment solve_assignment(const DiscreteMarket& market);

struct DualCertificate {
  double min_slack = 0.0;        // min_ij u_i + v_j - b_ij
  double max_matched_gap = 0.0;  // max_i |u_i + v_sigma(i) - b_i,sigma(i)|
  bool holds(double tol = 1e-8) const { return min_slack >= -tol && max_matched_gap <= tol; }
};

DualCertificate dual_certificate(const Matrix& surplus, const Assignment& a);

struct SyntheticBuyer {
  Point x;
  Point y;  // F(x) = b-exp_x(Du(x))
  Point z;  // z(x, F(x))
  Matrix P0;  // D^2 u(x) - D^2_xx b(x, F(x))
  bool accepted = false;
  std::string reject_reason;
};

/// Equilibrium induced by a smooth buyer potential u: F(x) solves
/// D_x b(x, F(x)) = Du(x). Buyers where b-exp fails or P0 has an eigenvalue
/// below -psd_tolerance are kept but marked rejected.
std::vector<SyntheticBuyer> synthetic_equilibrium(const PreferencePair& pp,
                                                  const ScalarField& potential,
                                                  const std::vector<Point>& buyers,
                                                  int threads = 1, double psd_tolerance = 1e-9);

/// u(x) = c |x|^2 on the given box.
ScalarField quadratic_potential(const Box& box, double c);

struct ContractJacobian {
  Matrix J_formula;  // [-M^-1 + h_xz^-1 P0 h_zx^-1] h_zx
  Matrix J_fd;       // central differences of x -> z(x, F(x)); empty when not computed
  double min_sv = 0.0;
  double bracket_min_eig = 0.0;  // of -M^-1 + h_xz^-1 P0 h_xz^-T
  double fd_relative_error = 0.0;
};

/// Derivative of the signed-contract map from the closed form only.
ContractJacobian contract_jacobian(const PreferencePair& pp, const Point& x0, const Point& y0,
                                   const Matrix& P0);
/// Same, plus the finite-difference Jacobian along the synthetic map of `potential`.
ContractJacobian contract_jacobian(const PreferencePair& pp, const ScalarField& potential,
                                   const Point& x0, const Point& y0, const Matrix& P0,
                                   double fd_step = 1e-3);

/// Local-PCA dimension: for every point, the covariance of itself and its k
/// nearest neighbours; count eigenvalues above rel_cut times the largest; the
/// median count over all points.
double contract_dimension(const std::vector<Point>& contracts, int k_neighbors,
                          double rel_cut = 1e-3);

struct DiscreteConsistency {
  size_t checked = 0;
  size_t passed = 0;
  double pass_fraction = 0.0;
  double max_error = 0.0;  // relative to max(1, |b_x|)
};

/// Compares D_x b(x_i, y_sigma(i)) with the affine least-squares gradient of the
/// buyer potentials over the k nearest buyers. A pair passes at relative error
/// <= tolerance.
DiscreteConsistency cross_validate_discrete(const PreferencePair& pp, const DiscreteMarket& market,
                                            const Assignment& assignment, int k_neighbors,
                                            double tolerance = 0.1);

}  // namespace hedonic
