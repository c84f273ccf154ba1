#pragma once

#include "hedonic/condition.hpp"
#include "hedonic/surplus.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace hedonic {

struct MtwOptions {
  /// Displacement per stencil node: |t p| in covector units along the
  /// b-segment and |s v| along the x-line. Five nodes, Richardson-refined once.
  double stencil_step = 0.01;
  /// Steps for the direct route, which differences b itself four times.
  /// Seven-node stencil along the x-line and five-node along the b-segment,
  /// each at h and h/2 with one Richardson step.
  double direct_s_step = 0.08;
  double direct_t_step = 0.05;
  double segment_residual = 1e-9;
  double bexp_tolerance = 1e-10;
};

/// Curvature values per route; unset routes were not evaluated.
struct RouteValues {
  std::optional<double> direct;
  std::optional<double> crosscurv;
  std::optional<double> structured;
  std::optional<double> sum_form;
};

/// A point pair with tangent data. q = D_x b(x,y0), p = D^2_xy b(x,y0) u.
struct MtwProbe {
  Point x;
  Point y0;
  Vector v;  // tangent at x
  Vector u;  // tangent at y0
  Vector q;
  Vector p;
  double orth_residual = 0.0;  // v . b_xy . u
  Point z0;
  Matrix b_xy;
  RouteValues values;
};

MtwProbe make_probe(const PreferencePair& pp, const Point& x, const Point& y0, const Vector& u,
                    const Vector& v);

struct BExpResult {
  Point y;
  Point z;  // z(x, y)
  double residual = 0.0;
  int iterations = 0;
};

/// Inverse of y -> D_x b(x,y): Newton on y with Jacobian b_xy, iterates kept in
/// the y-box. `z_guess` (optional) seeds the inner maximizations.
BExpResult b_exp(const PreferencePair& pp, const Point& x, const Vector& cov,
                 const Point& y_guess, const std::optional<Point>& z_guess = std::nullopt,
                 double tolerance = 1e-10);

struct BSegmentSample {
  std::vector<double> t;
  std::vector<Point> y;
  std::vector<Point> z;
  std::vector<double> residuals;  // |D_x b(x,y_t) - (t p + q)|
  std::vector<SurplusEvaluation> evaluations;  // at (x, y_t)
};

/// y_t with D_x b(x,y_t) = t p + q, q = D_x b(x,y0), solved by continuation
/// outward from t = 0. Throws kSegmentDefect when a node misses the residual
/// bound.
BSegmentSample make_b_segment(const PreferencePair& pp, const Point& x, const Point& y0,
                              const Vector& p, const std::vector<double>& t_grid,
                              const MtwOptions& opts = {});

/// Five-node t-stencil for a probe: {-2,-1,0,1,2} * stencil_step / |p|.
std::vector<double> probe_t_stencil(const MtwProbe& probe, const MtwOptions& opts = {});

/// Mixed fourth difference of b(x + s v, b-exp_x(t p + q)) at s = t = 0.
double mtw_direct(const PreferencePair& pp, const MtwProbe& probe, const MtwOptions& opts = {});

/// Second t-difference of v^T D^2_xx b(x, y_t) v along the b-segment.
double mtw_crosscurv(const PreferencePair& pp, const MtwProbe& probe,
                     const MtwOptions& opts = {});

struct StructuredMtw {
  double total = 0.0;
  double A = 0.0;  // d^2/dt^2 v^T h_xx(x,z_t) v
  double B = 0.0;
  /// The five summands of B, in order:
  /// -2 v''M^-1 v, -2 v'M^-1 v', 4 v'M^-1 M' M^-1 v, v M^-1 M'' M^-1 v,
  /// -2 v M^-1 M' M^-1 M' M^-1 v  (all at t = 0, v_t = h_zx(x,z_t) v).
  std::array<double, 5> b_terms{};
};

/// Curvature from the h/g decomposition: A plus the expanded B term.
StructuredMtw mtw_structured(const PreferencePair& pp, const MtwProbe& probe,
                             const MtwOptions& opts = {});

struct ScanSampler {
  Box x_box;
  Box y_box;
  int grid_points = 5;  // per axis, for both x and y
  int directions = 4;   // tangent pairs per (x,y)
  double slack = 1e-7;
  double spot_check_fraction = 0.05;
  size_t max_witnesses = 32;
};

struct PointSummary {
  Point x;
  Point y;
  size_t probes = 0;
  size_t rejected = 0;
  double min_value = 0.0;  // normalized by |u|^2 |v|^2; +inf when no probes
  Verdict verdict = Verdict::kInconclusive;
};

struct ProbeOutcome {
  MtwProbe probe;
  StructuredMtw structured;
  double normalized = 0.0;
  bool rejected = false;
  std::string reject_reason;
};

struct ScanOutcome {
  ConditionReport report;
  std::vector<PointSummary> points;
  std::vector<ProbeOutcome> probes;
  size_t spot_checks = 0;
  size_t spot_check_failures = 0;
};

/// Verdict for one of the curvature conditions from its minimum normalized
/// value and the number of unusable probes.
Verdict curvature_verdict(Condition c, double min_value, double slack, bool clean);

/// Per-probe generator seed derived from the scan seed and probe index.
std::uint64_t probe_seed(std::uint64_t seed, std::uint64_t index);

/// Screens A3w / A3s / B3w / B3s over the sampler's grid.
ScanOutcome scan_condition(const PreferencePair& pp, Condition condition,
                           const ScanSampler& sampler, std::uint64_t seed, int threads = 1,
                           const MtwOptions& opts = {});

/// Route agreement bound used by the spot checks and the route-equivalence suite.
bool routes_agree(double value, double reference, double rel = 1e-3, double abs = 1e-5);

struct BConvexitySampler {
  Box x_box;
  Box y_box;  // region the segment endpoints are drawn from
  int grid_points = 3;
  int t_nodes = 9;
};

/// Failing nodes of the h-segment between the maximizers for (x, ya) and
/// (x, yb); each witness carries t and, for a y-box miss, the excess distance
/// as its value. Throws when an endpoint maximizer cannot be found.
std::vector<Witness> bconvexity_segment_failures(const PreferencePair& pp,
                                                 const Box& endpoint_box, const Point& x,
                                                 const Point& ya, const Point& yb, int t_nodes);

/// Checks the two premises that make Y b-convex: h-segments stay in Z and each
/// of their nodes is the maximizer for some y in the pair's y-box.
ConditionReport check_bconvexity_premises(const PreferencePair& pp,
                                          const BConvexitySampler& sampler);

}  // namespace hedonic
