#include "hedonic/mtw.hpp"

#include "hedonic/error.hpp"
#include "hedonic/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace hedonic {

MtwProbe make_probe(const PreferencePair& pp, const Point& x, const Point& y0, const Vector& u,
                    const Vector& v) {
  const SurplusEvaluation ev = evaluate_surplus(pp, x, y0);
  MtwProbe probe;
  probe.x = x;
  probe.y0 = y0;
  probe.u = u;
  probe.v = v;
  probe.q = ev.b_x;
  probe.b_xy = ev.b_xy;
  probe.p = ev.b_xy * u;
  probe.orth_residual = v.dot(probe.p);
  probe.z0 = ev.z_star;
  return probe;
}

// ---------------------------------------------------------------------------
// b-exponential and b-segments

BExpResult b_exp(const PreferencePair& pp, const Point& x, const Vector& cov,
                 const Point& y_guess, const std::optional<Point>& z_guess, double tolerance) {
  if (!pp.y_box.contains(y_guess)) {
    throw Error(ErrorCode::kOutOfDomain, "b_exp: initial guess outside the y-box");
  }
  Point y = y_guess;
  SurplusEvaluation ev = z_guess ? evaluate_surplus(pp, x, y, *z_guess) : evaluate_surplus(pp, x, y);
  Vector r = ev.b_x - cov;
  double rnorm = r.norm();
  const double floor = 1e-15 * std::max(1.0, cov.norm());
  int it = 0;
  int polish = 0;
  for (; it < 100; ++it) {
    if (rnorm <= floor || (rnorm <= tolerance && polish >= 2)) break;
    Eigen::PartialPivLU<Matrix> lu(ev.b_xy);
    if (!(std::abs(lu.determinant()) > 1e-300)) {
      throw Error(ErrorCode::kSingularMatrix, "b_exp: b_xy singular at an iterate");
    }
    const Vector step = lu.solve(-r);
    double alpha = 1.0;
    bool improved = false;
    for (int k = 0; k <= 30; ++k, alpha *= 0.5) {
      const Point trial = y + alpha * step;
      if (!pp.y_box.contains(trial)) continue;
      try {
        SurplusEvaluation tev = evaluate_surplus(pp, x, trial, ev.z_star);
        const Vector tr = tev.b_x - cov;
        if (tr.norm() < rnorm) {
          y = trial;
          ev = std::move(tev);
          r = tr;
          improved = true;
          break;
        }
      } catch (const Error&) {
        // Shorten the step and retry.
      }
    }
    if (!improved) break;
    if (rnorm <= tolerance) ++polish;
    rnorm = r.norm();
  }
  if (!(rnorm <= tolerance)) {
    std::ostringstream os;
    os << "b_exp residual " << rnorm << " for covector (" << cov.transpose() << ")";
    throw Error(ErrorCode::kNoConvergence, os.str());
  }
  return {y, ev.z_star, rnorm, it};
}

BSegmentSample make_b_segment(const PreferencePair& pp, const Point& x, const Point& y0,
                              const Vector& p, const std::vector<double>& t_grid,
                              const MtwOptions& opts) {
  const SurplusEvaluation ev0 = evaluate_surplus(pp, x, y0);
  const Vector q = ev0.b_x;

  BSegmentSample seg;
  const size_t m = t_grid.size();
  seg.t = t_grid;
  seg.y.resize(m);
  seg.z.resize(m);
  seg.residuals.resize(m);
  seg.evaluations.resize(m);

  std::vector<size_t> forward;
  std::vector<size_t> backward;
  for (size_t k = 0; k < m; ++k) (t_grid[k] >= 0.0 ? forward : backward).push_back(k);
  std::sort(forward.begin(), forward.end(), [&](size_t a, size_t b) { return t_grid[a] < t_grid[b]; });
  std::sort(backward.begin(), backward.end(), [&](size_t a, size_t b) { return t_grid[a] > t_grid[b]; });

  for (const auto* side : {&forward, &backward}) {
    SurplusEvaluation prev = ev0;
    double t_prev = 0.0;
    for (size_t k : *side) {
      const double t = t_grid[k];
      const Vector cov = q + t * p;
      // Tangent predictor: dy/dt = b_xy^{-1} p.
      Point guess = prev.y;
      Eigen::PartialPivLU<Matrix> lu(prev.b_xy);
      if (std::abs(lu.determinant()) > 1e-300) {
        const Point predicted = prev.y + (t - t_prev) * lu.solve(p);
        if (pp.y_box.contains(predicted)) guess = predicted;
      }
      BExpResult r;
      try {
        r = b_exp(pp, x, cov, guess, prev.z_star, opts.bexp_tolerance);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kOutOfDomain) {
          throw Error(ErrorCode::kOutOfDomain, std::string("b-segment exits the y-box: ") + e.what());
        }
        throw;
      }
      SurplusEvaluation ev = evaluate_surplus(pp, x, r.y, r.z);
      const double residual = (ev.b_x - cov).norm();
      if (!(residual <= opts.segment_residual)) {
        std::ostringstream os;
        os << "node t=" << t << " residual " << residual;
        throw Error(ErrorCode::kSegmentDefect, os.str());
      }
      seg.y[k] = r.y;
      seg.z[k] = ev.z_star;
      seg.residuals[k] = residual;
      seg.evaluations[k] = ev;
      prev = std::move(ev);
      t_prev = t;
    }
  }
  return seg;
}

// ---------------------------------------------------------------------------
// Stencils

namespace {

constexpr std::array<int, 5> kOffsets = {-2, -1, 0, 1, 2};

template <class T>
T first_derivative(const std::array<T, 5>& f, double h) {
  return (8.0 * (f[3] - f[1]) - (f[4] - f[0])) / (12.0 * h);
}

// Three-point second difference at steps h and 2h combined once by Richardson.
template <class T>
T second_derivative(const std::array<T, 5>& f, double h) {
  return (-f[4] + 16.0 * f[3] - 30.0 * f[2] + 16.0 * f[1] - f[0]) / (12.0 * h * h);
}

// Seven-point second difference (Richardson applied twice).
double second_derivative7(const std::array<double, 7>& f, double h) {
  return (2.0 * (f[0] + f[6]) - 27.0 * (f[1] + f[5]) + 270.0 * (f[2] + f[4]) - 490.0 * f[3]) /
         (180.0 * h * h);
}

bool degenerate(const MtwProbe& probe) {
  return probe.p.norm() == 0.0 || probe.v.norm() == 0.0;
}

BSegmentSample probe_segment(const PreferencePair& pp, const MtwProbe& probe,
                             const MtwOptions& opts) {
  return make_b_segment(pp, probe.x, probe.y0, probe.p, probe_t_stencil(probe, opts), opts);
}

}  // namespace

std::vector<double> probe_t_stencil(const MtwProbe& probe, const MtwOptions& opts) {
  const double h = opts.stencil_step / probe.p.norm();
  std::vector<double> t;
  for (int k : kOffsets) t.push_back(k * h);
  return t;
}

double mtw_direct(const PreferencePair& pp, const MtwProbe& probe, const MtwOptions& opts) {
  if (degenerate(probe)) return 0.0;
  // Both directions use a stencil at h and h/2 combined by one Richardson
  // step; nodes sit at multiples of h/2.
  const double ht = opts.direct_t_step / probe.p.norm();
  std::vector<double> ts;
  for (int m = -4; m <= 4; ++m) ts.push_back(m * 0.5 * ht);
  const BSegmentSample seg = make_b_segment(pp, probe.x, probe.y0, probe.p, ts, opts);

  const double hs = opts.direct_s_step / probe.v.norm();
  const double half = 0.5 * hs;
  std::array<double, 9> outer{};
  for (size_t k = 0; k < ts.size(); ++k) {
    // f[m + 6] = b(x + m (hs/2) v, y_k); walk outward from m = 0 on each side.
    std::array<double, 13> f{};
    f[6] = seg.evaluations[k].b_value;
    for (int sign : {1, -1}) {
      Point warm = seg.z[k];
      for (int m = 1; m <= 6; ++m) {
        if (m == 5) continue;
        f[static_cast<size_t>(6 + sign * m)] =
            surplus_value(pp, probe.x + (sign * m * half) * probe.v, seg.y[k], warm);
      }
    }
    const std::array<double, 7> coarse{f[0], f[2], f[4], f[6], f[8], f[10], f[12]};
    const std::array<double, 7> fine{f[3], f[4], f[5], f[6], f[7], f[8], f[9]};
    outer[k] = (64.0 * second_derivative7(fine, half) - second_derivative7(coarse, hs)) / 63.0;
  }
  const std::array<double, 5> t_coarse{outer[0], outer[2], outer[4], outer[6], outer[8]};
  const std::array<double, 5> t_fine{outer[2], outer[3], outer[4], outer[5], outer[6]};
  return (16.0 * second_derivative(t_fine, 0.5 * ht) - second_derivative(t_coarse, ht)) / 15.0;
}

double mtw_crosscurv(const PreferencePair& pp, const MtwProbe& probe, const MtwOptions& opts) {
  if (degenerate(probe)) return 0.0;
  const BSegmentSample seg = probe_segment(pp, probe, opts);
  std::array<double, 5> f{};
  for (size_t k = 0; k < 5; ++k) f[k] = probe.v.dot(seg.evaluations[k].b_xx * probe.v);
  return second_derivative(f, seg.t[3]);
}

StructuredMtw mtw_structured(const PreferencePair& pp, const MtwProbe& probe,
                             const MtwOptions& opts) {
  StructuredMtw out;
  if (degenerate(probe)) return out;
  const BSegmentSample seg = probe_segment(pp, probe, opts);
  const double h = seg.t[3];

  std::array<double, 5> a{};
  std::array<Vector, 5> vt;
  std::array<Matrix, 5> Mt;
  for (size_t k = 0; k < 5; ++k) {
    const SurplusEvaluation& ev = seg.evaluations[k];
    a[k] = probe.v.dot(ev.h_xx * probe.v);
    vt[k] = ev.h_xz.transpose() * probe.v;
    Mt[k] = ev.M;
  }
  const Vector v0 = vt[2];
  const Vector v1 = first_derivative(vt, h);
  const Vector v2 = second_derivative(vt, h);
  const Matrix M1 = first_derivative(Mt, h);
  const Matrix M2 = second_derivative(Mt, h);

  Eigen::PartialPivLU<Matrix> lu(Mt[2]);
  if (!(std::abs(lu.determinant()) > 0.0)) {
    throw Error(ErrorCode::kSingularMatrix, "M_t singular at t = 0");
  }
  const Vector Mi_v0 = lu.solve(v0);
  const Vector Mi_v1 = lu.solve(v1);
  const Vector Mi_M1_Mi_v0 = lu.solve(Vector(M1 * Mi_v0));

  out.A = second_derivative(a, h);
  out.b_terms[0] = -2.0 * v2.dot(Mi_v0);
  out.b_terms[1] = -2.0 * v1.dot(Mi_v1);
  out.b_terms[2] = 4.0 * v1.dot(Mi_M1_Mi_v0);
  out.b_terms[3] = Mi_v0.dot(M2 * Mi_v0);
  // v M^-1 M' M^-1 M' M^-1 v = (M' M^-1 v)^T M^-1 (M' M^-1 v)
  const Vector w = M1 * Mi_v0;
  out.b_terms[4] = -2.0 * w.dot(lu.solve(w));
  out.B = std::accumulate(out.b_terms.begin(), out.b_terms.end(), 0.0);
  out.total = out.A + out.B;
  return out;
}

// ---------------------------------------------------------------------------
// Condition scans

bool routes_agree(double value, double reference, double rel, double abs) {
  return std::abs(value - reference) <= std::max(rel * std::abs(reference), abs);
}

Verdict curvature_verdict(Condition c, double min_value, double slack, bool clean) {
  const bool strict = c == Condition::kA3s || c == Condition::kB3s;
  if (!strict) {
    if (min_value < -slack) return Verdict::kFail;
    return clean ? Verdict::kPass : Verdict::kInconclusive;
  }
  if (min_value < -slack) return Verdict::kFail;
  if (min_value < slack || !clean) return Verdict::kInconclusive;
  return Verdict::kPass;
}

std::uint64_t probe_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 over the pair.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

Vector random_unit(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  do {
    for (int i = 0; i < dim; ++i) v(i) = normal(rng);
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

// Orthonormal basis of the orthogonal complement of a (n x (n-1)).
Matrix complement_basis(const Vector& a) {
  const auto n = a.size();
  Eigen::FullPivHouseholderQR<Matrix> qr(Matrix(a.normalized()));
  const Matrix q = qr.matrixQ();
  return q.rightCols(n - 1);
}

bool is_failure_value(double value, double slack) { return value < -slack; }

Witness probe_witness(const ProbeOutcome& o, Condition c) {
  Witness w;
  w.vectors = {{"x", o.probe.x}, {"y", o.probe.y0}, {"u", o.probe.u},
               {"v", o.probe.v}, {"p", o.probe.p}, {"q", o.probe.q}};
  w.scalars = {{"orth_residual", o.probe.orth_residual},
               {"A", o.structured.A},
               {"B", o.structured.B}};
  w.value = o.normalized;
  w.note = std::string(to_string(c)) + " via structured route";
  return w;
}

}  // namespace

ScanOutcome scan_condition(const PreferencePair& pp, Condition condition,
                           const ScanSampler& sampler, std::uint64_t seed, int threads,
                           const MtwOptions& opts) {
  const bool orthogonal = condition == Condition::kA3w || condition == Condition::kA3s;
  if (!orthogonal && condition != Condition::kB3w && condition != Condition::kB3s) {
    throw Error(ErrorCode::kInvalidArgument, "scan_condition handles A3w/A3s/B3w/B3s only");
  }
  const auto xs = grid_points(sampler.x_box, sampler.grid_points);
  const auto ys = grid_points(sampler.y_box, sampler.grid_points);
  const size_t pairs = xs.size() * ys.size();
  const auto dirs = static_cast<size_t>(std::max(sampler.directions, 0));
  const bool vacuous = orthogonal && pp.n == 1;  // ker((b_xy u)^T) = {0}

  struct PairResult {
    PointSummary summary;
    std::vector<ProbeOutcome> probes;
    size_t spot_checks = 0;
    size_t spot_failures = 0;
  };
  std::vector<PairResult> results(pairs);

  parallel_for(pairs, threads, [&](size_t pi) {
    PairResult& res = results[pi];
    const Point& x = xs[pi / ys.size()];
    const Point& y = ys[pi % ys.size()];
    res.summary.x = x;
    res.summary.y = y;
    res.summary.min_value = std::numeric_limits<double>::infinity();
    if (vacuous) {
      res.summary.verdict = curvature_verdict(condition, res.summary.min_value, sampler.slack, true);
      return;
    }
    std::optional<SurplusEvaluation> ev;
    std::string ev_error;
    try {
      ev = evaluate_surplus(pp, x, y);
    } catch (const Error& e) {
      ev_error = e.what();
    }
    for (size_t d = 0; d < dirs; ++d) {
      std::mt19937_64 rng(probe_seed(seed, pi * dirs + d));
      ProbeOutcome o;
      o.probe.x = x;
      o.probe.y0 = y;
      o.probe.u = random_unit(rng, pp.n);
      if (orthogonal) {
        const Vector a = ev ? Vector(ev->b_xy * o.probe.u) : o.probe.u;
        o.probe.v = complement_basis(a) * random_unit(rng, pp.n - 1);
      } else {
        o.probe.v = random_unit(rng, pp.n);
      }
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const bool spot = unit(rng) < sampler.spot_check_fraction;
      ++res.summary.probes;
      if (!ev) {
        o.rejected = true;
        o.reject_reason = ev_error;
        ++res.summary.rejected;
        res.probes.push_back(std::move(o));
        continue;
      }
      o.probe.q = ev->b_x;
      o.probe.b_xy = ev->b_xy;
      o.probe.p = ev->b_xy * o.probe.u;
      o.probe.orth_residual = o.probe.v.dot(o.probe.p);
      o.probe.z0 = ev->z_star;
      try {
        o.structured = mtw_structured(pp, o.probe, opts);
        const double scale = o.probe.u.squaredNorm() * o.probe.v.squaredNorm();
        o.normalized = o.structured.total / scale;
        o.probe.values.structured = o.structured.total;
        if (spot) {
          ++res.spot_checks;
          const double direct = mtw_direct(pp, o.probe, opts);
          o.probe.values.direct = direct;
          if (!routes_agree(direct, o.structured.total)) ++res.spot_failures;
        }
        res.summary.min_value = std::min(res.summary.min_value, o.normalized);
      } catch (const Error& e) {
        o.rejected = true;
        o.reject_reason = e.what();
        ++res.summary.rejected;
      }
      res.probes.push_back(std::move(o));
    }
    res.summary.verdict = curvature_verdict(condition, res.summary.min_value, sampler.slack,
                                            res.summary.rejected == 0);
  });

  ScanOutcome out;
  out.report.condition = condition;
  out.report.subject = "b";
  double worst = std::numeric_limits<double>::infinity();
  std::vector<const ProbeOutcome*> violating;
  for (auto& r : results) {
    out.report.probes_total += r.summary.probes;
    out.report.probes_rejected += r.summary.rejected;
    out.spot_checks += r.spot_checks;
    out.spot_check_failures += r.spot_failures;
    worst = std::min(worst, r.summary.min_value);
    out.points.push_back(r.summary);
    for (auto& o : r.probes) out.probes.push_back(std::move(o));
  }
  for (const auto& o : out.probes) {
    if (!o.rejected && is_failure_value(o.normalized, sampler.slack)) {
      violating.push_back(&o);
    }
  }
  std::stable_sort(violating.begin(), violating.end(),
                   [](const ProbeOutcome* a, const ProbeOutcome* b) {
                     return a->normalized < b->normalized;
                   });
  if (violating.size() > sampler.max_witnesses) violating.resize(sampler.max_witnesses);
  for (const auto* o : violating) out.report.witnesses.push_back(probe_witness(*o, condition));

  out.report.worst_value = worst;
  const bool clean = out.report.probes_rejected == 0 && out.spot_check_failures == 0;
  out.report.verdict = curvature_verdict(condition, worst, sampler.slack, clean);
  return out;
}

// ---------------------------------------------------------------------------
// b-convexity premises

namespace {

// Newton for D_x h(x, z) = target in z, Jacobian h_xz.
std::optional<Point> solve_h_segment_node(const PreferencePair& pp, const Point& x,
                                          const Vector& target, Point z) {
  for (int it = 0; it < 100; ++it) {
    const JointDerivatives d = joint_derivatives(pp.h, x, z);
    const Vector r = d.grad_a - target;
    const double rn = r.norm();
    if (rn <= 1e-11 * std::max(1.0, target.norm())) return z;
    Eigen::PartialPivLU<Matrix> lu(d.az);
    if (!(std::abs(lu.determinant()) > 1e-300)) return std::nullopt;
    const Vector step = lu.solve(-r);
    double alpha = 1.0;
    bool improved = false;
    for (int k = 0; k <= 30; ++k, alpha *= 0.5) {
      const Point trial = z + alpha * step;
      if (!pp.z_box.contains(trial)) continue;
      if ((joint_derivatives(pp.h, x, trial).grad_a - target).norm() < rn) {
        z = trial;
        improved = true;
        break;
      }
    }
    if (!improved) return std::nullopt;
  }
  return std::nullopt;
}

// Newton for D_z g(y, z) = -D_z h(x, z) in y, Jacobian g_zy. The solve runs
// without the y-box so a miss can be reported with the offending y.
std::optional<Point> solve_seller(const PreferencePair& pp, const Point& x, const Point& z,
                                  Point y) {
  const Vector target = -joint_derivatives(pp.h, x, z).grad_z;
  for (int it = 0; it < 100; ++it) {
    const JointDerivatives d = joint_derivatives(pp.g, y, z);
    const Vector r = d.grad_z - target;
    const double rn = r.norm();
    if (rn <= 1e-11 * std::max(1.0, target.norm())) return y;
    Eigen::PartialPivLU<Matrix> lu(Matrix(d.az.transpose()));
    if (!(std::abs(lu.determinant()) > 1e-300)) return std::nullopt;
    const Vector step = lu.solve(-r);
    double alpha = 1.0;
    bool improved = false;
    for (int k = 0; k <= 30; ++k, alpha *= 0.5) {
      const Point trial = y + alpha * step;
      try {
        if ((joint_derivatives(pp.g, trial, z).grad_z - target).norm() < rn) {
          y = trial;
          improved = true;
          break;
        }
      } catch (const Error&) {
      }
    }
    if (!improved) return std::nullopt;
  }
  return std::nullopt;
}

Box hull(const Box& a, const Box& b) {
  std::vector<Interval> s;
  for (int i = 0; i < a.dimension(); ++i) {
    s.push_back({std::min(a[i].lo, b[i].lo), std::max(a[i].hi, b[i].hi)});
  }
  return Box(std::move(s));
}

}  // namespace

static double box_excess(const Box& box, const Point& y) {
  double e = 0.0;
  for (int i = 0; i < box.dimension(); ++i) {
    e = std::max({e, box[i].lo - y(i), y(i) - box[i].hi});
  }
  return e;
}

std::vector<Witness> bconvexity_segment_failures(const PreferencePair& pp,
                                                 const Box& endpoint_box, const Point& x,
                                                 const Point& ya, const Point& yb, int t_nodes) {
  // Endpoints may be drawn outside the pair's y-box; their maximizers are
  // computed on the hull.
  PreferencePair wide = pp;
  wide.y_box = hull(pp.y_box, endpoint_box);
  const Point z0 = inner_maximize(wide, x, ya).z_star;
  const Point z1 = inner_maximize(wide, x, yb).z_star;
  const Vector p0 = joint_derivatives(pp.h, x, z0).grad_a;
  const Vector p1 = joint_derivatives(pp.h, x, z1).grad_a;
  const int nodes = std::max(t_nodes, 2);

  std::vector<Witness> out;
  Point z = z0;
  for (int k = 0; k < nodes; ++k) {
    const double t = static_cast<double>(k) / (nodes - 1);
    Witness w;
    w.scalars = {{"t", t}, {"t_nodes", static_cast<double>(nodes)}};
    w.vectors = {{"x", x}, {"y_a", ya}, {"y_b", yb}};
    const auto zt = solve_h_segment_node(pp, x, (1.0 - t) * p0 + t * p1, z);
    if (!zt) {
      w.vectors.emplace_back("z_t", z);
      w.value = 1.0;
      w.note = "h-segment leaves Z";
      out.push_back(std::move(w));
      break;
    }
    z = *zt;
    w.vectors.emplace_back("z_t", z);
    const auto yt = solve_seller(pp, x, z, (1.0 - t) * ya + t * yb);
    if (!yt) {
      w.value = 1.0;
      w.note = "no seller solves the first-order condition";
      out.push_back(std::move(w));
    } else if (!pp.y_box.contains(*yt)) {
      w.vectors.emplace_back("y_t", *yt);
      w.value = box_excess(pp.y_box, *yt);
      w.note = "seller for z_t lies outside the y-box";
      out.push_back(std::move(w));
    }
  }
  return out;
}

ConditionReport check_bconvexity_premises(const PreferencePair& pp,
                                          const BConvexitySampler& sampler) {
  ConditionReport rep;
  rep.condition = Condition::kBConvexity;
  rep.subject = "Y";

  const auto xs = grid_points(sampler.x_box, sampler.grid_points);
  const auto ys = grid_points(sampler.y_box, sampler.grid_points);
  size_t failures = 0;
  double worst = 0.0;
  for (const Point& x : xs) {
    for (size_t i = 0; i < ys.size() / 2; ++i) {
      const Point& ya = ys[i];
      const Point& yb = ys[ys.size() - 1 - i];
      std::vector<Witness> found;
      try {
        found = bconvexity_segment_failures(pp, sampler.y_box, x, ya, yb, sampler.t_nodes);
      } catch (const Error&) {
        ++rep.probes_rejected;
        continue;
      }
      rep.probes_total += static_cast<size_t>(std::max(sampler.t_nodes, 2));
      failures += found.size();
      for (auto& w : found) {
        worst = std::max(worst, w.value);
        if (rep.witnesses.size() < 32) rep.witnesses.push_back(std::move(w));
      }
    }
  }
  if (failures > 0) {
    rep.verdict = Verdict::kFail;
  } else if (rep.probes_rejected > 0 || rep.probes_total == 0) {
    rep.verdict = Verdict::kInconclusive;
  } else {
    rep.verdict = Verdict::kPass;
  }
  rep.worst_value = worst;
  return rep;
}

}  // namespace hedonic
