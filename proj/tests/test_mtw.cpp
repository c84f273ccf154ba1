#include "doctest.h"
#include "oracles.hpp"

#include "hedonic/error.hpp"
#include "hedonic/families.hpp"
#include "hedonic/mtw.hpp"

#include <cmath>
#include <random>

using namespace hedonic;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

double bound(double ref) { return std::max(1e-3 * std::abs(ref), 1e-5); }

struct RandomProbe {
  Vector x, y, u, v;
};

RandomProbe random_probe(std::mt19937_64& rng, int n) {
  return {oracle::random_in(rng, n, -0.5, 0.5), oracle::random_in(rng, n, -0.5, 0.5),
          oracle::random_unit(rng, n), oracle::random_unit(rng, n)};
}

ScanSampler small_sampler(int n, int grid, int dirs) {
  ScanSampler s;
  s.x_box = Box::cube(n, -0.5, 0.5);
  s.y_box = Box::cube(n, -0.5, 0.5);
  s.grid_points = grid;
  s.directions = dirs;
  return s;
}

}  // namespace

TEST_CASE("quartic 1-D curvature matches the closed form on every route") {
  const auto fam = quartic_family(1, FamilyBoxes::defaults(1));
  struct Case {
    double x, y, frozen;
  };
  for (const Case& c : {Case{0.1, 0.2, -0.6377348057170518}, Case{0.4, 0.45, 0.32394027869274733},
                        Case{0.0, 0.0, -6.0}}) {
    CAPTURE(c.x);
    const double exact = oracle::quartic_mtw_1d(c.x, c.y, 1, 1);
    CHECK(exact == doctest::Approx(c.frozen).epsilon(1e-12));
    const auto probe = make_probe(fam.pair, scalar(c.x), scalar(c.y), scalar(1), scalar(1));
    const double s = mtw_structured(fam.pair, probe).total;
    CHECK(std::abs(s - exact) <= bound(exact));
    CHECK(std::abs(mtw_crosscurv(fam.pair, probe) - exact) <= bound(exact));
    CHECK(std::abs(mtw_direct(fam.pair, probe) - exact) <= bound(exact));
  }
}

TEST_CASE("exact-zero families") {
  std::mt19937_64 rng(3);
  for (int n = 1; n <= 3; ++n) {
    for (const auto& fam : {quadratic_family(n, FamilyBoxes::defaults(n)),
                            bilinear_family(n, FamilyBoxes::defaults(n))}) {
      CAPTURE(fam.name);
      for (int k = 0; k < 10; ++k) {
        const auto r = random_probe(rng, n);
        const auto probe = make_probe(fam.pair, r.x, r.y, r.u, r.v);
        const auto st = mtw_structured(fam.pair, probe);
        CHECK(std::abs(st.total) <= 1e-8);
        CHECK(std::abs(st.A) <= 1e-8);
        CHECK(std::abs(st.B) <= 1e-8);
        CHECK(std::abs(mtw_crosscurv(fam.pair, probe)) <= 1e-8);
        CHECK(std::abs(mtw_direct(fam.pair, probe)) <= 1e-8);
      }
    }
  }
}

TEST_CASE("b-exp inverts the x-gradient of b") {
  std::mt19937_64 rng(8);
  for (int n = 1; n <= 3; ++n) {
    for (const auto& fam : shipped_families(n)) {
      CAPTURE(fam.name);
      for (int k = 0; k < 5; ++k) {
        const Vector x = oracle::random_in(rng, n, -0.5, 0.5);
        const Vector y = oracle::random_in(rng, n, -0.5, 0.5);
        const Vector cov = evaluate_surplus(fam.pair, x, y).b_x;
        const auto r = b_exp(fam.pair, x, cov, Vector::Zero(n));
        CHECK((r.y - y).norm() <= 1e-8);
        CHECK(r.residual <= 1e-10);
      }
    }
  }
}

TEST_CASE("property: b-segments meet the residual bound and are straight in z for sum forms") {
  std::mt19937_64 rng(21);
  for (int n = 1; n <= 3; ++n) {
    for (const auto& fam : shipped_families(n)) {
      if (!fam.sum_form) continue;
      CAPTURE(fam.name);
      for (int k = 0; k < 5; ++k) {
        const auto r = random_probe(rng, n);
        const auto probe = make_probe(fam.pair, r.x, r.y, r.u, r.v);
        const std::vector<double> ts = {-0.2, -0.1, 0.0, 0.1, 0.2};
        const auto seg = make_b_segment(fam.pair, r.x, r.y, probe.p, ts);
        for (size_t i = 0; i < ts.size(); ++i) {
          CHECK(seg.residuals[i] <= 1e-9);
          CHECK((seg.z[i] - (probe.q + ts[i] * probe.p)).norm() <= 1e-8);
        }
        CHECK(std::abs(mtw_structured(fam.pair, probe).A) <= 1e-9);
      }
    }
  }
}

TEST_CASE("b-segment defects are reported, not absorbed") {
  FamilyBoxes boxes = FamilyBoxes::defaults(1);
  boxes.y = Box::cube(1, -0.6, 0.6);
  const auto fam = quartic_family(1, boxes);
  const auto probe = make_probe(fam.pair, scalar(0.3), scalar(0.2), scalar(1), scalar(1));
  // t = 4 asks for a seller far outside [-0.6, 0.6].
  try {
    make_b_segment(fam.pair, probe.x, probe.y0, probe.p, {0.0, 1.0, 2.0, 4.0});
    FAIL("expected a defect");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::kSegmentDefect || e.code() == ErrorCode::kNoConvergence));
  }
}

TEST_CASE("property: curvature scales like |u|^2 |v|^2") {
  std::mt19937_64 rng(99);
  for (int n = 1; n <= 2; ++n) {
    const auto fam = quartic_family(n, FamilyBoxes::defaults(n));
    for (int k = 0; k < 6; ++k) {
      const auto r = random_probe(rng, n);
      const double a = 0.5 + k * 0.4, c = 2.5 - k * 0.3;
      const auto base = make_probe(fam.pair, r.x, r.y, r.u, r.v);
      const auto scaled = make_probe(fam.pair, r.x, r.y, a * r.u, c * r.v);
      const double f = a * a * c * c;
      const double s0 = mtw_structured(fam.pair, base).total;
      CHECK(mtw_structured(fam.pair, scaled).total == doctest::Approx(f * s0).epsilon(1e-6));
      CHECK(mtw_crosscurv(fam.pair, scaled) ==
            doctest::Approx(f * mtw_crosscurv(fam.pair, base)).epsilon(1e-6));
      CHECK(mtw_direct(fam.pair, scaled) ==
            doctest::Approx(f * mtw_direct(fam.pair, base)).epsilon(1e-6));
    }
  }
}

TEST_CASE("property: the second and fifth B terms are non-negative") {
  std::mt19937_64 rng(17);
  for (int n = 1; n <= 3; ++n) {
    for (const auto& fam : shipped_families(n)) {
      CAPTURE(fam.name);
      for (int k = 0; k < 15; ++k) {
        const auto r = random_probe(rng, n);
        const auto st = mtw_structured(fam.pair, make_probe(fam.pair, r.x, r.y, r.u, r.v));
        CHECK(st.b_terms[1] >= -1e-9);
        CHECK(st.b_terms[4] >= -1e-9);
        double sum = 0;
        for (double t : st.b_terms) sum += t;
        CHECK(sum == doctest::Approx(st.B).epsilon(1e-12));
        CHECK(st.total == doctest::Approx(st.A + st.B).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("route equivalence on the stress family") {
  std::mt19937_64 rng(44);
  for (int n = 1; n <= 3; ++n) {
    const auto fam = logconvex_family(n, FamilyBoxes::defaults(n));
    for (int k = 0; k < 8; ++k) {
      const auto r = random_probe(rng, n);
      const auto probe = make_probe(fam.pair, r.x, r.y, r.u, r.v);
      const double s = mtw_structured(fam.pair, probe).total;
      CHECK(std::abs(mtw_direct(fam.pair, probe) - s) <= bound(s));
      CHECK(std::abs(mtw_crosscurv(fam.pair, probe) - s) <= bound(s));
    }
  }
}

TEST_CASE("verdict thresholds") {
  const double sl = 1e-7;
  CHECK(curvature_verdict(Condition::kB3w, 0.0, sl, true) == Verdict::kPass);
  CHECK(curvature_verdict(Condition::kB3w, -0.5e-7, sl, true) == Verdict::kPass);
  CHECK(curvature_verdict(Condition::kB3w, -2e-7, sl, true) == Verdict::kFail);
  CHECK(curvature_verdict(Condition::kA3w, 1.0, sl, false) == Verdict::kInconclusive);
  CHECK(curvature_verdict(Condition::kA3w, -1.0, sl, false) == Verdict::kFail);
  CHECK(curvature_verdict(Condition::kB3s, 2e-7, sl, true) == Verdict::kPass);
  CHECK(curvature_verdict(Condition::kB3s, 0.0, sl, true) == Verdict::kInconclusive);
  CHECK(curvature_verdict(Condition::kA3s, -0.5e-7, sl, true) == Verdict::kInconclusive);
  CHECK(curvature_verdict(Condition::kA3s, -2e-7, sl, true) == Verdict::kFail);
  CHECK(curvature_verdict(Condition::kA3s, 1.0, sl, false) == Verdict::kInconclusive);
}

TEST_CASE("scan: exact-zero families pass the weak conditions") {
  for (int n = 2; n <= 3; ++n) {
    const auto bil = bilinear_family(n, FamilyBoxes::defaults(n));
    const auto a3 = scan_condition(bil.pair, Condition::kA3w, small_sampler(n, 2, 3), 1);
    CHECK(a3.report.verdict == Verdict::kPass);
    for (const auto& o : a3.probes) {
      CHECK(std::abs(o.normalized) <= 1e-8);
      CHECK(std::abs(o.probe.orth_residual) <= 1e-12);
      CHECK(o.probe.v.norm() == doctest::Approx(1.0));
    }
    const auto quad = quadratic_family(n, FamilyBoxes::defaults(n));
    const auto b3 = scan_condition(quad.pair, Condition::kB3w, small_sampler(n, 2, 3), 1);
    CHECK(b3.report.verdict == Verdict::kPass);
    CHECK(std::abs(b3.report.worst_value) <= 1e-8);
    CHECK(b3.report.witnesses.empty());
  }
}

TEST_CASE("scan: 1-D quartic verdicts follow the analytic sign") {
  const auto fam = quartic_family(1, FamilyBoxes::defaults(1));
  const auto out = scan_condition(fam.pair, Condition::kB3w, small_sampler(1, 9, 2), 7);
  REQUIRE(out.points.size() == 81);
  for (const auto& pt : out.points) {
    const double s = pt.x(0) + pt.y(0);
    CAPTURE(s);
    const double f = oracle::quartic_sign_factor(s);
    CHECK(pt.verdict == (f < 0 ? Verdict::kFail : Verdict::kPass));
  }
  CHECK(out.report.verdict == Verdict::kFail);
  REQUIRE_FALSE(out.report.witnesses.empty());
  const auto& w = out.report.witnesses.front();
  CHECK(std::abs(w.find_vector("x")->coeff(0) + w.find_vector("y")->coeff(0)) <= 1e-12);
  CHECK(w.value == doctest::Approx(-6.0).epsilon(1e-4));
  // A3 has no orthogonal directions in one dimension.
  const auto a3 = scan_condition(fam.pair, Condition::kA3w, small_sampler(1, 3, 2), 7);
  CHECK(a3.report.verdict == Verdict::kPass);
  CHECK(a3.probes.empty());
}

TEST_CASE("scan: orthogonal sampling and determinism across thread counts") {
  const auto fam = quartic_family(2, FamilyBoxes::defaults(2));
  auto sampler = small_sampler(2, 3, 4);
  sampler.spot_check_fraction = 0.5;
  const auto one = scan_condition(fam.pair, Condition::kA3w, sampler, 42, 1);
  const auto four = scan_condition(fam.pair, Condition::kA3w, sampler, 42, 4);
  REQUIRE(one.probes.size() == four.probes.size());
  for (size_t i = 0; i < one.probes.size(); ++i) {
    CHECK(one.probes[i].normalized == four.probes[i].normalized);
    CHECK(one.probes[i].probe.v == four.probes[i].probe.v);
    CHECK(std::abs(one.probes[i].probe.orth_residual) <= 1e-12);
  }
  CHECK(one.report.verdict == four.report.verdict);
  CHECK(one.spot_checks > 0);
  CHECK(one.spot_check_failures == 0);
  CHECK(one.spot_checks == four.spot_checks);
  CHECK(probe_seed(42, 0) != probe_seed(42, 1));
  CHECK(probe_seed(42, 5) == probe_seed(42, 5));
}

TEST_CASE("b-convexity premises") {
  const int n = 2;
  const auto fam = quadratic_family(n, FamilyBoxes::defaults(n));
  BConvexitySampler s{Box::cube(n, -0.5, 0.5), Box::cube(n, -0.5, 0.5), 3, 9};
  const auto pass = check_bconvexity_premises(fam.pair, s);
  CHECK(pass.verdict == Verdict::kPass);
  CHECK(pass.probes_total > 0);

  // Sellers restricted to [0, 0.1]^2: the affine h-segment z_t needs y = z_t - x.
  FamilyBoxes shrunk = FamilyBoxes::defaults(n);
  shrunk.y = Box::cube(n, 0.0, 0.1);
  const auto small = quadratic_family(n, shrunk);
  const auto fail = check_bconvexity_premises(small.pair, s);
  CHECK(fail.verdict == Verdict::kFail);
  REQUIRE_FALSE(fail.witnesses.empty());
  for (const auto& w : fail.witnesses) {
    const Vector* x = w.find_vector("x");
    const Vector* z = w.find_vector("z_t");
    REQUIRE(x != nullptr);
    REQUIRE(z != nullptr);
    // For H* = |z|^2/2 the seller for z_t is y = z_t - x; it must leave the box.
    const Vector y = *z - *x;
    CHECK_FALSE(small.pair.y_box.contains(y, -1e-9));
  }
}
