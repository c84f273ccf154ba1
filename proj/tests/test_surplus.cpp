#include "doctest.h"
#include "oracles.hpp"

#include "hedonic/error.hpp"
#include "hedonic/families.hpp"
#include "hedonic/surplus.hpp"

#include <cmath>
#include <random>

using namespace hedonic;

namespace {

const ConditionReport& find(const std::vector<ConditionReport>& reps, Condition c,
                            const std::string& subject) {
  for (const auto& r : reps) {
    if (r.condition == c && r.subject == subject) return r;
  }
  FAIL("missing report " << subject);
  return reps.front();
}

StructureSampler sampler_for(const PreferencePair& pp, int grid = 3) {
  return {Box::cube(pp.n, -0.5, 0.5), Box::cube(pp.n, -0.5, 0.5), Box::cube(pp.n, -1, 1), grid};
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("bilinear surplus is x.y with z = x + y") {
  const auto fam = bilinear_family(2, FamilyBoxes::defaults(2));
  const Vector x = Vector::Map(std::vector<double>{0.3, -0.7}.data(), 2);
  const Vector y = Vector::Map(std::vector<double>{-0.2, 0.4}.data(), 2);
  const auto ev = evaluate_surplus(fam.pair, x, y);
  CHECK(ev.b_value == doctest::Approx(x.dot(y)).epsilon(1e-12));
  CHECK((ev.z_star - (x + y)).norm() < 1e-10);
  CHECK((ev.b_xy - Matrix::Identity(2, 2)).norm() < 1e-10);
  CHECK((ev.b_x - y).norm() < 1e-10);
  CHECK((ev.b_y - x).norm() < 1e-10);
  CHECK((ev.M + Matrix::Identity(2, 2)).norm() < 1e-10);
}

TEST_CASE("quartic surplus agrees with a grid-search maximizer") {
  const auto fam = quartic_family(1, FamilyBoxes::defaults(1));
  for (double s : {-0.9, -0.3, 0.0, 0.45, 1.2}) {
    const double x = 0.4 * s, y = 0.6 * s;
    const auto [zg, bg] = oracle::grid_max_1d(
        [&](double z) { return (x + y) * z - z * z / 2 - std::pow(z, 4) / 4; }, -6, 6, 120001);
    Point warm = Vector::Zero(1);
    const double b = surplus_value(fam.pair, Vector::Constant(1, x), Vector::Constant(1, y), warm);
    CHECK(b == doctest::Approx(bg).epsilon(1e-10));
    CHECK(warm(0) == doctest::Approx(zg).epsilon(1e-6));
    CHECK(b == doctest::Approx(oracle::quartic_H(x + y)).epsilon(1e-12));
  }
  // Frozen: H(1) for H* = z^2/2 + z^4/4.
  Point warm = Vector::Zero(1);
  CHECK(surplus_value(fam.pair, Vector::Constant(1, 0.5), Vector::Constant(1, 0.5), warm) ==
        doctest::Approx(0.39535304490182).epsilon(1e-12));
}

TEST_CASE("structure screen on simple pairs") {
  const FamilyBoxes boxes = FamilyBoxes::defaults(2);
  // h = x.z - |z|^2/2 and g = y.z: h_xz = g_yz = I.
  const auto fam = custom_family(2, boxes, "x1*z1 + x2*z2 - (z1^2 + z2^2)/2", "y1*z1 + y2*z2");
  const auto reps = check_structure(fam.pair, sampler_for(fam.pair));
  CHECK(find(reps, Condition::kA2, "h").verdict == Verdict::kPass);
  CHECK(find(reps, Condition::kA2, "g").verdict == Verdict::kPass);
  CHECK(find(reps, Condition::kA2, "b").verdict == Verdict::kPass);
  CHECK(find(reps, Condition::kA1, "h (x,z)-twist").verdict == Verdict::kPass);
  CHECK(find(reps, Condition::kA1, "g (y,z)-twist").verdict == Verdict::kPass);
  CHECK(find(reps, Condition::kA1, "g (z,y)-twist").verdict == Verdict::kPass);
  CHECK(find(reps, Condition::kA1, "b (x,y)-twist").verdict == Verdict::kPass);
  CHECK(find(reps, Condition::kA0, "h").verdict == Verdict::kPass);
  CHECK(find(reps, Condition::kA0, "g").verdict == Verdict::kPass);
}

TEST_CASE("structure screen flags degenerate and non-injective preferences") {
  const FamilyBoxes boxes = FamilyBoxes::defaults(1);
  // h_xz = 2x vanishes on the grid line x = 0; D_x h = z^2 folds z and -z.
  const auto fam = custom_family(1, boxes, "x^2*z + x*z^2 - z^2", "y*z - z^2/2");
  const auto reps = check_structure(fam.pair, sampler_for(fam.pair));
  const auto& nd = find(reps, Condition::kA2, "h");
  CHECK(nd.verdict == Verdict::kFail);
  REQUIRE_FALSE(nd.witnesses.empty());
  CHECK(std::abs(nd.witnesses[0].find_vector("z")->coeff(0)) <= 1e-12);
  const auto& tw = find(reps, Condition::kA1, "h (x,z)-twist");
  CHECK(tw.verdict == Verdict::kFail);
  CHECK_FALSE(tw.witnesses.empty());
}

TEST_CASE("inner maximization error paths") {
  FamilyBoxes small = FamilyBoxes::defaults(1);
  small.z = Box::cube(1, -0.2, 0.2);
  const auto fam = bilinear_family(1, small);
  CHECK(code_of([&] {
          evaluate_surplus(fam.pair, Vector::Constant(1, 0.5), Vector::Constant(1, 0.5));
        }) == ErrorCode::kBoundaryMaximizer);

  // Double well: z = +1 and z = -1 tie at x = y = 0.
  const auto well = custom_family(1, FamilyBoxes::defaults(1), "x*z - (z^2 - 1)^2", "y*z");
  CHECK(code_of([&] {
          evaluate_surplus(well.pair, Vector::Constant(1, 0.0), Vector::Constant(1, 0.0));
        }) == ErrorCode::kNonUniqueMaximizer);
  CHECK_NOTHROW(evaluate_surplus(well.pair, Vector::Constant(1, 0.3), Vector::Constant(1, 0.0)));
}

TEST_CASE("property: envelope identities against finite differences of b and z") {
  std::mt19937_64 rng(2024);
  for (int n = 1; n <= 3; ++n) {
    for (const auto& fam : shipped_families(n)) {
      CAPTURE(fam.name);
      CAPTURE(n);
      const PreferencePair& pp = fam.pair;
      const auto b = [&](const Vector& x, const Vector& y) {
        Point warm = evaluate_surplus(pp, x, y).z_star;
        return surplus_value(pp, x, y, warm);
      };
      const auto zmap_x = [&](const Vector& y) {
        return [&pp, y](const Vector& x) { return evaluate_surplus(pp, x, y).z_star; };
      };
      for (int k = 0; k < 50; ++k) {
        const Vector x = oracle::random_in(rng, n, -0.5, 0.5);
        const Vector y = oracle::random_in(rng, n, -0.5, 0.5);
        const auto ev = evaluate_surplus(pp, x, y);
        CHECK(ev.stationarity <= 1e-9);
        CHECK(max_eigenvalue(symmetrized(ev.M)) < -1e-10);

        const Vector bx = oracle::gradient([&](const Vector& a) { return b(a, y); }, x);
        const Vector by = oracle::gradient([&](const Vector& a) { return b(x, a); }, y);
        CHECK(oracle::rel_err(ev.b_x, bx) <= 1e-5);
        CHECK(oracle::rel_err(ev.b_y, by) <= 1e-5);
        CHECK(oracle::rel_err(ev.b_xy, oracle::mixed(b, x, y)) <= 1e-4);
        CHECK(oracle::rel_err(ev.z_x, oracle::jacobian(zmap_x(y), x)) <= 1e-4);
        const auto zmap_y = [&](const Vector& a) { return evaluate_surplus(pp, x, a).z_star; };
        CHECK(oracle::rel_err(ev.z_y, oracle::jacobian(zmap_y, y)) <= 1e-4);
        const Matrix bxx = oracle::jacobian(
            [&](const Vector& a) { return evaluate_surplus(pp, a, y).b_x; }, x);
        CHECK(oracle::rel_err(ev.b_xx, bxx) <= 1e-4);
      }
    }
  }
}

TEST_CASE("property: non-degeneracy of h and g is inherited by b") {
  for (int n = 1; n <= 2; ++n) {
    for (const auto& fam : shipped_families(n)) {
      CAPTURE(fam.name);
      const auto reps = check_structure(fam.pair, sampler_for(fam.pair));
      if (find(reps, Condition::kA2, "h").verdict == Verdict::kPass &&
          find(reps, Condition::kA2, "g").verdict == Verdict::kPass) {
        CHECK(find(reps, Condition::kA2, "b").verdict == Verdict::kPass);
      }
      for (const auto& r : reps) {
        CAPTURE(r.subject);
        CHECK(r.verdict == Verdict::kPass);
      }
    }
  }
}

TEST_CASE("grid points include the faces") {
  const auto pts = grid_points(Box::cube(2, -1, 1), 3);
  REQUIRE(pts.size() == 9);
  CHECK(pts.front()(0) == -1.0);
  CHECK(pts.back()(1) == 1.0);
  CHECK(lattice_starts(Box::cube(2, -3, 3)).size() == 9);
  const auto starts = lattice_starts(Box::cube(1, -3, 3));
  REQUIRE(starts.size() == 3);
  CHECK(starts[0](0) == 0.0);
  CHECK(starts[1](0) == -2.0);
  CHECK(starts[2](0) == 2.0);
}
