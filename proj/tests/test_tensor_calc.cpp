#include "doctest.h"
#include "oracles.hpp"

#include "hedonic/error.hpp"
#include "hedonic/tensor_calc.hpp"

#include <cmath>
#include <random>

using namespace hedonic;

namespace {

ScalarField plain(int n, ScalarField::Value f, double lo = -2.0, double hi = 2.0) {
  return ScalarField(Box::cube(n, lo, hi), std::move(f));
}

double partial(const ScalarField& f, const Vector& x, std::vector<int> idx, DiffScheme s,
               double step = 0.0) {
  return differentiate(f, x, DerivativeRequest{std::move(idx), s, step});
}

Vector vec(std::initializer_list<double> v) { return from_std(std::vector<double>(v)); }

// exp(a.x) + (b.x)^3 + c.x sin(d.x): smooth, with closed-form partials.
struct RandomField {
  Vector a, b, c, d;
  double value(const Vector& x) const {
    return std::exp(a.dot(x)) + std::pow(b.dot(x), 3) + c.dot(x) * std::sin(d.dot(x));
  }
  double second(const Vector& x, int i, int j) const {
    const double s = std::sin(d.dot(x)), co = std::cos(d.dot(x));
    return a(i) * a(j) * std::exp(a.dot(x)) + 6 * b(i) * b(j) * b.dot(x) +
           c(i) * d(j) * co + c(j) * d(i) * co - c.dot(x) * d(i) * d(j) * s;
  }
};

}  // namespace

TEST_CASE("differentiate reproduces polynomial partials") {
  const auto sq = plain(2, [](const Vector& x) { return x(0) * x(0); });
  CHECK(partial(sq, vec({0.3, -0.2}), {0, 0}, DiffScheme::kCentral, 1e-3) ==
        doctest::Approx(2.0).epsilon(1e-6));

  const auto bil = plain(2, [](const Vector& x) { return x(0) * x(1); });
  CHECK(partial(bil, vec({0.3, -0.2}), {0, 1}, DiffScheme::kCentral) ==
        doctest::Approx(1.0).epsilon(1e-8));

  const auto quart = plain(1, [](const Vector& x) { return std::pow(x(0), 4); });
  CHECK(std::abs(partial(quart, vec({0.7}), {0, 0, 0, 0}, DiffScheme::kCentral) - 24.0) <= 1e-3);
  CHECK(std::abs(partial(quart, vec({0.7}), {0, 0, 0, 0}, DiffScheme::kRichardson) - 24.0) <=
        1e-3);
}

TEST_CASE("gradient and hessian") {
  const auto half = plain(3, [](const Vector& x) { return 0.5 * x.squaredNorm(); });
  const Vector x = vec({0.4, -1.1, 0.25});
  CHECK((gradient(half, x) - x).norm() < 1e-8);
  CHECK((hessian(half, x) - Matrix::Identity(3, 3)).norm() < 1e-6);

  const auto bil = plain(2, [](const Vector& x) { return x(0) * x(1); }, -3, 3);
  CHECK((gradient(bil, vec({1, 2})) - vec({2, 1})).norm() < 1e-8);

  const auto ex = plain(2, [](const Vector& x) { return std::exp(x(0) + x(1)); });
  const Matrix H = hessian(ex, vec({0, 0}));
  const Matrix fd = oracle::jacobian(
      [&](const Vector& p) { return oracle::gradient([&](const Vector& q) { return ex(q); }, p, 1e-4); },
      vec({0, 0}), 1e-4);
  CHECK((H - Matrix::Ones(2, 2)).norm() < 1e-5);
  CHECK((H - fd).norm() < 1e-5);
  CHECK((H - H.transpose()).norm() == 0.0);
}

TEST_CASE("analytic callbacks take precedence") {
  int calls = 0;
  ScalarField f(Box::cube(1, -1, 1), [](const Vector& x) { return std::sin(x(0)); });
  f.with_gradient([&](const Vector& x) {
    ++calls;
    return Vector::Constant(1, std::cos(x(0)));
  });
  CHECK(f.has_gradient());
  CHECK_FALSE(f.has_hessian());
  CHECK(gradient(f, vec({0.2}))(0) == doctest::Approx(std::cos(0.2)));
  CHECK(calls == 1);
  CHECK(partial(f, vec({0.2}), {0, 0}, DiffScheme::kCentral) ==
        doctest::Approx(-std::sin(0.2)).epsilon(1e-6));
  CHECK_THROWS_AS(partial(f, vec({0.2}), {0, 0}, DiffScheme::kAnalytic), Error);
}

TEST_CASE("differentiate error paths") {
  const auto f = plain(1, [](const Vector& x) { return x(0) * x(0); }, -1.0, 1.0);
  const auto code_of = [&](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidArgument;
  };
  CHECK(code_of([&] { partial(f, vec({0.0}), {0, 0, 0, 0, 0}, DiffScheme::kCentral); }) ==
        ErrorCode::kOrderTooHigh);
  CHECK(code_of([&] { partial(f, vec({0.9999}), {0, 0}, DiffScheme::kCentral, 1e-2); }) ==
        ErrorCode::kNearBoundary);
  const auto bad = plain(1, [](const Vector& x) { return std::log(x(0)); });
  CHECK(code_of([&] { partial(bad, vec({0.0}), {0}, DiffScheme::kCentral, 1e-3); }) ==
        ErrorCode::kNonFinite);
}

TEST_CASE("default step balances the order") {
  const Vector x = vec({0.1});
  const double eps = std::numeric_limits<double>::epsilon();
  for (int k = 1; k <= 4; ++k) {
    CHECK(default_step(k, x) == doctest::Approx(std::pow(eps, 1.0 / (k + 2))));
  }
  CHECK(default_step(2, vec({10.0})) == doctest::Approx(10 * std::pow(eps, 0.25)));
}

TEST_CASE("property: mixed partials commute on random smooth fields") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 2;
    RandomField rf{oracle::random_in(rng, n, -0.5, 0.5), oracle::random_in(rng, n, -0.5, 0.5),
                   oracle::random_in(rng, n, -1, 1), oracle::random_in(rng, n, -1, 1)};
    ScalarField f(Box::cube(n, -2, 2), [rf](const Vector& x) { return rf.value(x); });
    f.with_partials(
        [rf](const Vector& x, std::span<const int> idx) {
          if (idx.size() != 2) throw Error(ErrorCode::kAnalyticUnavailable, "order");
          return rf.second(x, idx[0], idx[1]);
        },
        2);
    const Vector x = oracle::random_in(rng, n, -1, 1);
    const double ij_an = partial(f, x, {0, 1}, DiffScheme::kAnalytic);
    const double ji_an = partial(f, x, {1, 0}, DiffScheme::kAnalytic);
    CHECK(std::abs(ij_an - ji_an) <= 1e-8 * std::max(1.0, std::abs(ij_an)));
    const double ij_fd = partial(f, x, {0, 1}, DiffScheme::kCentral);
    const double ji_fd = partial(f, x, {1, 0}, DiffScheme::kCentral);
    CHECK(std::abs(ij_fd - ji_fd) <= 1e-4 * std::max(1.0, std::abs(ij_fd)));
    CHECK(std::abs(ij_fd - ij_an) <= 1e-4 * std::max(1.0, std::abs(ij_an)));
  }
}

TEST_CASE("property: Richardson beats plain central differences") {
  const auto f = plain(1, [](const Vector& x) { return std::exp(x(0)); });
  const Vector x = vec({0.3});
  const double exact = std::exp(0.3);
  for (double step : {1e-1, 5e-2, 2e-2}) {
    const double c = partial(f, x, {0, 0, 0, 0}, DiffScheme::kCentral, step);
    const double r = partial(f, x, {0, 0, 0, 0}, DiffScheme::kRichardson, step);
    CHECK(std::abs(r - exact) <= std::abs(c - exact));
  }
}

TEST_CASE("tensors are symmetric and match closed forms") {
  // f = x0^2 x1 x2 + x1^4: D^3 f[0,0,1] = 2 x2, D^4 f[1,1,1,1] = 24.
  const auto f = plain(3, [](const Vector& x) {
    return x(0) * x(0) * x(1) * x(2) + std::pow(x(1), 4);
  });
  const Vector x = vec({0.2, -0.4, 0.6});
  const auto t3 = third_tensor(f, x);
  const auto t4 = fourth_tensor(f, x);
  REQUIRE(t3.size() == 27);
  REQUIRE(t4.size() == 81);
  const auto at3 = [&](int i, int j, int k) { return t3[static_cast<size_t>(9 * i + 3 * j + k)]; };
  const auto at4 = [&](int i, int j, int k, int l) {
    return t4[static_cast<size_t>(27 * i + 9 * j + 3 * k + l)];
  };
  CHECK(at3(0, 0, 1) == doctest::Approx(1.2).epsilon(1e-4));
  CHECK(at3(1, 0, 0) == at3(0, 0, 1));
  CHECK(at3(0, 1, 2) == doctest::Approx(0.4).epsilon(1e-4));
  CHECK(std::abs(at4(1, 1, 1, 1) - 24.0) <= 1e-2);
  CHECK(std::abs(at4(0, 0, 1, 2) - 2.0) <= 1e-2);
  CHECK(at4(2, 1, 0, 0) == at4(0, 0, 1, 2));
}

TEST_CASE("legendre conjugate examples") {
  const auto half = plain(2, [](const Vector& z) { return 0.5 * z.squaredNorm(); }, -5, 5);
  auto r = legendre_conjugate(half, vec({1, 2}), vec({0, 0}));
  CHECK(r.value == doctest::Approx(2.5).epsilon(1e-12));
  CHECK((r.argmax - vec({1, 2})).norm() < 1e-10);

  const auto diag = plain(2, [](const Vector& z) { return z(0) * z(0) + 2 * z(1) * z(1); }, -5, 5);
  r = legendre_conjugate(diag, vec({2, 4}), vec({0, 0}));
  CHECK(r.value == doctest::Approx(3.0).epsilon(1e-10));
  CHECK((r.argmax - vec({1, 1})).norm() < 1e-8);

  ScalarField quartic(Box::cube(1, -3, 3),
                      [](const Vector& z) { return z(0) * z(0) / 2 + std::pow(z(0), 4) / 4; });
  quartic.with_gradient([](const Vector& z) {
    return Vector::Constant(1, z(0) + std::pow(z(0), 3));
  });
  quartic.with_hessian([](const Vector& z) {
    return Matrix::Constant(1, 1, 1 + 3 * z(0) * z(0));
  });
  r = legendre_conjugate(quartic, vec({1.5}), vec({0}));
  const auto [zg, vg] = oracle::grid_max_1d(
      [](double z) { return 1.5 * z - z * z / 2 - std::pow(z, 4) / 4; }, -3, 3, 600001);
  CHECK(r.argmax(0) == doctest::Approx(zg).epsilon(1e-7));
  CHECK(r.value == doctest::Approx(vg).epsilon(1e-10));
  CHECK(r.residual <= 1e-10);
  // Frozen: root of z + z^3 = 1.5.
  CHECK(r.argmax(0) == doctest::Approx(0.8612241));
}

TEST_CASE("property: Legendre involution and Fenchel-Young on quadratics") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    const int n = 1 + k % 3;
    Matrix L = Matrix::Random(n, n);
    const Matrix A = L * L.transpose() + Matrix::Identity(n, n);
    const Matrix Ainv = A.inverse();
    ScalarField f(Box::cube(n, -50, 50), [A](const Vector& z) { return 0.5 * z.dot(A * z); });
    f.with_gradient([A](const Vector& z) -> Vector { return A * z; });
    f.with_hessian([A](const Vector&) { return A; });
    ScalarField fstar(Box::cube(n, -50, 50), [&f, n](const Vector& p) {
      return legendre_conjugate(f, p, Vector::Zero(n)).value;
    });
    fstar.with_gradient([&f, n](const Vector& p) -> Vector {
      return legendre_conjugate(f, p, Vector::Zero(n)).argmax;
    });
    fstar.with_hessian([Ainv](const Vector&) { return Ainv; });

    const Vector z = oracle::random_in(rng, n, -2, 2);
    const auto twice = legendre_conjugate(fstar, z, Vector::Zero(n));
    CHECK(std::abs(twice.value - f(z)) <= 1e-8);

    const Vector p = oracle::random_in(rng, n, -2, 2);
    const auto r = legendre_conjugate(f, p, Vector::Zero(n));
    CHECK(std::abs(f(r.argmax) + r.value - p.dot(r.argmax)) <= 1e-8);
    CHECK(std::abs(r.value - 0.5 * p.dot(Ainv * p)) <= 1e-8);
  }
}
