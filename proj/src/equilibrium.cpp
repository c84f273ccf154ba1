#include "hedonic/equilibrium.hpp"

#include "hedonic/error.hpp"
#include "hedonic/mtw.hpp"
#include "hedonic/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace hedonic {

std::vector<Point> sample_box(const Box& box, size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Point> out(count, Point(box.dimension()));
  for (auto& p : out) {
    for (int i = 0; i < box.dimension(); ++i) p(i) = box[i].lo + (box[i].hi - box[i].lo) * unit(rng);
  }
  return out;
}

DiscreteMarket make_market(const PreferencePair& pp, std::vector<Point> buyers,
                           std::vector<Point> sellers, std::uint64_t seed, int threads) {
  if (buyers.size() != sellers.size() || buyers.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "market needs N >= 2 buyers and as many sellers");
  }
  DiscreteMarket m;
  m.buyers = std::move(buyers);
  m.sellers = std::move(sellers);
  m.seed = seed;
  const size_t n = m.buyers.size();
  m.surplus.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  parallel_for(n, threads, [&](size_t i) {
    Point warm = inner_maximize(pp, m.buyers[i], m.sellers[0]).z_star;
    for (size_t j = 0; j < n; ++j) {
      double b;
      try {
        b = surplus_value(pp, m.buyers[i], m.sellers[j], warm);
      } catch (const Error&) {
        // Fall back to the full lattice when the warm path breaks.
        const InnerMaximum im = inner_maximize(pp, m.buyers[i], m.sellers[j]);
        warm = im.z_star;
        b = im.value;
      }
      m.surplus(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = b;
    }
  });
  if (!m.surplus.allFinite()) throw Error(ErrorCode::kNonFinite, "surplus matrix");
  return m;
}

DiscreteMarket sample_market(const PreferencePair& pp, size_t count, const Box& buyer_box,
                             const Box& seller_box, std::uint64_t seed, int threads) {
  auto buyers = sample_box(buyer_box, count, seed);
  auto sellers = sample_box(seller_box, count, seed ^ 0x5EEDF00DULL);
  return make_market(pp, std::move(buyers), std::move(sellers), seed, threads);
}

Assignment solve_assignment(const Matrix& surplus) {
  const auto n = static_cast<size_t>(surplus.rows());
  if (surplus.cols() != surplus.rows() || n == 0) {
    throw Error(ErrorCode::kInvalidArgument, "assignment needs a non-empty square matrix");
  }
  if (!surplus.allFinite()) throw Error(ErrorCode::kNonFinite, "surplus matrix");
  // Minimizes the cost -b; 1-based arrays with a virtual column 0.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  auto cost = [&](size_t i, size_t j) {
    return -surplus(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1));
  };
  for (size_t i = 1; i <= n; ++i) {
    p[0] = i;
    size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const size_t i0 = p[j0];
      double delta = inf;
      size_t j1 = 0;
      for (size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment a;
  a.sigma.assign(n, -1);
  a.u.resize(static_cast<Eigen::Index>(n));
  a.v.resize(static_cast<Eigen::Index>(n));
  for (size_t j = 1; j <= n; ++j) a.sigma[p[j] - 1] = static_cast<int>(j - 1);
  for (size_t i = 0; i < n; ++i) {
    a.u(static_cast<Eigen::Index>(i)) = -u[i + 1];
    a.v(static_cast<Eigen::Index>(i)) = -v[i + 1];
    a.total += surplus(static_cast<Eigen::Index>(i), a.sigma[i]);
  }
  return a;
}

Assignment solve_assignment(const DiscreteMarket& market) { return solve_assignment(market.surplus); }

DualCertificate dual_certificate(const Matrix& surplus, const Assignment& a) {
  DualCertificate c;
  const Matrix slack = (a.u.replicate(1, surplus.cols()) +
                        a.v.transpose().replicate(surplus.rows(), 1)) - surplus;
  c.min_slack = slack.minCoeff();
  for (Eigen::Index i = 0; i < surplus.rows(); ++i) {
    c.max_matched_gap = std::max(c.max_matched_gap, std::abs(slack(i, a.sigma[static_cast<size_t>(i)])));
  }
  return c;
}

ScalarField quadratic_potential(const Box& box, double c) {
  ScalarField u(box, [c](const Vector& x) { return c * x.squaredNorm(); });
  u.with_gradient([c](const Vector& x) { return Vector(2.0 * c * x); });
  u.with_hessian([c](const Vector& x) {
    return Matrix(2.0 * c * Matrix::Identity(x.size(), x.size()));
  });
  return u;
}

namespace {

// F(x) = b-exp_x(Du(x)), trying the y-box centre first and the lattice after.
BExpResult solve_map(const PreferencePair& pp, const Point& x, const Vector& cov,
                     const std::optional<Point>& y_guess, const std::optional<Point>& z_guess) {
  std::vector<Point> guesses;
  if (y_guess) guesses.push_back(*y_guess);
  guesses.push_back(pp.y_box.center());
  for (const Point& g : lattice_starts(pp.y_box)) guesses.push_back(g);
  std::string last;
  for (size_t k = 0; k < guesses.size(); ++k) {
    try {
      return b_exp(pp, x, cov, guesses[k], k == 0 ? z_guess : std::nullopt);
    } catch (const Error& e) {
      last = e.what();
    }
  }
  throw Error(ErrorCode::kNoConvergence, "b-exp failed from every start: " + last);
}

}  // namespace

std::vector<SyntheticBuyer> synthetic_equilibrium(const PreferencePair& pp,
                                                  const ScalarField& potential,
                                                  const std::vector<Point>& buyers, int threads,
                                                  double psd_tolerance) {
  std::vector<SyntheticBuyer> out(buyers.size());
  parallel_for(buyers.size(), threads, [&](size_t i) {
    SyntheticBuyer& b = out[i];
    b.x = buyers[i];
    try {
      const BExpResult r = solve_map(pp, b.x, gradient(potential, b.x), std::nullopt, std::nullopt);
      const SurplusEvaluation ev = evaluate_surplus(pp, b.x, r.y, r.z);
      b.y = r.y;
      b.z = ev.z_star;
      b.P0 = symmetrized(hessian(potential, b.x) - ev.b_xx);
      const double lam = min_eigenvalue(b.P0);
      if (lam < -psd_tolerance) {
        std::ostringstream os;
        os << "P0 indefinite: min eigenvalue " << lam;
        b.reject_reason = os.str();
        return;
      }
      b.accepted = true;
    } catch (const Error& e) {
      b.reject_reason = e.what();
    }
  });
  return out;
}

ContractJacobian contract_jacobian(const PreferencePair& pp, const Point& x0, const Point& y0,
                                   const Matrix& P0) {
  const SurplusEvaluation ev = evaluate_surplus(pp, x0, y0);
  const Matrix& hxz = ev.h_xz;
  if (!(min_singular_value(hxz) > 1e-12)) {
    throw Error(ErrorCode::kSingularMatrix, "D^2_xz h singular at the contract");
  }
  const Matrix hxz_inv = hxz.inverse();
  const Matrix bracket = symmetrized(-ev.M.inverse() + hxz_inv * P0 * hxz_inv.transpose());
  ContractJacobian out;
  out.J_formula = bracket * hxz.transpose();
  out.min_sv = min_singular_value(out.J_formula);
  out.bracket_min_eig = min_eigenvalue(bracket);
  return out;
}

ContractJacobian contract_jacobian(const PreferencePair& pp, const ScalarField& potential,
                                   const Point& x0, const Point& y0, const Matrix& P0,
                                   double fd_step) {
  ContractJacobian out = contract_jacobian(pp, x0, y0, P0);
  const SurplusEvaluation ev0 = evaluate_surplus(pp, x0, y0);
  auto contract = [&](const Point& x) {
    const BExpResult r = solve_map(pp, x, gradient(potential, x), y0, ev0.z_star);
    return Vector(evaluate_surplus(pp, x, r.y, r.z).z_star);
  };
  const auto n = x0.size();
  out.J_fd.resize(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    std::array<Vector, 4> f;
    const std::array<double, 4> off = {-2.0, -1.0, 1.0, 2.0};
    for (size_t k = 0; k < 4; ++k) {
      Point x = x0;
      x(c) += off[k] * fd_step;
      f[k] = contract(x);
    }
    out.J_fd.col(c) = (8.0 * (f[2] - f[1]) - (f[3] - f[0])) / (12.0 * fd_step);
  }
  out.fd_relative_error = (out.J_formula - out.J_fd).norm() / std::max(out.J_formula.norm(), 1e-300);
  return out;
}

namespace {

std::vector<size_t> nearest(const std::vector<Point>& pts, size_t i, size_t k) {
  std::vector<std::pair<double, size_t>> d;
  d.reserve(pts.size());
  for (size_t j = 0; j < pts.size(); ++j) d.emplace_back((pts[j] - pts[i]).squaredNorm(), j);
  const size_t take = std::min(k + 1, d.size());
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(take), d.end());
  std::vector<size_t> out;
  for (size_t m = 0; m < take; ++m) out.push_back(d[m].second);
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

double contract_dimension(const std::vector<Point>& contracts, int k_neighbors, double rel_cut) {
  if (k_neighbors < 1) throw Error(ErrorCode::kInvalidArgument, "k_neighbors must be positive");
  const auto k = static_cast<size_t>(k_neighbors);
  if (contracts.size() < 10 * k) {
    throw Error(ErrorCode::kInvalidArgument, "need at least 10 k_neighbors contract points");
  }
  std::vector<double> counts;
  counts.reserve(contracts.size());
  for (size_t i = 0; i < contracts.size(); ++i) {
    const auto nb = nearest(contracts, i, k);
    Vector mean = Vector::Zero(contracts[i].size());
    for (size_t j : nb) mean += contracts[j];
    mean /= static_cast<double>(nb.size());
    Matrix cov = Matrix::Zero(mean.size(), mean.size());
    for (size_t j : nb) {
      const Vector d = contracts[j] - mean;
      cov += d * d.transpose();
    }
    cov /= static_cast<double>(nb.size());
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov, Eigen::EigenvaluesOnly);
    const Vector ev = es.eigenvalues();
    const double top = ev.maxCoeff();
    if (!(top > 0.0)) {
      std::ostringstream os;
      os << "neighbourhood of contract " << i << " collapses to a point";
      throw Error(ErrorCode::kDegenerateNeighbourhood, os.str());
    }
    counts.push_back(static_cast<double>((ev.array() > rel_cut * top).count()));
  }
  return median(std::move(counts));
}

DiscreteConsistency cross_validate_discrete(const PreferencePair& pp, const DiscreteMarket& market,
                                            const Assignment& assignment, int k_neighbors,
                                            double tolerance) {
  DiscreteConsistency out;
  const size_t n = market.buyers.size();
  const auto dim = market.buyers.empty() ? 0 : market.buyers[0].size();
  const size_t k = std::max<size_t>(static_cast<size_t>(std::max(k_neighbors, 1)),
                                    static_cast<size_t>(dim) + 1);
  for (size_t i = 0; i < n; ++i) {
    const auto nb = nearest(market.buyers, i, k);
    Matrix A(static_cast<Eigen::Index>(nb.size()), dim + 1);
    Vector rhs(static_cast<Eigen::Index>(nb.size()));
    for (size_t r = 0; r < nb.size(); ++r) {
      const auto row = static_cast<Eigen::Index>(r);
      A(row, 0) = 1.0;
      A.row(row).tail(dim) = (market.buyers[nb[r]] - market.buyers[i]).transpose();
      rhs(row) = assignment.u(static_cast<Eigen::Index>(nb[r]));
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(A);
    if (qr.rank() < dim + 1) continue;
    const Vector grad = qr.solve(rhs).tail(dim);
    Vector bx;
    try {
      bx = evaluate_surplus(pp, market.buyers[i],
                            market.sellers[static_cast<size_t>(assignment.sigma[i])]).b_x;
    } catch (const Error&) {
      continue;
    }
    const double err = (grad - bx).norm() / std::max(1.0, bx.norm());
    ++out.checked;
    if (err <= tolerance) ++out.passed;
    out.max_error = std::max(out.max_error, err);
  }
  out.pass_fraction = out.checked ? static_cast<double>(out.passed) / static_cast<double>(out.checked) : 0.0;
  return out;
}

}  // namespace hedonic
