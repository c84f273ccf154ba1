#include "hedonic/commands.hpp"

#include "hedonic/equilibrium.hpp"
#include "hedonic/parallel.hpp"
#include "hedonic/sum_form.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#ifndef HEDONIC_VERSION
#define HEDONIC_VERSION "0.0.0"
#endif

namespace hedonic {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

bool is_curvature(Condition c) {
  return c == Condition::kA3w || c == Condition::kA3s || c == Condition::kB3w ||
         c == Condition::kB3s;
}

Record witness_record(const Witness& w) {
  Record vectors;
  for (const auto& [name, v] : w.vectors) vectors.add(name, v);
  Record scalars;
  for (const auto& [name, s] : w.scalars) scalars.add(name, s);
  Record r;
  r.add("value", w.value).add("note", w.note).add("vectors", vectors).add("scalars", scalars);
  return r;
}

Record condition_record(const ConditionReport& rep) {
  std::vector<Record> witnesses;
  for (const auto& w : rep.witnesses) witnesses.push_back(witness_record(w));
  Record r;
  r.add("condition", std::string(to_string(rep.condition)))
      .add("subject", rep.subject)
      .add("verdict", std::string(to_string(rep.verdict)))
      .add("probes_total", rep.probes_total)
      .add("probes_rejected", rep.probes_rejected)
      .add("worst_value", rep.worst_value)
      .add("witness_count", rep.witnesses.size())
      .add("witnesses", witnesses);
  return r;
}

std::string slug(std::string s) {
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
  }
  return s;
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector json_vector(const json& a) {
  Vector v(static_cast<Eigen::Index>(a.size()));
  for (size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  return v;
}

void write_witness_file(const std::filesystem::path& path, const RunConfig& cfg,
                        const ConditionReport& rep, const Witness& w) {
  json j;
  j["condition"] = std::string(to_string(rep.condition));
  j["subject"] = rep.subject;
  j["value"] = std::isfinite(w.value) ? json(w.value) : json(nullptr);
  j["note"] = w.note;
  j["vectors"] = json::object();
  for (const auto& [name, v] : w.vectors) j["vectors"][name] = vector_json(v);
  j["scalars"] = json::object();
  for (const auto& [name, s] : w.scalars) j["scalars"][name] = s;
  j["seed"] = cfg.seed;
  j["config"] = cfg.source_text;
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << j.dump(2) << '\n';
}

struct Meta {
  Meta(std::string name, const RunConfig* config) : command(std::move(name)), cfg(config) {}

  std::string command;
  const RunConfig* cfg = nullptr;
  Clock::time_point start = Clock::now();
  std::vector<std::string> files;
};

void write_meta(const std::filesystem::path& dir, const Meta& m, int exit_code) {
  json j;
  j["command"] = m.command;
  j["version"] = HEDONIC_VERSION;
  j["config_hash"] = config_hash(m.cfg->source_text);
  j["seed"] = m.cfg->seed;
  j["threads"] = m.cfg->threads;
  j["exit_code"] = exit_code;
  j["elapsed_seconds"] = std::chrono::duration<double>(Clock::now() - m.start).count();
  j["files"] = m.files;
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "meta.json", std::ios::binary | std::ios::trunc);
  out << j.dump(2) << '\n';
}

int exit_for(const std::vector<Verdict>& verdicts) {
  if (std::find(verdicts.begin(), verdicts.end(), Verdict::kFail) != verdicts.end()) return kExitFail;
  if (std::find(verdicts.begin(), verdicts.end(), Verdict::kInconclusive) != verdicts.end()) {
    return kExitInconclusive;
  }
  return kExitPass;
}

Vector random_unit(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  do {
    for (int i = 0; i < dim; ++i) v(i) = normal(rng);
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

Point random_point(std::mt19937_64& rng, const Box& box) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Point p(box.dimension());
  for (int i = 0; i < box.dimension(); ++i) p(i) = box[i].lo + (box[i].hi - box[i].lo) * unit(rng);
  return p;
}

}  // namespace

double normalized_probe_value(const PreferencePair& pp, const Point& x, const Point& y,
                              const Vector& u, const Vector& v, const MtwOptions& opts) {
  const MtwProbe probe = make_probe(pp, x, y, u, v);
  return mtw_structured(pp, probe, opts).total / (u.squaredNorm() * v.squaredNorm());
}

// ---------------------------------------------------------------------------
// check

int cmd_check(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log) {
  Meta meta{"check", &cfg};
  const Family fam = build_family(cfg);
  const PreferencePair& pp = fam.pair;

  std::vector<ConditionReport> reports;
  std::vector<Record> point_rows;

  const bool want_structure =
      std::any_of(cfg.conditions.begin(), cfg.conditions.end(), [](Condition c) {
        return c == Condition::kA0 || c == Condition::kA1 || c == Condition::kA2;
      });
  if (want_structure) {
    const StructureSampler sampler{cfg.sample_x, cfg.sample_y, cfg.sample_z,
                                   cfg.structure_grid_points};
    for (auto& rep : check_structure(pp, sampler)) {
      if (std::find(cfg.conditions.begin(), cfg.conditions.end(), rep.condition) !=
          cfg.conditions.end()) {
        reports.push_back(std::move(rep));
      }
    }
  }
  for (Condition c : cfg.conditions) {
    if (is_curvature(c)) {
      ScanSampler sampler;
      sampler.x_box = cfg.sample_x;
      sampler.y_box = cfg.sample_y;
      sampler.grid_points = cfg.grid_points;
      sampler.directions = cfg.directions;
      sampler.slack = cfg.slack;
      sampler.spot_check_fraction = cfg.spot_check_fraction;
      ScanOutcome scan = scan_condition(pp, c, sampler, cfg.seed, cfg.threads, cfg.mtw);
      for (const auto& pt : scan.points) {
        Record r;
        r.add("condition", std::string(to_string(c)))
            .add("x", pt.x)
            .add("y", pt.y)
            .add("probes", pt.probes)
            .add("rejected", pt.rejected)
            .add("min_value", pt.min_value)
            .add("verdict", std::string(to_string(pt.verdict)));
        point_rows.push_back(std::move(r));
      }
      log << to_string(c) << ": spot checks " << scan.spot_checks << ", disagreements "
          << scan.spot_check_failures << '\n';
      reports.push_back(std::move(scan.report));
    } else if (c == Condition::kBConvexity) {
      BConvexitySampler sampler;
      sampler.x_box = cfg.sample_x;
      sampler.y_box = cfg.bconvexity_y_box ? *cfg.bconvexity_y_box : cfg.sample_y;
      sampler.grid_points = cfg.bconvexity_grid_points;
      sampler.t_nodes = cfg.bconvexity_t_nodes;
      reports.push_back(check_bconvexity_premises(pp, sampler));
    }
  }

  std::vector<Record> rows;
  std::vector<Verdict> verdicts;
  for (const auto& rep : reports) {
    rows.push_back(condition_record(rep));
    verdicts.push_back(rep.verdict);
    log << to_string(rep.condition) << " [" << rep.subject << "] " << to_string(rep.verdict)
        << "  probes " << rep.probes_total << ", rejected " << rep.probes_rejected
        << ", worst " << format_double(rep.worst_value) << '\n';
    if (rep.verdict != Verdict::kFail) continue;
    for (size_t k = 0; k < rep.witnesses.size(); ++k) {
      const auto name = slug(std::string(to_string(rep.condition)) + "-" + rep.subject) + "-" +
                        std::to_string(k) + ".json";
      const auto path = opts.out_dir / "witnesses" / name;
      write_witness_file(path, cfg, rep, rep.witnesses[k]);
      meta.files.push_back(("witnesses" / std::filesystem::path(name)).string());
    }
  }
  meta.files.push_back(write_report(opts.out_dir, "conditions", opts.format, rows).filename().string());
  meta.files.push_back(write_report(opts.out_dir, "points", opts.format, point_rows).filename().string());
  const int code = exit_for(verdicts);
  write_meta(opts.out_dir, meta, code);
  return code;
}

// ---------------------------------------------------------------------------
// mtw-scan

int cmd_mtw_scan(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log) {
  Meta meta{"mtw-scan", &cfg};
  const Family fam = build_family(cfg);
  const PreferencePair& pp = fam.pair;
  const int n = cfg.dimension;
  const size_t count = cfg.scan_probes;

  struct Row {
    MtwProbe probe;
    StructuredMtw structured;
    std::optional<SumFormProbeResult> sum_form;
    double direct = NAN;
    double crosscurv = NAN;
    std::string error;
  };
  std::vector<Row> rows(count);
  parallel_for(count, cfg.threads, [&](size_t k) {
    Row& row = rows[k];
    std::mt19937_64 rng(probe_seed(cfg.seed, k));
    const Point x = random_point(rng, cfg.sample_x);
    const Point y = random_point(rng, cfg.sample_y);
    const Vector u = random_unit(rng, n);
    Vector v = random_unit(rng, n);
    try {
      row.probe = make_probe(pp, x, y, u, v);
      if (cfg.scan_orthogonal && n > 1) {
        // Project v onto the complement of b_xy u.
        const Vector a = row.probe.p.normalized();
        v = (v - a * a.dot(v)).normalized();
        row.probe = make_probe(pp, x, y, u, v);
      }
      row.structured = mtw_structured(pp, row.probe, cfg.mtw);
      row.direct = mtw_direct(pp, row.probe, cfg.mtw);
      row.crosscurv = mtw_crosscurv(pp, row.probe, cfg.mtw);
      if (fam.sum_form) row.sum_form = mtw_sum_form(*fam.sum_form, x, y, u, v);
    } catch (const Error& e) {
      row.probe.x = x;
      row.probe.y0 = y;
      row.probe.u = u;
      row.probe.v = v;
      row.error = e.what();
    }
  });

  std::vector<Record> out;
  double max_abs = 0.0;
  double max_ratio = 0.0;
  size_t rejected = 0;
  for (size_t k = 0; k < count; ++k) {
    const Row& row = rows[k];
    Record r;
    r.add("index", k).add("x", row.probe.x).add("y", row.probe.y0).add("u", row.probe.u).add(
        "v", row.probe.v);
    if (!row.error.empty()) {
      ++rejected;
      r.add("rejected", true).add("reason", row.error);
      out.push_back(std::move(r));
      continue;
    }
    const double s = row.structured.total;
    const double bound = std::max(1e-3 * std::abs(s), 1e-5);
    double abs_disc = std::max(std::abs(row.direct - s), std::abs(row.crosscurv - s));
    if (row.sum_form) abs_disc = std::max(abs_disc, std::abs(row.sum_form->total - s));
    const double ratio = abs_disc / bound;
    max_abs = std::max(max_abs, abs_disc);
    max_ratio = std::max(max_ratio, ratio);
    r.add("rejected", false)
        .add("reason", "")
        .add("p", row.probe.p)
        .add("q", row.probe.q)
        .add("orth_residual", row.probe.orth_residual)
        .add("direct", row.direct)
        .add("crosscurv", row.crosscurv)
        .add("structured", s);
    if (row.sum_form) r.add("sum_form", row.sum_form->total);
    else r.add_null("sum_form");
    r.add("A", row.structured.A).add("B", row.structured.B);
    for (size_t t = 0; t < 5; ++t) r.add("b_term" + std::to_string(t + 1), row.structured.b_terms[t]);
    if (row.sum_form) {
      r.add("term1", row.sum_form->term1).add("term2", row.sum_form->term2);
      r.add("sum_form_discrepancy", std::abs(row.sum_form->total - s));
    } else {
      r.add_null("term1").add_null("term2").add_null("sum_form_discrepancy");
    }
    r.add("max_abs_discrepancy", abs_disc).add("discrepancy_ratio", ratio);
    out.push_back(std::move(r));
  }
  meta.files.push_back(write_report(opts.out_dir, "probes", opts.format, out).filename().string());
  log << "probes " << count << ", rejected " << rejected << ", max route discrepancy "
      << format_double(max_abs) << " (" << format_double(max_ratio) << " of bound)\n";
  int code = kExitPass;
  if (max_ratio > 1.0) code = kExitFail;
  else if (rejected > 0) code = kExitInconclusive;
  write_meta(opts.out_dir, meta, code);
  return code;
}

// ---------------------------------------------------------------------------
// equilibrium

int cmd_equilibrium(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log) {
  Meta meta{"equilibrium", &cfg};
  const Family fam = build_family(cfg);
  const PreferencePair& pp = fam.pair;
  const EquilibriumConfig& q = cfg.equilibrium;
  const int n = cfg.dimension;
  const Box buyer_box = q.buyer_box ? *q.buyer_box : cfg.sample_x;
  const Box seller_box = q.seller_box ? *q.seller_box : cfg.sample_y;
  const int k_neighbors = q.k_neighbors > 0 ? q.k_neighbors : 4 * n;

  // Synthetic equilibrium and contract Jacobians.
  const ScalarField potential = quadratic_potential(pp.x_box, q.potential_c);
  const auto buyers = sample_box(buyer_box, q.buyers, cfg.seed);
  const auto eq = synthetic_equilibrium(pp, potential, buyers, cfg.threads, q.psd_tolerance);
  std::vector<std::optional<ContractJacobian>> jac(eq.size());
  std::vector<std::string> jac_error(eq.size());
  parallel_for(eq.size(), cfg.threads, [&](size_t i) {
    if (!eq[i].accepted) return;
    try {
      jac[i] = contract_jacobian(pp, potential, eq[i].x, eq[i].y, eq[i].P0, q.fd_step);
    } catch (const Error& e) {
      jac_error[i] = e.what();
    }
  });

  std::vector<Record> buyer_rows;
  size_t accepted = 0;
  double min_sv = std::numeric_limits<double>::infinity();
  double max_fd = 0.0;
  double min_bracket = std::numeric_limits<double>::infinity();
  std::vector<double> log_sv;
  for (size_t i = 0; i < eq.size(); ++i) {
    const SyntheticBuyer& b = eq[i];
    Record r;
    r.add("index", i).add("x", b.x);
    const bool ok = b.accepted && jac[i].has_value();
    r.add("accepted", ok);
    if (!ok) {
      r.add("reason", b.accepted ? jac_error[i] : b.reject_reason);
      buyer_rows.push_back(std::move(r));
      continue;
    }
    ++accepted;
    const ContractJacobian& J = *jac[i];
    min_sv = std::min(min_sv, J.min_sv);
    max_fd = std::max(max_fd, J.fd_relative_error);
    min_bracket = std::min(min_bracket, J.bracket_min_eig);
    log_sv.push_back(std::log10(J.min_sv));
    r.add("reason", "")
        .add("y", b.y)
        .add("z", b.z)
        .add("P0_min_eig", min_eigenvalue(b.P0))
        .add("min_sv", J.min_sv)
        .add("bracket_min_eig", J.bracket_min_eig)
        .add("fd_relative_error", J.fd_relative_error);
    buyer_rows.push_back(std::move(r));
  }

  // Histogram of log10 min singular values, ten equal bins.
  std::vector<Record> hist_rows;
  if (!log_sv.empty()) {
    const double lo = *std::min_element(log_sv.begin(), log_sv.end());
    const double hi = *std::max_element(log_sv.begin(), log_sv.end());
    const int bins = hi > lo ? 10 : 1;
    const double width = hi > lo ? (hi - lo) / bins : 1.0;
    std::vector<size_t> counts(static_cast<size_t>(bins), 0);
    for (double v : log_sv) {
      const int b = std::min(bins - 1, static_cast<int>((v - lo) / width));
      ++counts[static_cast<size_t>(b)];
    }
    for (int b = 0; b < bins; ++b) {
      Record r;
      r.add("bin", b)
          .add("log10_min_sv_lo", lo + b * width)
          .add("log10_min_sv_hi", lo + (b + 1) * width)
          .add("count", counts[static_cast<size_t>(b)]);
      hist_rows.push_back(std::move(r));
    }
  }

  // Dimension of the signed-contract distribution.
  const auto dim_buyers = sample_box(buyer_box, q.dimension_buyers, cfg.seed + 1);
  const auto dim_eq = synthetic_equilibrium(pp, potential, dim_buyers, cfg.threads, q.psd_tolerance);
  std::vector<Point> contracts;
  for (const auto& b : dim_eq) {
    if (b.accepted) contracts.push_back(b.z);
  }
  double dim_estimate = NAN;
  std::string dim_error;
  try {
    dim_estimate = contract_dimension(contracts, k_neighbors);
  } catch (const Error& e) {
    dim_error = e.what();
  }

  // Discrete market.
  const DiscreteMarket market =
      sample_market(pp, q.market_size, buyer_box, seller_box, cfg.seed + 2, cfg.threads);
  const Assignment assignment = solve_assignment(market);
  const DualCertificate cert = dual_certificate(market.surplus, assignment);
  const DiscreteConsistency consistency =
      cross_validate_discrete(pp, market, assignment, k_neighbors, q.consistency_tolerance);
  std::vector<Record> match_rows;
  for (size_t i = 0; i < market.buyers.size(); ++i) {
    const auto j = static_cast<size_t>(assignment.sigma[i]);
    Record r;
    r.add("buyer", i)
        .add("seller", j)
        .add("x", market.buyers[i])
        .add("y", market.sellers[j])
        .add("surplus", market.surplus(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))
        .add("u", assignment.u(static_cast<Eigen::Index>(i)))
        .add("v", assignment.v(static_cast<Eigen::Index>(j)));
    match_rows.push_back(std::move(r));
  }

  const bool rank_ok = accepted == 0 || min_sv > 1e-8;
  const bool fd_ok = max_fd <= 1e-3;
  const bool dim_ok = dim_error.empty() && dim_estimate == static_cast<double>(n);
  const bool dual_ok = cert.holds(1e-8);

  Record summary;
  summary.add("family", cfg.family)
      .add("dimension", n)
      .add("buyers", eq.size())
      .add("accepted", accepted)
      .add("rejected", eq.size() - accepted)
      .add("min_singular_value", accepted ? min_sv : NAN)
      .add("max_fd_relative_error", max_fd)
      .add("min_bracket_eigenvalue", accepted ? min_bracket : NAN)
      .add("dimension_samples", contracts.size())
      .add("k_neighbors", k_neighbors)
      .add("dim_estimate", dim_estimate)
      .add("dim_error", dim_error)
      .add("market_size", market.buyers.size())
      .add("total_surplus", assignment.total)
      .add("dual_min_slack", cert.min_slack)
      .add("dual_max_matched_gap", cert.max_matched_gap)
      .add("consistency_checked", consistency.checked)
      .add("consistency_pass_fraction", consistency.pass_fraction)
      .add("consistency_max_error", consistency.max_error)
      .add("rank_ok", rank_ok)
      .add("fd_ok", fd_ok)
      .add("dimension_ok", dim_ok)
      .add("dual_ok", dual_ok);

  meta.files.push_back(write_report(opts.out_dir, "summary", opts.format, {summary}).filename().string());
  meta.files.push_back(write_report(opts.out_dir, "buyers", opts.format, buyer_rows).filename().string());
  meta.files.push_back(write_report(opts.out_dir, "histogram", opts.format, hist_rows).filename().string());
  meta.files.push_back(write_report(opts.out_dir, "matching", opts.format, match_rows).filename().string());

  log << "accepted " << accepted << "/" << eq.size() << ", min sv " << format_double(min_sv)
      << ", max fd error " << format_double(max_fd) << ", dimension "
      << format_double(dim_estimate) << ", dual slack " << format_double(cert.min_slack)
      << ", matched gap " << format_double(cert.max_matched_gap) << ", consistency "
      << format_double(consistency.pass_fraction) << '\n';

  int code = kExitPass;
  if (!rank_ok || !fd_ok || !dim_ok || !dual_ok) code = kExitFail;
  else if (accepted < eq.size()) code = kExitInconclusive;
  write_meta(opts.out_dir, meta, code);
  return code;
}

// ---------------------------------------------------------------------------
// replay-witness

namespace {

double replay_twist(const PreferencePair& pp, const std::string& subject,
                    const std::vector<std::pair<std::string, Vector>>& vecs) {
  auto get = [&](const std::string& name) -> const Vector& {
    for (const auto& [k, v] : vecs) {
      if (k == name) return v;
    }
    throw Error(ErrorCode::kInvalidArgument, "witness lacks vector '" + name + "'");
  };
  if (subject == "h (x,z)-twist") {
    return (joint_derivatives(pp.h, get("x"), get("z_0")).grad_a -
            joint_derivatives(pp.h, get("x"), get("z_1")).grad_a).norm();
  }
  if (subject == "h (z,x)-twist") {
    return (joint_derivatives(pp.h, get("x_0"), get("z")).grad_z -
            joint_derivatives(pp.h, get("x_1"), get("z")).grad_z).norm();
  }
  if (subject == "g (y,z)-twist") {
    return (joint_derivatives(pp.g, get("y"), get("z_0")).grad_a -
            joint_derivatives(pp.g, get("y"), get("z_1")).grad_a).norm();
  }
  if (subject == "g (z,y)-twist") {
    return (joint_derivatives(pp.g, get("y_0"), get("z")).grad_z -
            joint_derivatives(pp.g, get("y_1"), get("z")).grad_z).norm();
  }
  if (subject == "b (x,y)-twist") {
    return (evaluate_surplus(pp, get("x"), get("y_0")).b_x -
            evaluate_surplus(pp, get("x"), get("y_1")).b_x).norm();
  }
  if (subject == "b (y,x)-twist") {
    return (evaluate_surplus(pp, get("x_0"), get("y")).b_y -
            evaluate_surplus(pp, get("x_1"), get("y")).b_y).norm();
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown twist subject '" + subject + "'");
}

}  // namespace

int cmd_replay_witness(const CommandOptions& opts, std::ostream& log) {
  if (opts.witness_path.empty()) throw ConfigError("replay-witness needs --witness <file>");
  std::ifstream in(opts.witness_path, std::ios::binary);
  if (!in) throw ConfigError("cannot read witness file '" + opts.witness_path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("witness file '" + opts.witness_path + "': " + e.what());
  }
  RunConfig cfg;
  try {
    cfg = opts.config_path.empty() ? parse_config(j.at("config").get<std::string>())
                                   : load_config(opts.config_path);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("witness file lacks its configuration: ") + e.what());
  }
  if (opts.threads) cfg.threads = *opts.threads;
  Meta meta{"replay-witness", &cfg};
  const Family fam = build_family(cfg);
  const PreferencePair& pp = fam.pair;

  std::string cond_name;
  std::string subject;
  std::vector<std::pair<std::string, Vector>> vecs;
  std::vector<std::pair<std::string, double>> scalars;
  double stored = NAN;
  try {
    cond_name = j.at("condition").get<std::string>();
    subject = j.at("subject").get<std::string>();
    if (!j.at("value").is_null()) stored = j.at("value").get<double>();
    for (const auto& [k, v] : j.at("vectors").items()) vecs.emplace_back(k, json_vector(v));
    for (const auto& [k, v] : j.at("scalars").items()) scalars.emplace_back(k, v.get<double>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed witness: ") + e.what());
  }
  const auto cond = parse_condition(cond_name);
  if (!cond) throw ConfigError("unknown condition '" + cond_name + "' in witness");
  Witness w;
  w.vectors = vecs;
  auto need = [&](const char* name) -> const Vector& {
    const Vector* v = w.find_vector(name);
    if (!v) throw ConfigError(std::string("witness lacks vector '") + name + "'");
    return *v;
  };
  auto scalar = [&](const char* name) {
    for (const auto& [k, v] : scalars) {
      if (k == name) return v;
    }
    throw ConfigError(std::string("witness lacks scalar '") + name + "'");
  };

  double value = NAN;
  if (is_curvature(*cond)) {
    value = normalized_probe_value(pp, need("x"), need("y"), need("u"), need("v"), cfg.mtw);
  } else if (*cond == Condition::kA2) {
    if (subject == "h") value = std::abs(joint_derivatives(pp.h, need("x"), need("z")).az.determinant());
    else if (subject == "g") value = std::abs(joint_derivatives(pp.g, need("y"), need("z")).az.determinant());
    else value = std::abs(evaluate_surplus(pp, need("x"), need("y")).b_xy.determinant());
  } else if (*cond == Condition::kA1) {
    value = replay_twist(pp, subject, vecs);
  } else if (*cond == Condition::kBConvexity) {
    const Vector& ya = need("y_a");
    const Vector& yb = need("y_b");
    std::vector<Interval> sides;
    for (Eigen::Index i = 0; i < ya.size(); ++i) {
      sides.push_back({std::min(ya(i), yb(i)), std::max(ya(i), yb(i))});
    }
    const double t = scalar("t");
    const auto found = bconvexity_segment_failures(pp, Box(std::move(sides)), need("x"), ya, yb,
                                                   static_cast<int>(scalar("t_nodes")));
    for (const auto& f : found) {
      if (f.scalars.front().second == t) value = f.value;
    }
  } else {
    throw ConfigError("witnesses of " + cond_name + " cannot be replayed");
  }

  const bool both_nan = std::isnan(value) && std::isnan(stored);
  const double diff = std::abs(value - stored);
  const bool reproduced = both_nan || diff <= 1e-10;
  Record r;
  r.add("condition", cond_name)
      .add("subject", subject)
      .add("stored_value", stored)
      .add("replayed_value", value)
      .add("difference", both_nan ? 0.0 : diff)
      .add("reproduced", reproduced);
  meta.files.push_back(write_report(opts.out_dir, "replay", opts.format, {r}).filename().string());
  log << cond_name << " [" << subject << "] stored " << format_double(stored) << ", replayed "
      << format_double(value) << (reproduced ? " (reproduced)" : " (MISMATCH)") << '\n';
  const int code = reproduced ? kExitPass : kExitFail;
  write_meta(opts.out_dir, meta, code);
  return code;
}

// ---------------------------------------------------------------------------

int run_command(const std::string& command, const CommandOptions& opts, std::ostream& log,
                std::ostream& err) {
  try {
    if (command == "replay-witness") return cmd_replay_witness(opts, log);
    if (opts.config_path.empty()) throw ConfigError("--config is required");
    RunConfig cfg = load_config(opts.config_path);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.threads) cfg.threads = *opts.threads;
    if (command == "check") return cmd_check(cfg, opts, log);
    if (command == "mtw-scan") return cmd_mtw_scan(cfg, opts, log);
    if (command == "equilibrium") return cmd_equilibrium(cfg, opts, log);
    throw ConfigError("unknown command '" + command + "'");
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.detail() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace hedonic
