#include "hedonic/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hedonic {

namespace {

std::string where(const YAML::Mark& m) {
  if (m.is_null()) return "";
  return "line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1) + ": ";
}

[[noreturn]] void fail(const YAML::Node& n, const std::string& msg) {
  throw ConfigError(where(n.Mark()) + msg);
}

void check_keys(const YAML::Node& map, const std::vector<std::string_view>& allowed,
                const std::string& section) {
  if (!map.IsMap()) fail(map, "'" + section + "' must be a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail(kv.first, "unknown key '" + key + "' in " + section);
    }
  }
}

template <class T>
T scalar(const YAML::Node& n, const std::string& name) {
  if (!n.IsScalar()) fail(n, "'" + name + "' must be a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(n, "'" + name + "' has an invalid value '" + n.Scalar() + "'");
  }
}

template <class T>
void read(const YAML::Node& map, const char* key, T& out, const std::string& section) {
  if (const YAML::Node n = map[key]) out = scalar<T>(n, section.empty() ? key : section + "." + key);
}

template <class T>
void read_positive(const YAML::Node& map, const char* key, T& out, const std::string& section) {
  if (const YAML::Node n = map[key]) {
    const std::string name = section + "." + key;
    out = scalar<T>(n, name);
    if (!(out > T{0})) fail(n, "'" + name + "' must be positive");
  }
}

Interval interval(const YAML::Node& n, const std::string& name) {
  if (!n.IsSequence() || n.size() != 2) fail(n, "'" + name + "' intervals are [lo, hi]");
  const Interval iv{scalar<double>(n[0], name), scalar<double>(n[1], name)};
  if (!(iv.lo < iv.hi)) fail(n, "'" + name + "' needs lo < hi");
  return iv;
}

Box box(const YAML::Node& n, int dim, const std::string& name) {
  if (!n.IsSequence() || n.size() == 0) fail(n, "'" + name + "' must be [lo, hi] or a list of them");
  if (!n[0].IsSequence()) {
    const Interval iv = interval(n, name);
    return Box::cube(dim, iv.lo, iv.hi);
  }
  if (static_cast<int>(n.size()) != dim) {
    fail(n, "'" + name + "' lists " + std::to_string(n.size()) + " intervals for dimension " +
                std::to_string(dim));
  }
  std::vector<Interval> sides;
  for (const auto& s : n) sides.push_back(interval(s, name));
  return Box(std::move(sides));
}

void read_box(const YAML::Node& map, const char* key, int dim, Box& out, const std::string& section) {
  if (const YAML::Node n = map[key]) out = box(n, dim, section + "." + key);
}

void read_box(const YAML::Node& map, const char* key, int dim, std::optional<Box>& out,
              const std::string& section) {
  if (const YAML::Node n = map[key]) out = box(n, dim, section + "." + key);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(where(e.mark) + e.msg);
  }
  RunConfig cfg;
  cfg.source_text = text;
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  check_keys(root,
             {"family", "dimension", "seed", "threads", "family_params", "custom", "boxes",
              "sampling", "check", "mtw_scan", "tolerances", "equilibrium"},
             "the top level");

  read(root, "family", cfg.family, "");
  if (std::find(family_names().begin(), family_names().end(), cfg.family) == family_names().end()) {
    fail(root["family"], "unknown family '" + cfg.family + "'");
  }
  read_positive(root, "dimension", cfg.dimension, "");
  read(root, "seed", cfg.seed, "");
  read_positive(root, "threads", cfg.threads, "");
  const int n = cfg.dimension;

  cfg.boxes = FamilyBoxes::defaults(n);
  cfg.sample_x = Box::cube(n, -0.5, 0.5);
  cfg.sample_y = Box::cube(n, -0.5, 0.5);
  cfg.sample_z = Box::cube(n, -1.0, 1.0);

  if (const YAML::Node fp = root["family_params"]) {
    check_keys(fp, {"epsilon", "A"}, "family_params");
    read(fp, "epsilon", cfg.family_params.epsilon, "family_params");
    if (const YAML::Node a = fp["A"]) {
      if (!a.IsSequence() || static_cast<int>(a.size()) != n) fail(a, "'family_params.A' must have n rows");
      Matrix A(n, n);
      for (int i = 0; i < n; ++i) {
        if (!a[i].IsSequence() || static_cast<int>(a[i].size()) != n) {
          fail(a[i], "'family_params.A' rows must have n entries");
        }
        for (int j = 0; j < n; ++j) A(i, j) = scalar<double>(a[i][j], "family_params.A");
      }
      cfg.family_params.A = A;
    }
  }
  if (const YAML::Node c = root["custom"]) {
    check_keys(c, {"h", "g"}, "custom");
    read(c, "h", cfg.family_params.h, "custom");
    read(c, "g", cfg.family_params.g, "custom");
  }
  if (cfg.family == "custom" && (cfg.family_params.h.empty() || cfg.family_params.g.empty())) {
    fail(root, "family 'custom' needs custom.h and custom.g");
  }
  if (const YAML::Node b = root["boxes"]) {
    check_keys(b, {"x", "y", "z"}, "boxes");
    read_box(b, "x", n, cfg.boxes.x, "boxes");
    read_box(b, "y", n, cfg.boxes.y, "boxes");
    read_box(b, "z", n, cfg.boxes.z, "boxes");
  }
  if (const YAML::Node s = root["sampling"]) {
    check_keys(s,
               {"x_box", "y_box", "z_box", "grid_points", "directions", "structure_grid_points",
                "bconvexity_grid_points", "bconvexity_t_nodes", "bconvexity_y_box"},
               "sampling");
    read_box(s, "x_box", n, cfg.sample_x, "sampling");
    read_box(s, "y_box", n, cfg.sample_y, "sampling");
    read_box(s, "z_box", n, cfg.sample_z, "sampling");
    read_positive(s, "grid_points", cfg.grid_points, "sampling");
    read_positive(s, "directions", cfg.directions, "sampling");
    read_positive(s, "structure_grid_points", cfg.structure_grid_points, "sampling");
    read_positive(s, "bconvexity_grid_points", cfg.bconvexity_grid_points, "sampling");
    read_positive(s, "bconvexity_t_nodes", cfg.bconvexity_t_nodes, "sampling");
    read_box(s, "bconvexity_y_box", n, cfg.bconvexity_y_box, "sampling");
  }
  if (const YAML::Node c = root["check"]) {
    check_keys(c, {"conditions"}, "check");
    if (const YAML::Node list = c["conditions"]) {
      if (!list.IsSequence()) fail(list, "'check.conditions' must be a list");
      for (const auto& item : list) {
        const auto name = scalar<std::string>(item, "check.conditions");
        const auto cond = parse_condition(name);
        if (!cond) fail(item, "unknown condition '" + name + "'");
        cfg.conditions.push_back(*cond);
      }
    }
  }
  if (cfg.conditions.empty()) {
    cfg.conditions = {Condition::kA0, Condition::kA1, Condition::kA2, Condition::kA3w,
                      Condition::kB3w, Condition::kBConvexity};
  }
  if (const YAML::Node m = root["mtw_scan"]) {
    check_keys(m, {"probes", "orthogonal"}, "mtw_scan");
    read_positive(m, "probes", cfg.scan_probes, "mtw_scan");
    read(m, "orthogonal", cfg.scan_orthogonal, "mtw_scan");
  }
  if (const YAML::Node t = root["tolerances"]) {
    check_keys(t,
               {"slack", "spot_check_fraction", "stencil_step", "direct_s_step", "direct_t_step",
                "segment_residual",
                "bexp_tolerance", "stationarity", "negative_definite", "tie_value",
                "tie_distance", "boundary_margin", "twist_separation", "nondegeneracy_det"},
               "tolerances");
    const std::string sec = "tolerances";
    read_positive(t, "slack", cfg.slack, sec);
    read(t, "spot_check_fraction", cfg.spot_check_fraction, sec);
    read_positive(t, "stencil_step", cfg.mtw.stencil_step, sec);
    read_positive(t, "direct_s_step", cfg.mtw.direct_s_step, sec);
    read_positive(t, "direct_t_step", cfg.mtw.direct_t_step, sec);
    read_positive(t, "segment_residual", cfg.mtw.segment_residual, sec);
    read_positive(t, "bexp_tolerance", cfg.mtw.bexp_tolerance, sec);
    read_positive(t, "stationarity", cfg.surplus.stationarity, sec);
    read_positive(t, "negative_definite", cfg.surplus.negative_definite, sec);
    read_positive(t, "tie_value", cfg.surplus.tie_value, sec);
    read_positive(t, "tie_distance", cfg.surplus.tie_distance, sec);
    read(t, "boundary_margin", cfg.surplus.boundary_margin, sec);
    read_positive(t, "twist_separation", cfg.surplus.twist_separation, sec);
    read_positive(t, "nondegeneracy_det", cfg.surplus.nondegeneracy_det, sec);
    if (!(cfg.spot_check_fraction >= 0.0 && cfg.spot_check_fraction <= 1.0)) {
      fail(t["spot_check_fraction"], "'tolerances.spot_check_fraction' must lie in [0, 1]");
    }
  }
  if (const YAML::Node e = root["equilibrium"]) {
    check_keys(e,
               {"buyers", "dimension_buyers", "market_size", "potential_c", "k_neighbors",
                "buyer_box", "seller_box", "fd_step", "psd_tolerance", "consistency_tolerance"},
               "equilibrium");
    const std::string sec = "equilibrium";
    EquilibriumConfig& q = cfg.equilibrium;
    read_positive(e, "buyers", q.buyers, sec);
    read_positive(e, "dimension_buyers", q.dimension_buyers, sec);
    read_positive(e, "market_size", q.market_size, sec);
    read_positive(e, "potential_c", q.potential_c, sec);
    read(e, "k_neighbors", q.k_neighbors, sec);
    read_box(e, "buyer_box", n, q.buyer_box, sec);
    read_box(e, "seller_box", n, q.seller_box, sec);
    read_positive(e, "fd_step", q.fd_step, sec);
    read_positive(e, "psd_tolerance", q.psd_tolerance, sec);
    read_positive(e, "consistency_tolerance", q.consistency_tolerance, sec);
    if (q.market_size < 2) fail(e["market_size"], "'equilibrium.market_size' must be at least 2");
    if (q.k_neighbors < 0) fail(e["k_neighbors"], "'equilibrium.k_neighbors' must be >= 0");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read configuration file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.detail());
  }
}

std::string config_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Family build_family(const RunConfig& cfg) {
  Family f;
  try {
    f = make_family(cfg.family, cfg.dimension, cfg.boxes, cfg.family_params);
  } catch (const Error& e) {
    throw ConfigError(std::string("family: ") + e.what());
  }
  f.pair.tol = cfg.surplus;
  f.pair.validate();
  return f;
}

}  // namespace hedonic
