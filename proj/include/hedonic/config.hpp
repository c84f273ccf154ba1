#pragma once

#include "hedonic/condition.hpp"
#include "hedonic/error.hpp"
#include "hedonic/families.hpp"
#include "hedonic/mtw.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hedonic {

/// Raised for unreadable, malformed or inconsistent configuration files. The
/// message carries "line L, column C" whenever the position is known.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCode::kConfig, what), detail_(what) {}

  const std::string& detail() const { return detail_; }

 private:
  std::string detail_;
};

struct EquilibriumConfig {
  size_t buyers = 200;       // synthetic-equilibrium buyers
  size_t dimension_buyers = 500;
  size_t market_size = 100;  // discrete market N
  double potential_c = 1.0;  // u(x) = c |x|^2
  int k_neighbors = 0;       // 0 selects 4n
  std::optional<Box> buyer_box;
  std::optional<Box> seller_box;
  double fd_step = 1e-3;
  double psd_tolerance = 1e-9;
  double consistency_tolerance = 0.1;
};

struct RunConfig {
  std::string family = "quadratic";
  int dimension = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  FamilyParams family_params;
  FamilyBoxes boxes;  // domains of the pair

  // Sampling boxes for scans and structure checks.
  Box sample_x;
  Box sample_y;
  Box sample_z;  // contracts for the h / g structure checks
  int grid_points = 5;
  int directions = 4;
  int structure_grid_points = 3;
  int bconvexity_grid_points = 3;
  int bconvexity_t_nodes = 9;
  std::optional<Box> bconvexity_y_box;

  std::vector<Condition> conditions;
  size_t scan_probes = 100;
  bool scan_orthogonal = false;

  double slack = 1e-7;
  double spot_check_fraction = 0.05;
  MtwOptions mtw;
  SurplusTolerances surplus;

  EquilibriumConfig equilibrium;

  std::string source_text;  // verbatim configuration, for hashing and witnesses
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// FNV-1a of the configuration text, as 16 hex digits.
std::string config_hash(const std::string& text);

/// The family the configuration selects, with its tolerances applied.
Family build_family(const RunConfig& cfg);

}  // namespace hedonic
