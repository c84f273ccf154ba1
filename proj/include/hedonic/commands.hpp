#pragma once

#include "hedonic/config.hpp"
#include "hedonic/report.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace hedonic {

/// Process exit codes shared by every command.
enum ExitCode : int {
  kExitPass = 0,
  kExitFail = 1,
  kExitInconclusive = 2,
  kExitConfig = 3,
  kExitRuntime = 4,
};

struct CommandOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::filesystem::path out_dir = "hedonic-report";
  ReportFormat format = ReportFormat::kRecords;
  std::string witness_path;  // replay-witness only
};

/// Condition suite: structure checks, curvature scans and b-convexity.
int cmd_check(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log);
/// Probe table with every curvature route and their discrepancies.
int cmd_mtw_scan(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log);
/// Synthetic equilibrium, contract Jacobians, dimension estimate, discrete market.
int cmd_equilibrium(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log);
/// Recomputes the value stored in a witness file written by `check`.
int cmd_replay_witness(const CommandOptions& opts, std::ostream& log);

/// Loads the configuration, applies --seed / --threads and dispatches. Config
/// errors map to kExitConfig, numerical failures to kExitRuntime.
int run_command(const std::string& command, const CommandOptions& opts, std::ostream& log,
                std::ostream& err);

/// Curvature of a single probe normalized by |u|^2 |v|^2, exactly as the
/// scanner computes it.
double normalized_probe_value(const PreferencePair& pp, const Point& x, const Point& y,
                              const Vector& u, const Vector& v, const MtwOptions& opts);

}  // namespace hedonic
