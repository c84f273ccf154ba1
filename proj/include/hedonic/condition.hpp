#pragma once

#include "hedonic/linalg.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hedonic {

enum class Condition { kA0, kA1, kA2, kA3w, kA3s, kB3w, kB3s, kBConvexity };
enum class Verdict { kPass, kFail, kInconclusive };

std::string_view to_string(Condition c);
std::string_view to_string(Verdict v);
std::optional<Condition> parse_condition(std::string_view name);

/// Replayable evidence for a verdict: every input needed to recompute `value`.
struct Witness {
  std::vector<std::pair<std::string, Vector>> vectors;
  std::vector<std::pair<std::string, double>> scalars;
  double value = 0.0;
  std::string note;

  const Vector* find_vector(std::string_view name) const;
};

struct ConditionReport {
  Condition condition = Condition::kA0;
  std::string subject;  // which function / map the verdict is about
  Verdict verdict = Verdict::kInconclusive;
  size_t probes_total = 0;
  size_t probes_rejected = 0;
  double worst_value = 0.0;
  std::vector<Witness> witnesses;
};

}  // namespace hedonic
