#include "hedonic/condition.hpp"

#include <array>

namespace hedonic {

namespace {

constexpr std::array<std::pair<Condition, std::string_view>, 8> kNames = {{
    {Condition::kA0, "A0"},
    {Condition::kA1, "A1"},
    {Condition::kA2, "A2"},
    {Condition::kA3w, "A3w"},
    {Condition::kA3s, "A3s"},
    {Condition::kB3w, "B3w"},
    {Condition::kB3s, "B3s"},
    {Condition::kBConvexity, "b-convexity"},
}};

}  // namespace

std::string_view to_string(Condition c) {
  for (const auto& [cond, name] : kNames) {
    if (cond == c) return name;
  }
  return "?";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "PASS";
    case Verdict::kFail: return "FAIL";
    case Verdict::kInconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

std::optional<Condition> parse_condition(std::string_view name) {
  for (const auto& [cond, label] : kNames) {
    if (label == name) return cond;
  }
  return std::nullopt;
}

const Vector* Witness::find_vector(std::string_view name) const {
  for (const auto& [key, vec] : vectors) {
    if (key == name) return &vec;
  }
  return nullptr;
}

}  // namespace hedonic
