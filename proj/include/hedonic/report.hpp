#pragma once

#include "hedonic/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hedonic {

enum class ReportFormat { kRecords, kTable };

std::optional<ReportFormat> parse_format(std::string_view name);

/// 17 significant digits; nan / inf / -inf for non-finite values.
std::string format_double(double v);

/// Ordered key/value row. Written as one JSON object per line (records) or one
/// tab-separated line under a header (table).
class Record {
 public:
  Record& add(std::string key, double v);
  Record& add(std::string key, std::int64_t v);
  Record& add(std::string key, std::uint64_t v);
  Record& add(std::string key, int v) { return add(std::move(key), static_cast<std::int64_t>(v)); }
  Record& add(std::string key, bool v);
  Record& add(std::string key, std::string v);
  Record& add(std::string key, const char* v) { return add(std::move(key), std::string(v)); }
  Record& add(std::string key, const Vector& v);
  Record& add(std::string key, const Record& nested);
  Record& add(std::string key, const std::vector<Record>& list);
  /// Null in JSON, empty cell in a table.
  Record& add_null(std::string key);

  std::string json() const;
  std::vector<std::string> columns() const;
  std::vector<std::string> cells() const;

 private:
  struct Null {};
  struct Nested {
    std::vector<Record> items;
    bool is_list = false;
  };
  using Value = std::variant<Null, double, std::int64_t, std::uint64_t, bool, std::string, Vector, Nested>;

  static std::string json_of(const Value& v);
  static std::string cell_of(const Value& v);

  std::vector<std::pair<std::string, Value>> fields_;
};

/// Writes `<dir>/<name>.jsonl` or `<dir>/<name>.tsv`; returns the path.
std::filesystem::path write_report(const std::filesystem::path& dir, const std::string& name,
                                   ReportFormat format, const std::vector<Record>& rows);

}  // namespace hedonic
