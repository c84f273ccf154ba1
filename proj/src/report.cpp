#include "hedonic/report.hpp"

#include "hedonic/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace hedonic {

std::optional<ReportFormat> parse_format(std::string_view name) {
  if (name == "records") return ReportFormat::kRecords;
  if (name == "table") return ReportFormat::kTable;
  return std::nullopt;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string json_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out + "\"";
}

std::string json_number(double v) { return std::isfinite(v) ? format_double(v) : "null"; }

}  // namespace

Record& Record::add(std::string key, double v) {
  fields_.emplace_back(std::move(key), v);
  return *this;
}
Record& Record::add(std::string key, std::int64_t v) {
  fields_.emplace_back(std::move(key), v);
  return *this;
}
Record& Record::add(std::string key, std::uint64_t v) {
  fields_.emplace_back(std::move(key), v);
  return *this;
}
Record& Record::add(std::string key, bool v) {
  fields_.emplace_back(std::move(key), v);
  return *this;
}
Record& Record::add(std::string key, std::string v) {
  fields_.emplace_back(std::move(key), std::move(v));
  return *this;
}
Record& Record::add(std::string key, const Vector& v) {
  fields_.emplace_back(std::move(key), v);
  return *this;
}
Record& Record::add(std::string key, const Record& nested) {
  fields_.emplace_back(std::move(key), Nested{{nested}, false});
  return *this;
}
Record& Record::add(std::string key, const std::vector<Record>& list) {
  fields_.emplace_back(std::move(key), Nested{list, true});
  return *this;
}
Record& Record::add_null(std::string key) {
  fields_.emplace_back(std::move(key), Null{});
  return *this;
}

std::string Record::json_of(const Value& v) {
  struct Visitor {
    std::string operator()(Null) const { return "null"; }
    std::string operator()(double d) const { return json_number(d); }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(std::uint64_t i) const { return std::to_string(i); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const std::string& s) const { return json_string(s); }
    std::string operator()(const Vector& x) const {
      std::string out = "[";
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (i) out += ",";
        out += json_number(x(i));
      }
      return out + "]";
    }
    std::string operator()(const Nested& n) const {
      if (!n.is_list) return n.items.front().json();
      std::string out = "[";
      for (size_t i = 0; i < n.items.size(); ++i) {
        if (i) out += ",";
        out += n.items[i].json();
      }
      return out + "]";
    }
  };
  return std::visit(Visitor{}, v);
}

std::string Record::cell_of(const Value& v) {
  if (std::holds_alternative<Null>(v)) return "";
  if (const auto* d = std::get_if<double>(&v)) return format_double(*d);
  if (const auto* s = std::get_if<std::string>(&v)) {
    std::string out = *s;
    for (char& c : out) {
      if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    }
    return out;
  }
  if (const auto* x = std::get_if<Vector>(&v)) {
    std::string out;
    for (Eigen::Index i = 0; i < x->size(); ++i) {
      if (i) out += ";";
      out += format_double((*x)(i));
    }
    return out;
  }
  return json_of(v);
}

std::string Record::json() const {
  std::string out = "{";
  for (size_t i = 0; i < fields_.size(); ++i) {
    if (i) out += ",";
    out += json_string(fields_[i].first) + ":" + json_of(fields_[i].second);
  }
  return out + "}";
}

std::vector<std::string> Record::columns() const {
  std::vector<std::string> out;
  for (const auto& f : fields_) out.push_back(f.first);
  return out;
}

std::vector<std::string> Record::cells() const {
  std::vector<std::string> out;
  for (const auto& f : fields_) out.push_back(cell_of(f.second));
  return out;
}

std::filesystem::path write_report(const std::filesystem::path& dir, const std::string& name,
                                   ReportFormat format, const std::vector<Record>& rows) {
  std::filesystem::create_directories(dir);
  const auto path = dir / (name + (format == ReportFormat::kRecords ? ".jsonl" : ".tsv"));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path.string());
  auto join = [&](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) out << (i ? "\t" : "") << cells[i];
    out << '\n';
  };
  if (format == ReportFormat::kRecords) {
    for (const auto& r : rows) out << r.json() << '\n';
  } else if (!rows.empty()) {
    join(rows.front().columns());
    for (const auto& r : rows) join(r.cells());
  }
  return path;
}

}  // namespace hedonic
