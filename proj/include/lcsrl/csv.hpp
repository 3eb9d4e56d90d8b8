#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <fmt/format.h>

#include "lcsrl/errors.hpp"

namespace lcsrl {

// Every CSV starts with "# lcsrl-schema: <kind> v<version>" followed by the column header.
inline constexpr std::string_view kSchemaPrefix = "# lcsrl-schema: ";

struct CsvSchema {
  std::string kind;
  int version = 0;
  friend bool operator==(const CsvSchema&, const CsvSchema&) = default;
};

inline std::string schema_line(const CsvSchema& schema) {
  return fmt::format("{}{} v{}", kSchemaPrefix, schema.kind, schema.version);
}

inline CsvSchema parse_schema_line(std::string_view line) {
  if (!line.starts_with(kSchemaPrefix)) throw FormatError("missing schema header line");
  line.remove_prefix(kSchemaPrefix.size());
  const auto sep = line.rfind(" v");
  if (sep == std::string_view::npos) throw FormatError("malformed schema header line");
  CsvSchema schema{std::string(line.substr(0, sep)), 0};
  try {
    schema.version = std::stoi(std::string(line.substr(sep + 2)));
  } catch (const std::exception&) {
    throw FormatError("malformed schema version");
  }
  return schema;
}

inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.17g}", v);
}

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const CsvSchema& schema, const std::vector<std::string>& columns) : out_(out) {
    out_ << schema_line(schema) << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << '\n';
  }

  template <class... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((out_ << (first ? "" : ","), first = false, write_field(fields)), ...);
    out_ << '\n';
  }

 private:
  template <class T>
  void write_field(const T& v) {
    if constexpr (std::is_floating_point_v<T>) {
      out_ << format_real(v);
    } else if constexpr (requires { v.has_value(); *v; }) {
      if (v) write_field(*v);
    } else {
      out_ << v;
    }
  }

  std::ostream& out_;
};

}  // namespace lcsrl
