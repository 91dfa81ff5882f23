#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "crutchlab/error.hpp"

namespace crutchlab::io {

/// Plain comma-separated table: one header row, no quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position of `name`; throws InvalidInput when absent.
  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(std::istream& in, const std::string& source = "<stream>");
CsvTable read_csv(const std::filesystem::path& path);

/// Shortest text that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view s, const std::string& context);
int parse_int(std::string_view s, const std::string& context);

/// Require exactly these columns, in this order.
void expect_header(const CsvTable& t, const std::vector<std::string>& names, const std::string& source);

}  // namespace crutchlab::io
