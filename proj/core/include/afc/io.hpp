#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace afc::io {

/// Fixed formatting for every number written to CSV, so output is
/// byte-identical across runs.
std::string format_number(double value);

/// Comma-separated table with a header row. Columns are stored by name.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  bool has(std::string_view name) const;
  const std::vector<double>& column(std::string_view name) const;
  void add_column(std::string name, std::vector<double> values);
  std::string to_string() const;
};

/// Parses a CSV document. Rows that do not parse are reported by 1-based
/// line number in the thrown ConfigError.
CsvTable parse_csv(std::string_view text, std::string_view source = "<memory>");
CsvTable read_csv(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace afc::io
