#include "afc/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "afc/errors.hpp"

namespace afc::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string format_number(double value) {
  if (value == 0.0) return "0";
  return fmt::format("{:.10g}", value);
}

bool CsvTable::has(std::string_view name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

const std::vector<double>& CsvTable::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ConfigError(fmt::format("missing CSV column '{}'", name));
  return columns[static_cast<std::size_t>(it - header.begin())];
}

void CsvTable::add_column(std::string name, std::vector<double> values) {
  if (!columns.empty() && values.size() != rows()) {
    throw ConfigError(fmt::format("CSV column '{}' has {} rows, expected {}", name, values.size(), rows()));
  }
  header.push_back(std::move(name));
  columns.push_back(std::move(values));
}

std::string CsvTable::to_string() const {
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) out += ',';
    out += header[c];
  }
  out += '\n';
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ',';
      out += format_number(columns[c][r]);
    }
    out += '\n';
  }
  return out;
}

CsvTable parse_csv(std::string_view text, std::string_view source) {
  CsvTable table;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  std::vector<int> bad_rows;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    const auto fields = split(line);
    if (table.header.empty()) {
      for (const auto f : fields) {
        if (f.empty()) throw ConfigError(fmt::format("{}:{}: empty column name", source, line_no));
        table.header.emplace_back(f);
      }
      table.columns.resize(table.header.size());
      continue;
    }
    if (fields.size() != table.header.size()) {
      bad_rows.push_back(line_no);
      continue;
    }
    std::vector<double> values;
    bool ok = true;
    for (const auto f : fields) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || ec != std::errc{} || ptr != f.data() + f.size()) {
        ok = false;
        break;
      }
      values.push_back(v);
    }
    if (!ok) {
      bad_rows.push_back(line_no);
      continue;
    }
    for (std::size_t c = 0; c < values.size(); ++c) table.columns[c].push_back(values[c]);
  }
  if (!bad_rows.empty()) {
    throw ConfigError(fmt::format("{}: malformed rows at lines {}", source, fmt::join(bad_rows, ", ")));
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  return parse_csv(read_text(path), path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

}  // namespace afc::io
