#include "deferral/csv.hpp"

#include "deferral/types.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

namespace deferral::csv {

std::optional<std::size_t> Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name)
      return i;
  }
  return std::nullopt;
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos)
    return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

} // namespace

Table parse(std::string_view text) {
  std::vector<Row> records;
  Row current;
  std::string cell;
  bool in_quotes = false;
  bool cell_was_quoted = false;
  std::size_t line = 1;
  current.line = 1;

  auto finish_cell = [&] {
    current.cells.push_back(cell_was_quoted ? cell : trim(cell));
    cell.clear();
    cell_was_quoted = false;
  };
  auto finish_record = [&] {
    finish_cell();
    const bool blank = current.cells.size() == 1 && current.cells.front().empty();
    if (!blank)
      records.push_back(std::move(current));
    current = Row{};
  };

  // A UTF-8 byte order mark is tolerated.
  if (text.starts_with("\xEF\xBB\xBF"))
    text.remove_prefix(3);

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n')
          ++line;
        cell += ch;
      }
      continue;
    }
    switch (ch) {
    case '"':
      in_quotes = true;
      cell_was_quoted = true;
      break;
    case ',':
      finish_cell();
      break;
    case '\r':
      break;
    case '\n':
      finish_record();
      ++line;
      current.line = line;
      break;
    default:
      cell += ch;
    }
  }
  if (in_quotes)
    throw IoError(fmt::format("CSV: unterminated quoted field starting near line {}", current.line));
  if (!cell.empty() || !current.cells.empty() || cell_was_quoted)
    finish_record();

  Table table;
  if (records.empty())
    throw IoError("CSV: missing header row");
  table.header = std::move(records.front().cells);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].cells.size() != table.header.size()) {
      throw IoError(fmt::format("CSV: line {} has {} fields, header has {}", records[r].line,
                                records[r].cells.size(), table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

Table read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError(fmt::format("cannot open '{}' for reading", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string escape(std::string_view cell) {
  if (cell.find_first_of(",\"\n\r") == std::string_view::npos)
    return std::string(cell);
  std::string out = "\"";
  for (char ch : cell) {
    if (ch == '"')
      out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0)
      out += ',';
    out += escape(cells[i]);
  }
  return out;
}

std::string exact(double value) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

std::string cents(double value) {
  // Avoid printing "-0.00".
  const double rounded = std::round(value * 100.0) / 100.0;
  return fmt::format("{:.2f}", rounded == 0.0 ? 0.0 : rounded);
}

std::optional<double> to_double(std::string_view text) {
  if (text.empty())
    return std::nullopt;
  if (text.front() == '+')
    text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    return std::nullopt;
  return value;
}

} // namespace deferral::csv
