#pragma once

// Minimal RFC 4180 style CSV reading and writing.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace deferral::csv {

struct Row {
  std::size_t line = 0; ///< 1-based line number in the source
  std::vector<std::string> cells;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;

  /// Index of a header column, if present.
  std::optional<std::size_t> column(std::string_view name) const;
};

/// Parses CSV text. The first non-empty record is the header. Throws
/// IoError on structural problems (unterminated quote, ragged row).
Table parse(std::string_view text);

/// Reads and parses a file. Throws IoError if it cannot be read.
Table read_file(const std::filesystem::path& path);

/// Quotes a cell when it contains a separator, quote or newline.
std::string escape(std::string_view cell);

std::string join(const std::vector<std::string>& cells);

/// Shortest representation that parses back to the same double.
std::string exact(double value);

/// Fixed two-decimal representation.
std::string cents(double value);

/// Strict numeric parse of a whole cell.
std::optional<double> to_double(std::string_view text);

} // namespace deferral::csv
