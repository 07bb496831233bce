#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ionnems {

/// 12 significant digits; "nan" / "inf" / "-inf" for non-finite values.
std::string format_number(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  /// Index of a header column; throws InvalidArgument when missing.
  std::size_t column_index(std::string_view name) const;
  /// Numeric column; throws ParseError (with the file line) on bad cells.
  std::vector<double> numeric_column(std::string_view name) const;

  std::string to_string() const;
};

/// Writes atomically enough for a CLI: the whole text in one stream, IoError
/// on any failure.
void write_csv(const std::string& path, const CsvTable& table);

/// Comma-separated, header row first, no quoting. IoError if unreadable,
/// ParseError on ragged rows.
CsvTable read_csv(const std::string& path);

}  // namespace ionnems
