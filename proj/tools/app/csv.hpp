#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qlimits::app {

/// Shortest decimal that parses back to the same double; "inf"/"-inf"/"nan"
/// for non-finite values.
std::string format_number(double value);

/// Comma-separated table with a mandatory header row.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  class Row {
   public:
    Row& add(double value);
    Row& add(std::uint64_t value);
    Row& add(std::string value);

   private:
    friend class CsvTable;
    std::vector<std::string> cells_;
  };

  /// Throws std::logic_error when the row width differs from the header.
  void append(Row row);
  std::size_t rows() const noexcept { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace qlimits::app
