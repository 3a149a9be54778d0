#pragma once

#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace holo::csv {

/// Shortest round-trip decimal form of a double ("170", "0.28", "1e-09").
std::string format_number(double value);

/// RFC-4180 field quoting: quotes only when the field needs it.
std::string quote(std::string_view field);

/// Accumulates rows and writes them with CRLF-free '\n' line endings.
class Table {
 public:
  explicit Table(std::vector<std::string> header);

  void add_row(std::vector<std::string> row);
  const std::vector<std::string>& header() const noexcept { return header_; }
  const std::vector<std::vector<std::string>>& rows() const noexcept {
    return rows_;
  }

  void write(std::ostream& os) const;
  std::string str() const;
  void save(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Parses text written by Table::write (quoted fields supported).
Table parse(std::string_view text);

}  // namespace holo::csv
