#include "holo/csv.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "holo/error.hpp"

namespace holo::csv {

std::string format_number(double value) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw Error("csv.format", "cannot format number");
  return std::string(buf.data(), end);
}

std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

Table::Table(std::vector<std::string> header) : header_(std::move(header)) {}

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size()) {
    throw Error("csv.arity", "row has " + std::to_string(row.size()) +
                                 " fields, header has " +
                                 std::to_string(header_.size()));
  }
  rows_.push_back(std::move(row));
}

namespace {
void write_line(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << quote(fields[i]);
  }
  os << '\n';
}
}  // namespace

void Table::write(std::ostream& os) const {
  write_line(os, header_);
  for (const auto& r : rows_) write_line(os, r);
}

std::string Table::str() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

void Table::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("csv.io", "cannot open " + path + " for writing");
  write(f);
  if (!f) throw Error("csv.io", "write failed for " + path);
}

Table parse(std::string_view text) {
  std::vector<std::vector<std::string>> lines;
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cur.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      any = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !cur.empty()) {
        fields.push_back(std::move(cur));
        lines.push_back(std::move(fields));
      }
      fields.clear();
      cur.clear();
      any = false;
    } else {
      cur.push_back(c);
      any = true;
    }
  }
  if (in_quotes) throw Error("csv.parse", "unterminated quoted field");
  if (any || !cur.empty()) {
    fields.push_back(std::move(cur));
    lines.push_back(std::move(fields));
  }
  if (lines.empty()) throw Error("csv.parse", "missing header row");
  Table t(std::move(lines.front()));
  for (std::size_t i = 1; i < lines.size(); ++i) t.add_row(std::move(lines[i]));
  return t;
}

}  // namespace holo::csv
