#pragma once

// Minimal CSV writing and reading for experiment output: '#' comment lines, one header row,
// comma-separated fields, shortest round-trip decimal formatting for doubles.

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "sybil/error.hpp"

namespace sybil::csv {

inline std::string format(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw NumericFailure("csv: cannot format double");
  return std::string(buf, end);
}

inline std::string format(int v) { return std::to_string(v); }
inline std::string format(long v) { return std::to_string(v); }
inline std::string format(long long v) { return std::to_string(v); }
inline std::string format(unsigned v) { return std::to_string(v); }
inline std::string format(unsigned long v) { return std::to_string(v); }
inline std::string format(unsigned long long v) { return std::to_string(v); }
inline std::string format(bool v) { return v ? "1" : "0"; }
inline std::string format(const std::string& v) { return v; }
inline std::string format(const char* v) { return v; }

class Writer {
public:
  explicit Writer(std::ostream& os) : os_(os) {}

  void comment(std::string_view text) { os_ << "# " << text << '\n'; }

  void header(const std::vector<std::string>& columns) {
    columns_ = columns.size();
    write_fields(columns);
  }

  template <typename... Ts>
  void row(const Ts&... fields) {
    std::vector<std::string> f{format(fields)...};
    if (columns_ && f.size() != columns_) throw InvariantViolation("csv: row width differs from header");
    write_fields(f);
  }

private:
  void write_fields(const std::vector<std::string>& f) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f[i].find_first_of(",\n") != std::string::npos) {
        throw DomainError("csv: field contains a separator: '" + f[i] + "'");
      }
      if (i) os_ << ',';
      os_ << f[i];
    }
    os_ << '\n';
  }

  std::ostream& os_;
  std::size_t columns_ = 0;
};

struct Table {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw DomainError("csv: no column '" + std::string(name) + "'");
  }

  double number(std::size_t row, std::string_view name) const {
    const std::string& s = rows.at(row).at(column(name));
    double v = 0.0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) {
      throw DomainError("csv: '" + s + "' is not a number");
    }
    return v;
  }
};

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

inline Table read(std::istream& in) {
  Table t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.comments.push_back(line.size() > 2 ? line.substr(2) : std::string{});
      continue;
    }
    auto fields = split(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
    } else {
      if (fields.size() != t.header.size()) throw DomainError("csv: ragged row '" + line + "'");
      t.rows.push_back(std::move(fields));
    }
  }
  return t;
}

} // namespace sybil::csv
