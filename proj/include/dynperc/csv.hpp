#ifndef DYNPERC_CSV_HPP
#define DYNPERC_CSV_HPP

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "dynperc/config.hpp"
#include "dynperc/statistics.hpp"

#ifndef DYNPERC_BUILD_TAG
#define DYNPERC_BUILD_TAG "unknown"
#endif

namespace dynperc {

inline constexpr const char* kBuildTag = DYNPERC_BUILD_TAG;

// A CSV artifact: a '#'-prefixed header block echoing every parameter, one
// column row, then data rows. Cells are written verbatim, so numbers must be
// formatted with `cell`.
struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  Table& add(std::vector<std::string> row) {
    rows.push_back(std::move(row));
    return *this;
  }
};

inline std::string cell(double x) { return format_double(x); }
inline std::string cell(int x) { return std::to_string(x); }
inline std::string cell(long x) { return std::to_string(x); }
inline std::string cell(long long x) { return std::to_string(x); }
inline std::string cell(unsigned long x) { return std::to_string(x); }
inline std::string cell(unsigned long long x) { return std::to_string(x); }
inline std::string cell(bool x) { return x ? "1" : "0"; }
inline std::string cell(const char* s) { return s; }
inline std::string cell(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

// value and standard error as two cells
inline void push_estimate(std::vector<std::string>& row, const Estimate& e) {
  row.push_back(cell(e.value));
  row.push_back(cell(e.se));
}

inline void write_csv(std::ostream& os, const Table& t, const std::string& subcommand,
                      const std::vector<std::pair<std::string, std::string>>& params) {
  os << "# subcommand=" << subcommand << "\n";
  os << "# build=" << kBuildTag << "\n";
  for (const auto& [k, v] : params) os << "# " << k << "=" << v << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << "\n";
  }
}

}  // namespace dynperc

#endif  // DYNPERC_CSV_HPP
