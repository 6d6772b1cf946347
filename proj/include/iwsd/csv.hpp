#ifndef IWSD_CSV_HPP_
#define IWSD_CSV_HPP_

#include <cstdio>
#include <string>
#include <vector>

namespace iwsd {

// Shortest representation that round-trips a double exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

}  // namespace iwsd

#endif  // IWSD_CSV_HPP_
