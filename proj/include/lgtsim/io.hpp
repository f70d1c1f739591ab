#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace lgtsim::io {

// Shortest round-trip decimal form; independent of the process locale.
std::string format_double(double v);

// Writes a header row and comma-separated rows terminated by '\n'.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  void row(const std::vector<std::string>& cells);
  void close();

 private:
  std::ofstream out_;
  std::size_t columns_;
};

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

}  // namespace lgtsim::io
