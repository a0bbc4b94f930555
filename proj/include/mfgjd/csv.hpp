#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace mfgjd {

/// Render a double with 17 significant digits so that values round-trip
/// exactly and repeated runs produce byte-identical files.
std::string format_g17(double v);

/// Minimal CSV writer with a fixed header and row-major doubles.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);
  ~CsvWriter();

 private:
  std::ofstream out_;
  std::size_t n_cols_;
};

}  // namespace mfgjd
