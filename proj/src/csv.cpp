#include "mfgjd/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace mfgjd {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : out_(path), n_cols_(columns.size()) {
  if (!out_) throw std::runtime_error("cannot open output file: " + path);
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out_ << ',';
    out_ << columns[i];
  }
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != n_cols_) throw std::logic_error("csv row width mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out_ << ',';
    out_ << format_g17(values[i]);
  }
  out_ << '\n';
}

CsvWriter::~CsvWriter() = default;

}  // namespace mfgjd
