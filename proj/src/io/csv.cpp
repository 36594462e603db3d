#include "gcs/io/csv.hpp"

#include <cmath>
#include <cstdio>

#include "gcs/common/error.hpp"
#include "gcs/common/fileio.hpp"

namespace gcs::io {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()) {
  if (header.empty()) throw ArgumentError("CSV table needs at least one column");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i].find_first_of(",\n\"") != std::string::npos) throw ArgumentError("CSV header cell needs quoting");
    text_ += (i ? "," : "") + header[i];
  }
  in_row_ = columns_;
}

CsvTable& CsvTable::row() {
  if (in_row_ != columns_) throw ShapeError("CSV row has " + std::to_string(in_row_) + " of " + std::to_string(columns_) + " cells");
  text_ += '\n';
  in_row_ = 0;
  return *this;
}

CsvTable& CsvTable::cell(const std::string& v) {
  if (in_row_ >= columns_) throw ShapeError("CSV row has more cells than columns");
  if (v.find_first_of(",\n\"") != std::string::npos) throw ArgumentError("CSV cell needs quoting: " + v);
  if (in_row_) text_ += ',';
  text_ += v;
  ++in_row_;
  return *this;
}

CsvTable& CsvTable::cell(double v) { return cell(format_double(v)); }
CsvTable& CsvTable::cell(long long v) { return cell(std::to_string(v)); }

std::string CsvTable::str() const {
  if (in_row_ != columns_) throw ShapeError("CSV table ends in an incomplete row");
  return text_ + '\n';
}

void CsvTable::write(const std::filesystem::path& path) const { atomic_write_file(path, str()); }

}  // namespace gcs::io
