#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace gcs::io {

// Comma-separated table; numbers print with 17 significant digits so values round-trip.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& row();
  CsvTable& cell(double v);
  CsvTable& cell(long long v);
  CsvTable& cell(int v) { return cell(static_cast<long long>(v)); }
  CsvTable& cell(std::size_t v) { return cell(static_cast<long long>(v)); }
  CsvTable& cell(const std::string& v);
  CsvTable& cell(const char* v) { return cell(std::string(v)); }

  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::size_t columns_;
  std::size_t in_row_ = 0;
  std::string text_;
};

std::string format_double(double v);

}  // namespace gcs::io
