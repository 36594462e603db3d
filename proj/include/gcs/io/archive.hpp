#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gcs/flowsim/series.hpp"
#include "gcs/geomodel/realization.hpp"

namespace gcs::io {

// Binary artifacts, little-endian. Every format is
//   magic[8] | u32 version | body | u64 FNV-1a of everything before it.
// Readers report bad magic, version, checksum and truncation as distinct IoErrors.

enum class FieldKind : char { pressure = 'p', saturation = 'S' };

struct FieldArchive {
  FieldKind kind = FieldKind::pressure;
  flowsim::GridDims dims;
  std::array<int, 3> origin{0, 0, 0};
  std::vector<double> times_years;
  // Time-major, then z, y, x.
  std::vector<double> values;

  void validate() const;
};

inline constexpr std::uint32_t kFieldArchiveVersion = 1;
std::string serialize_field(const FieldArchive& a);
FieldArchive deserialize_field(const std::string& bytes);
void write_field(const std::filesystem::path& path, const FieldArchive& a);
FieldArchive read_field(const std::filesystem::path& path);

// A series as two archives, `<stem>_p.gcsf` and `<stem>_S.gcsf`.
void write_series(const std::filesystem::path& stem, const flowsim::FieldSeries& s);
flowsim::FieldSeries read_series(const std::filesystem::path& stem);

// Property fields plus the (meta, xi) draw that produced them.
inline constexpr std::uint32_t kRealizationArchiveVersion = 1;
std::string serialize_realization(const geomodel::Realization& r);
geomodel::Realization deserialize_realization(const std::string& bytes);
void write_realization(const std::filesystem::path& path, const geomodel::Realization& r);
geomodel::Realization read_realization(const std::filesystem::path& path);

// Dense row-major f64 matrix with column names.
struct MatrixArchive {
  std::vector<std::string> columns;
  Eigen::MatrixXd values;
};

inline constexpr std::uint32_t kMatrixArchiveVersion = 1;
std::string serialize_matrix(const MatrixArchive& m);
MatrixArchive deserialize_matrix(const std::string& bytes);
void write_matrix(const std::filesystem::path& path, const MatrixArchive& m);
MatrixArchive read_matrix(const std::filesystem::path& path);

}  // namespace gcs::io
