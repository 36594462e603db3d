#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "gcs/geomodel/layout.hpp"

namespace gcs::flowsim {

struct GridDims {
  int nx = 0, ny = 0, nz = 0;
  std::size_t count() const { return static_cast<std::size_t>(nx) * ny * nz; }
  bool operator==(const GridDims&) const = default;
};

// Pressure and saturation snapshots on a (sub)grid at a list of report times.
// `origin` locates the grid inside the full layout; cells run x fastest, then y, then z.
struct FieldSeries {
  GridDims dims;
  std::array<int, 3> origin{0, 0, 0};
  std::vector<double> times_years;
  std::vector<double> pressure;    // n_times x n_cells, Pa
  std::vector<double> saturation;  // n_times x n_cells, CO2 fraction

  std::size_t n_times() const { return times_years.size(); }
  std::size_t n_cells() const { return dims.count(); }
  std::span<const double> pressure_at(std::size_t t) const { return {pressure.data() + t * n_cells(), n_cells()}; }
  std::span<const double> saturation_at(std::size_t t) const {
    return {saturation.data() + t * n_cells(), n_cells()};
  }
  // Index into the full layout for local cell `c`.
  std::size_t global_cell(std::size_t c, const geomodel::GridLayout& layout) const;

  void validate() const;
};

FieldSeries restrict_to_box(const FieldSeries& series, const geomodel::Box& box);

// Restriction to the domain of interest (aquifers, faults and the caprock between them).
FieldSeries extract_domain(const FieldSeries& series, const geomodel::GridLayout& layout);

}  // namespace gcs::flowsim
