#include "gcs/flowsim/series.hpp"

#include "gcs/common/error.hpp"

namespace gcs::flowsim {

std::size_t FieldSeries::global_cell(std::size_t c, const geomodel::GridLayout& layout) const {
  const auto nx = static_cast<std::size_t>(dims.nx);
  const auto ny = static_cast<std::size_t>(dims.ny);
  const int i = static_cast<int>(c % nx) + origin[0];
  const int j = static_cast<int>((c / nx) % ny) + origin[1];
  const int k = static_cast<int>(c / (nx * ny)) + origin[2];
  return layout.index(i, j, k);
}

void FieldSeries::validate() const {
  const std::size_t expected = n_times() * n_cells();
  if (pressure.size() != expected || saturation.size() != expected) {
    throw ShapeError("snapshot count does not match the time count");
  }
  for (double s : saturation) {
    if (!(s >= -1e-12 && s <= 1.0 + 1e-12)) throw NumericalError("saturation outside [0, 1]");
  }
}

FieldSeries restrict_to_box(const FieldSeries& series, const geomodel::Box& box) {
  const auto& d = series.dims;
  const int bi = box.i0 - series.origin[0];
  const int bj = box.j0 - series.origin[1];
  const int bk = box.k0 - series.origin[2];
  if (bi < 0 || bj < 0 || bk < 0 || bi + box.nx() > d.nx || bj + box.ny() > d.ny || bk + box.nz() > d.nz) {
    throw ShapeError("restriction box exceeds the series grid");
  }
  FieldSeries out;
  out.dims = {box.nx(), box.ny(), box.nz()};
  out.origin = {box.i0, box.j0, box.k0};
  out.times_years = series.times_years;
  const std::size_t n_out = out.dims.count();
  out.pressure.resize(series.n_times() * n_out);
  out.saturation.resize(series.n_times() * n_out);
  for (std::size_t t = 0; t < series.n_times(); ++t) {
    std::size_t o = t * n_out;
    for (int k = 0; k < box.nz(); ++k) {
      for (int j = 0; j < box.ny(); ++j) {
        for (int i = 0; i < box.nx(); ++i, ++o) {
          const std::size_t src = t * series.n_cells() +
                                  (static_cast<std::size_t>(k + bk) * d.ny + (j + bj)) * d.nx + (i + bi);
          out.pressure[o] = series.pressure[src];
          out.saturation[o] = series.saturation[src];
        }
      }
    }
  }
  return out;
}

FieldSeries extract_domain(const FieldSeries& series, const geomodel::GridLayout& layout) {
  return restrict_to_box(series, layout.domain_box());
}

}  // namespace gcs::flowsim
