#include "gcs/surrogate/predictor.hpp"

#include <algorithm>

#include "gcs/common/error.hpp"
#include "gcs/surrogate/data.hpp"

namespace gcs::surrogate {

flowsim::FieldSeries Surrogate::predict(const geomodel::Realization& r, const geomodel::GridLayout& layout) const {
  return predict(std::span<const geomodel::Realization>(&r, 1), layout, 1).front();
}

std::vector<flowsim::FieldSeries> Surrogate::predict(std::span<const geomodel::Realization> rs,
                                                     const geomodel::GridLayout& layout, int batch_size) const {
  if (!pressure.pressure_norm) throw ArgumentError("pressure network has no normalization statistics");
  if (pressure.output_times != saturation.output_times) throw ArgumentError("networks disagree on output times");
  const auto& box = layout.domain_box();
  const flowsim::GridDims dims{box.nx(), box.ny(), box.nz()};
  const std::size_t cells = dims.count();
  const std::size_t nt = pressure.output_times.size();
  std::vector<flowsim::FieldSeries> out;
  out.reserve(rs.size());
  for (std::size_t b = 0; b < rs.size(); b += static_cast<std::size_t>(batch_size)) {
    const std::size_t e = std::min(rs.size(), b + batch_size);
    std::vector<nn::Tensor> ch;
    for (std::size_t i = b; i < e; ++i) ch.push_back(domain_channels(rs[i], layout));
    const nn::Tensor p = pressure.predict(stack_inputs(ch, pressure.input_scale));
    const nn::Tensor s = saturation.predict(stack_inputs(ch, saturation.input_scale));
    for (std::size_t i = 0; i < e - b; ++i) {
      flowsim::FieldSeries f;
      f.dims = dims;
      f.origin = {box.i0, box.j0, box.k0};
      f.times_years = pressure.output_times;
      const std::size_t off = i * nt * cells;
      f.pressure = denormalize(std::span(p.data).subspan(off, nt * cells), *pressure.pressure_norm);
      f.saturation.assign(s.data.begin() + static_cast<std::ptrdiff_t>(off),
                          s.data.begin() + static_cast<std::ptrdiff_t>(off + nt * cells));
      for (auto& v : f.saturation) v = std::clamp(v, 0.0, 1.0);
      out.push_back(std::move(f));
    }
  }
  return out;
}

}  // namespace gcs::surrogate
