#include "gcs/flowsim/model.hpp"

#include <numeric>

#include "gcs/common/error.hpp"

namespace gcs::flowsim {

using geomodel::GridLayout;
using geomodel::Region;
using geomodel::Zone;

void FlowModel::index_connections() {
  cell_connections.assign(n_cells(), {-1, -1, -1, -1, -1, -1});
  for (std::size_t f = 0; f < connections.size(); ++f) {
    const auto& c = connections[f];
    if (c.a >= n_cells() || c.b >= n_cells() || c.axis > 2) throw ShapeError("connection references a missing cell");
    cell_connections[c.a][2 * c.axis + 1] = static_cast<std::int32_t>(f);
    cell_connections[c.b][2 * c.axis] = static_cast<std::int32_t>(f);
  }
}

namespace {

double half_trans(double k_md, double area, double half_length) {
  return k_md * kSquareMetersPerMillidarcy * area / half_length;
}

double harmonic(double ta, double tb) { return (ta > 0.0 && tb > 0.0) ? ta * tb / (ta + tb) : 0.0; }

bool permeable(Region r) {
  return r == Region::surround || r == Region::target || r == Region::middle || r == Region::upper ||
         geomodel::is_fault(r);
}

}  // namespace

FlowModel build_flow_model(const geomodel::Realization& real, const GridLayout& layout, const SimConfig& cfg) {
  cfg.validate();
  const std::size_t n = layout.cell_count();
  if (real.kx.size() != n || real.kz.size() != n || real.phi.size() != n) {
    throw ShapeError("realization does not match the layout");
  }
  FlowModel m;
  m.dims = {layout.nx(), layout.ny(), layout.nz()};
  m.pore_volume.resize(n);
  m.depth.resize(n);
  m.co2_density.resize(n);
  const double g = cfg.gravity ? cfg.gravity_accel : 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    const auto [i, j, k] = layout.ijk(c);
    m.depth[c] = layout.depth(k);
    m.co2_density[c] = cfg.co2_density_in(layout.zone(k));
    double pv = layout.bulk_volume(c) * real.phi[c];
    const bool edge = i == 0 || j == 0 || i == layout.nx() - 1 || j == layout.ny() - 1;
    if (edge && permeable(layout.region(c))) pv *= cfg.boundary_pv_multiplier;
    m.pore_volume[c] = pv;
  }
  m.ref_pressure.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    m.ref_pressure[c] = cfg.datum_pressure_pa + cfg.brine_density * g * (m.depth[c] - cfg.datum_depth_m);
  }

  const double dx = layout.dx(), dy = layout.dy();
  for (int k = 0; k < layout.nz(); ++k) {
    const double dz = layout.dz(k);
    for (int j = 0; j < layout.ny(); ++j) {
      for (int i = 0; i < layout.nx(); ++i) {
        const std::size_t a = layout.index(i, j, k);
        auto add = [&](std::size_t b, std::uint8_t axis, double t) {
          m.connections.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), axis, t,
                                   m.depth[a] - m.depth[b]});
        };
        if (i + 1 < layout.nx()) {
          const std::size_t b = layout.index(i + 1, j, k);
          add(b, 0, harmonic(half_trans(real.kx[a], dy * dz, 0.5 * dx), half_trans(real.kx[b], dy * dz, 0.5 * dx)));
        }
        if (j + 1 < layout.ny()) {
          const std::size_t b = layout.index(i, j + 1, k);
          add(b, 1, harmonic(half_trans(real.kx[a], dx * dz, 0.5 * dy), half_trans(real.kx[b], dx * dz, 0.5 * dy)));
        }
        if (k + 1 < layout.nz()) {
          const std::size_t b = layout.index(i, j, k + 1);
          add(b, 2,
              harmonic(half_trans(real.kz[a], dx * dy, 0.5 * dz), half_trans(real.kz[b], dx * dy, 0.5 * layout.dz(k + 1))));
        }
      }
    }
  }
  m.index_connections();

  const auto target_layers = layout.layers_of(Zone::target);
  for (const auto& w : layout.injectors()) {
    WellCompletion wc;
    wc.name = w.name;
    for (int k : target_layers) {
      const std::size_t c = layout.index(w.i, w.j, k);
      if (layout.region(c) != Region::target) throw ArgumentError("injector " + w.name + " is not completed in the target aquifer");
      wc.cells.push_back(static_cast<std::uint32_t>(c));
      wc.fractions.push_back(real.kx[c] * layout.dz(k));
    }
    const double total = std::accumulate(wc.fractions.begin(), wc.fractions.end(), 0.0);
    if (!(total > 0.0)) throw ArgumentError("injector " + w.name + " has no permeable completion");
    for (double& f : wc.fractions) f /= total;
    m.wells.push_back(std::move(wc));
  }
  return m;
}

SimState init_state(const FlowModel& model, const SimConfig& cfg) {
  const double g = cfg.gravity ? cfg.gravity_accel : 0.0;
  SimState s;
  const std::size_t n = model.n_cells();
  s.pressure.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    s.pressure[c] = cfg.datum_pressure_pa + cfg.brine_density * g * (model.depth[c] - cfg.datum_depth_m);
  }
  s.saturation.assign(n, 0.0);
  s.co2_mass.assign(n, 0.0);
  s.injected_kg.assign(model.wells.size(), 0.0);
  return s;
}

SimState init_state(const geomodel::Realization& real, const GridLayout& layout, const SimConfig& cfg) {
  return init_state(build_flow_model(real, layout, cfg), cfg);
}

}  // namespace gcs::flowsim
