#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gcs/flowsim/config.hpp"
#include "gcs/flowsim/series.hpp"
#include "gcs/geomodel/layout.hpp"
#include "gcs/geomodel/realization.hpp"

namespace gcs::flowsim {

// Two-point connection between neighbors a and b, with b on the positive side of a along `axis`.
struct Connection {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  std::uint8_t axis = 0;
  double trans = 0.0;       // harmonic-average transmissibility, m^3
  double depth_diff = 0.0;  // depth(a) - depth(b), m
};

struct WellCompletion {
  std::string name;
  std::vector<std::uint32_t> cells;
  std::vector<double> fractions;  // sum to 1
};

// Discretized flow problem: per-cell pore volumes, depths and CO2 densities, interior
// connections (the outer boundary carries none) and well completions.
struct FlowModel {
  GridDims dims;
  std::vector<double> pore_volume;   // at the reference pressure, m^3
  std::vector<double> ref_pressure;  // reference pressure for pore compressibility, Pa
  std::vector<double> depth;
  std::vector<double> co2_density;
  std::vector<Connection> connections;
  // Connection slots per cell in the order x-, x+, y-, y+, z-, z+; -1 where no neighbor exists.
  std::vector<std::array<std::int32_t, 6>> cell_connections;
  std::vector<WellCompletion> wells;

  std::size_t n_cells() const { return pore_volume.size(); }
  // Rebuilds cell_connections from connections.
  void index_connections();
  double pore_volume_at(std::size_t cell, double p, double compressibility) const {
    return pore_volume[cell] * (1.0 + compressibility * (p - ref_pressure[cell]));
  }
};

FlowModel build_flow_model(const geomodel::Realization& real, const geomodel::GridLayout& layout,
                           const SimConfig& cfg);

struct SimState {
  std::vector<double> pressure;
  std::vector<double> saturation;
  std::vector<double> co2_mass;  // kg per cell
  double elapsed_s = 0.0;
  std::vector<double> injected_kg;  // per well
};

// Brine-filled hydrostatic state anchored at the configured datum.
SimState init_state(const FlowModel& model, const SimConfig& cfg);
SimState init_state(const geomodel::Realization& real, const geomodel::GridLayout& layout, const SimConfig& cfg);

}  // namespace gcs::flowsim
