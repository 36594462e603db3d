#include "gcs/geomodel/layout.hpp"

#include <algorithm>
#include <utility>

#include "gcs/common/error.hpp"

namespace gcs::geomodel {

std::string_view region_name(Region r) {
  switch (r) {
    case Region::target: return "target";
    case Region::surround: return "surround";
    case Region::caprock: return "caprock";
    case Region::middle: return "middle";
    case Region::upper: return "upper";
    case Region::fault1_tm: return "fault1_tm";
    case Region::fault1_mu: return "fault1_mu";
    case Region::fault2_tm: return "fault2_tm";
    case Region::fault2_mu: return "fault2_mu";
    case Region::overburden: return "overburden";
    case Region::underburden: return "underburden";
  }
  return "unknown";
}

bool is_fault(Region r) {
  return r == Region::fault1_tm || r == Region::fault1_mu || r == Region::fault2_tm || r == Region::fault2_mu;
}

std::string_view zone_name(Zone z) {
  switch (z) {
    case Zone::underburden: return "underburden";
    case Zone::target: return "target";
    case Zone::caprock_lower: return "caprock_lower";
    case Zone::middle: return "middle";
    case Zone::caprock_upper: return "caprock_upper";
    case Zone::upper: return "upper";
    case Zone::overburden: return "overburden";
  }
  return "unknown";
}

Zone zone_from_name(std::string_view name) {
  for (auto z : {Zone::underburden, Zone::target, Zone::caprock_lower, Zone::middle, Zone::caprock_upper, Zone::upper,
                 Zone::overburden}) {
    if (zone_name(z) == name) return z;
  }
  throw ArgumentError("unknown layer zone '" + std::string(name) + "'");
}

LayoutSpec LayoutSpec::desk_default() {
  LayoutSpec s;
  s.nx = 24;
  s.ny = 24;
  s.dx_m = 250.0;
  s.dy_m = 250.0;
  s.surround_margin = 4;
  s.layers = {{Zone::underburden, 1, 50.0}, {Zone::target, 8, 12.5},       {Zone::caprock_lower, 2, 40.0},
              {Zone::middle, 2, 20.0},      {Zone::caprock_upper, 2, 50.0}, {Zone::upper, 2, 20.0},
              {Zone::overburden, 1, 50.0}};
  s.top_depth_m = 1500.0;
  s.fault_x = {9, 14};
  s.injectors = {{"I1", 6, 9}, {"I2", 17, 14}};
  s.observers = {{"O1", 8, 13}, {"O2", 15, 10}, {"O3", 11, 12}};
  return s;
}

LayoutSpec LayoutSpec::tiny() {
  LayoutSpec s;
  s.nx = 12;
  s.ny = 12;
  s.dx_m = 400.0;
  s.dy_m = 400.0;
  s.surround_margin = 2;
  s.layers = {{Zone::underburden, 1, 50.0}, {Zone::target, 4, 20.0},         {Zone::caprock_lower, 1, 80.0},
              {Zone::middle, 1, 20.0},      {Zone::caprock_upper, 1, 100.0}, {Zone::upper, 1, 20.0},
              {Zone::overburden, 1, 50.0}};
  s.top_depth_m = 1580.0;
  s.fault_x = {4, 7};
  s.injectors = {{"I1", 3, 5}, {"I2", 8, 6}};
  s.observers = {{"O1", 3, 8}, {"O2", 8, 3}, {"O3", 6, 5}};
  return s;
}

namespace {

Region fault_region(int fault, Zone z) {
  const bool lower = z == Zone::underburden || z == Zone::target || z == Zone::caprock_lower || z == Zone::middle;
  if (fault == 0) return lower ? Region::fault1_tm : Region::fault1_mu;
  return lower ? Region::fault2_tm : Region::fault2_mu;
}

Region layer_region(Zone z, bool in_target_box) {
  switch (z) {
    case Zone::underburden: return Region::underburden;
    case Zone::target: return in_target_box ? Region::target : Region::surround;
    case Zone::caprock_lower:
    case Zone::caprock_upper: return Region::caprock;
    case Zone::middle: return Region::middle;
    case Zone::upper: return Region::upper;
    case Zone::overburden: return Region::overburden;
  }
  return Region::caprock;
}

}  // namespace

GridLayout::GridLayout(LayoutSpec spec) : spec_(std::move(spec)) {
  if (spec_.nx <= 0 || spec_.ny <= 0) throw ArgumentError("grid dimensions must be positive");
  if (spec_.dx_m <= 0.0 || spec_.dy_m <= 0.0) throw ArgumentError("cell sizes must be positive");
  if (spec_.surround_margin < 0 || 2 * spec_.surround_margin >= std::min(spec_.nx, spec_.ny)) {
    throw ArgumentError("surround margin leaves no target aquifer");
  }
  for (const auto& layer : spec_.layers) {
    if (layer.cells <= 0 || layer.cell_thickness_m <= 0.0) throw ArgumentError("layer cells and thickness must be positive");
    for (int c = 0; c < layer.cells; ++c) {
      zones_.push_back(layer.zone);
      dz_.push_back(layer.cell_thickness_m);
    }
  }
  if (zones_.empty()) throw ArgumentError("layout has no layers");
  if (!std::is_sorted(zones_.begin(), zones_.end())) {
    throw ArgumentError("layers must be listed bottom to top in stratigraphic order");
  }
  for (Zone required : {Zone::target, Zone::caprock_lower, Zone::middle, Zone::caprock_upper, Zone::upper}) {
    if (std::find(zones_.begin(), zones_.end(), required) == zones_.end()) {
      throw ArgumentError("layout is missing the " + std::string(zone_name(required)) + " zone");
    }
  }

  // Depth of cell centers, from the top of the stack downward.
  const int nz = static_cast<int>(zones_.size());
  depth_.assign(nz, 0.0);
  double top = spec_.top_depth_m;
  for (int k = nz - 1; k >= 0; --k) {
    depth_[k] = top + 0.5 * dz_[k];
    top += dz_[k];
  }

  const int m = spec_.surround_margin;
  const auto target_layers = layers_of(Zone::target);
  const auto upper_layers = layers_of(Zone::upper);
  target_box_ = {m, spec_.nx - m, m, spec_.ny - m, target_layers.front(), target_layers.back() + 1};
  domain_box_ = {m, spec_.nx - m, m, spec_.ny - m, target_layers.front(), upper_layers.back() + 1};

  for (int f = 0; f < 2; ++f) {
    const int x = spec_.fault_x[f];
    if (x <= target_box_.i0 || x >= target_box_.i1 - 1) {
      throw ArgumentError("fault columns must lie strictly inside the target aquifer box");
    }
  }
  if (spec_.fault_x[0] == spec_.fault_x[1]) throw ArgumentError("fault columns must differ");

  regions_.resize(static_cast<std::size_t>(spec_.nx) * spec_.ny * nz);
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < spec_.ny; ++j) {
      for (int i = 0; i < spec_.nx; ++i) {
        Region r = layer_region(zones_[k], target_box_.contains(i, j, k));
        if (zones_[k] != Zone::overburden) {
          for (int f = 0; f < 2; ++f) {
            if (i == spec_.fault_x[f]) r = fault_region(f, zones_[k]);
          }
        }
        regions_[index(i, j, k)] = r;
      }
    }
  }
  for (std::size_t c = 0; c < regions_.size(); ++c) {
    if (regions_[c] == Region::target) target_cells_.push_back(c);
  }

  auto check_well = [&](const WellLocation& w, bool injector) {
    if (!target_box_.contains(w.i, w.j, target_box_.k0)) {
      throw ArgumentError("well " + w.name + " lies outside the target aquifer box");
    }
    if (injector && regions_[index(w.i, w.j, target_box_.k0)] != Region::target) {
      throw ArgumentError("injector " + w.name + " must be completed in target-aquifer cells");
    }
  };
  for (const auto& w : spec_.injectors) check_well(w, true);
  for (const auto& w : spec_.observers) check_well(w, false);
}

std::array<int, 3> GridLayout::ijk(std::size_t cell) const {
  const auto nx = static_cast<std::size_t>(spec_.nx);
  const auto ny = static_cast<std::size_t>(spec_.ny);
  return {static_cast<int>(cell % nx), static_cast<int>((cell / nx) % ny), static_cast<int>(cell / (nx * ny))};
}

std::vector<int> GridLayout::layers_of(Zone z) const {
  std::vector<int> out;
  for (int k = 0; k < nz(); ++k) {
    if (zones_[k] == z) out.push_back(k);
  }
  return out;
}

GridLayout GridLayout::mirrored_x() const {
  LayoutSpec s = spec_;
  for (auto& x : s.fault_x) x = spec_.nx - 1 - x;
  for (auto& w : s.injectors) w.i = spec_.nx - 1 - w.i;
  for (auto& w : s.observers) w.i = spec_.nx - 1 - w.i;
  return GridLayout(std::move(s));
}

}  // namespace gcs::geomodel
