#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gcs::geomodel {

// Per-cell property region. Every cell carries exactly one label.
enum class Region : std::uint8_t {
  target,
  surround,
  caprock,
  middle,
  upper,
  fault1_tm,
  fault1_mu,
  fault2_tm,
  fault2_mu,
  overburden,
  underburden,
};

inline constexpr std::size_t kRegionCount = 11;

std::string_view region_name(Region r);
bool is_fault(Region r);

// Stratigraphic zone of a layer, listed bottom to top.
enum class Zone : std::uint8_t {
  underburden,
  target,
  caprock_lower,
  middle,
  caprock_upper,
  upper,
  overburden,
};

std::string_view zone_name(Zone z);
Zone zone_from_name(std::string_view name);

struct LayerSpec {
  Zone zone = Zone::target;
  int cells = 1;
  double cell_thickness_m = 10.0;
};

struct WellLocation {
  std::string name;
  int i = 0;
  int j = 0;
};

struct LayoutSpec {
  int nx = 24;
  int ny = 24;
  double dx_m = 250.0;
  double dy_m = 250.0;
  // Lateral ring of surround cells around the target aquifer box.
  int surround_margin = 4;
  // Bottom to top.
  std::vector<LayerSpec> layers;
  // Depth (m, positive down) of the top face of the uppermost layer.
  double top_depth_m = 1000.0;
  // Global x indices of the two vertical fault columns.
  std::array<int, 2> fault_x{9, 14};
  std::vector<WellLocation> injectors;
  std::vector<WellLocation> observers;

  static LayoutSpec desk_default();
  static LayoutSpec tiny();
};

// Half-open index box [i0, i1) x [j0, j1) x [k0, k1).
struct Box {
  int i0 = 0, i1 = 0, j0 = 0, j1 = 0, k0 = 0, k1 = 0;
  int nx() const { return i1 - i0; }
  int ny() const { return j1 - j0; }
  int nz() const { return k1 - k0; }
  std::size_t count() const { return static_cast<std::size_t>(nx()) * ny() * nz(); }
  bool contains(int i, int j, int k) const { return i >= i0 && i < i1 && j >= j0 && j < j1 && k >= k0 && k < k1; }
};

// Structured layered grid with its region map. Cell index = (k * ny + j) * nx + i,
// k counted from the bottom layer upward.
class GridLayout {
 public:
  explicit GridLayout(LayoutSpec spec);

  const LayoutSpec& spec() const { return spec_; }
  int nx() const { return spec_.nx; }
  int ny() const { return spec_.ny; }
  int nz() const { return static_cast<int>(zones_.size()); }
  std::size_t cell_count() const { return regions_.size(); }

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * spec_.ny + j) * spec_.nx + i;
  }
  std::array<int, 3> ijk(std::size_t cell) const;

  Region region(std::size_t cell) const { return regions_[cell]; }
  const std::vector<Region>& regions() const { return regions_; }
  Zone zone(int k) const { return zones_[k]; }
  double dz(int k) const { return dz_[k]; }
  double dx() const { return spec_.dx_m; }
  double dy() const { return spec_.dy_m; }
  // Depth (m, positive down) of the center of layer k.
  double depth(int k) const { return depth_[k]; }
  double bulk_volume(std::size_t cell) const { return spec_.dx_m * spec_.dy_m * dz_[ijk(cell)[2]]; }

  const Box& target_box() const { return target_box_; }
  // Box over the three aquifers, the faults and the caprock between them.
  const Box& domain_box() const { return domain_box_; }
  // Target-aquifer cells in index order; this is the Gaussian-field ordering.
  const std::vector<std::size_t>& target_cells() const { return target_cells_; }
  // Layers belonging to a zone, bottom to top.
  std::vector<int> layers_of(Zone z) const;

  const std::vector<WellLocation>& injectors() const { return spec_.injectors; }
  const std::vector<WellLocation>& observers() const { return spec_.observers; }

  // Mirrored layout (x -> nx - 1 - x) including faults and wells.
  GridLayout mirrored_x() const;

 private:
  LayoutSpec spec_;
  std::vector<Zone> zones_;
  std::vector<double> dz_;
  std::vector<double> depth_;
  std::vector<Region> regions_;
  Box target_box_;
  Box domain_box_;
  std::vector<std::size_t> target_cells_;
};

}  // namespace gcs::geomodel
