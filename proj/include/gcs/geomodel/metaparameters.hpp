#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

#include "gcs/common/rng.hpp"

namespace gcs::geomodel {

// Order matches the scenario-parameter vector used throughout the workflow.
enum class Param : std::size_t {
  mu_logk,
  sigma_logk,
  log10_ar,
  d,
  e,
  k_m,
  k_u,
  log10_kf1_tm,
  log10_kf1_mu,
  log10_kf2_tm,
  log10_kf2_mu,
};

inline constexpr std::size_t kMetaCount = 11;

std::string_view param_name(std::size_t index);
inline std::string_view param_name(Param p) { return param_name(static_cast<std::size_t>(p)); }

// Scenario parameters, each in its sampling scale (log10 fields carry the log10 value).
struct Metaparameters {
  std::array<double, kMetaCount> values{};

  double& operator[](Param p) { return values[static_cast<std::size_t>(p)]; }
  double operator[](Param p) const { return values[static_cast<std::size_t>(p)]; }

  double anisotropy_ratio() const;
  // Physical fault permeability (md); fault is 0 or 1, segment tm (true) or mu (false).
  double fault_permeability(int fault, bool target_middle) const;

  bool operator==(const Metaparameters&) const = default;
};

enum class Scale : std::uint8_t { linear, log10 };

struct PriorEntry {
  double lower = 0.0;
  double upper = 1.0;
  Scale scale = Scale::linear;

  double range() const { return upper - lower; }
};

// Independent uniform priors, one per metaparameter, on the sampling scale.
struct PriorSpec {
  std::array<PriorEntry, kMetaCount> entries{};

  static PriorSpec table_default();
  void validate() const;
  bool contains(const Metaparameters& m) const;
  const PriorEntry& operator[](Param p) const { return entries[static_cast<std::size_t>(p)]; }
};

Metaparameters sample_metaparameters(const PriorSpec& prior, Rng& rng);
Metaparameters sample_metaparameters(const PriorSpec& prior, std::uint64_t seed);

}  // namespace gcs::geomodel
