#include "gcs/geomodel/metaparameters.hpp"

#include <cmath>
#include <string>

#include "gcs/common/error.hpp"

namespace gcs::geomodel {

namespace {
constexpr std::array<std::string_view, kMetaCount> kNames = {
    "mu_logk", "sigma_logk", "log10_ar", "d", "e", "k_m", "k_u",
    "log10_kf1_tm", "log10_kf1_mu", "log10_kf2_tm", "log10_kf2_mu",
};
}  // namespace

std::string_view param_name(std::size_t index) {
  if (index >= kMetaCount) throw ArgumentError("metaparameter index out of range");
  return kNames[index];
}

double Metaparameters::anisotropy_ratio() const { return std::pow(10.0, (*this)[Param::log10_ar]); }

double Metaparameters::fault_permeability(int fault, bool target_middle) const {
  Param p = Param::log10_kf1_tm;
  if (fault == 0) p = target_middle ? Param::log10_kf1_tm : Param::log10_kf1_mu;
  else p = target_middle ? Param::log10_kf2_tm : Param::log10_kf2_mu;
  return std::pow(10.0, (*this)[p]);
}

PriorSpec PriorSpec::table_default() {
  PriorSpec p;
  auto set = [&](Param k, double lo, double hi, Scale s) { p.entries[static_cast<std::size_t>(k)] = {lo, hi, s}; };
  set(Param::mu_logk, 4.0, 6.0, Scale::linear);
  set(Param::sigma_logk, 1.0, 1.5, Scale::linear);
  set(Param::log10_ar, -1.3, -0.7, Scale::log10);
  set(Param::d, 0.02, 0.04, Scale::linear);
  set(Param::e, 0.06, 0.08, Scale::linear);
  set(Param::k_m, 50.0, 500.0, Scale::linear);
  set(Param::k_u, 50.0, 500.0, Scale::linear);
  set(Param::log10_kf1_tm, -1.0, 2.5, Scale::log10);
  set(Param::log10_kf1_mu, -1.0, 2.5, Scale::log10);
  set(Param::log10_kf2_tm, -1.0, 2.5, Scale::log10);
  set(Param::log10_kf2_mu, -1.0, 2.5, Scale::log10);
  return p;
}

void PriorSpec::validate() const {
  for (std::size_t i = 0; i < kMetaCount; ++i) {
    const auto& e = entries[i];
    if (!std::isfinite(e.lower) || !std::isfinite(e.upper) || e.lower > e.upper) {
      throw ArgumentError("invalid prior interval for " + std::string(kNames[i]));
    }
  }
}

bool PriorSpec::contains(const Metaparameters& m) const {
  for (std::size_t i = 0; i < kMetaCount; ++i) {
    if (!(m.values[i] >= entries[i].lower && m.values[i] <= entries[i].upper)) return false;
  }
  return true;
}

Metaparameters sample_metaparameters(const PriorSpec& prior, Rng& rng) {
  prior.validate();
  Metaparameters m;
  for (std::size_t i = 0; i < kMetaCount; ++i) {
    const auto& e = prior.entries[i];
    m.values[i] = e.lower == e.upper ? e.lower : rng.uniform(e.lower, e.upper);
  }
  return m;
}

Metaparameters sample_metaparameters(const PriorSpec& prior, std::uint64_t seed) {
  Rng rng(seed, "metaparameters");
  return sample_metaparameters(prior, rng);
}

}  // namespace gcs::geomodel
