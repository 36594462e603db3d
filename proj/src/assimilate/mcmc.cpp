#include "gcs/assimilate/mcmc.hpp"

#include <cmath>
#include <limits>

#include "gcs/common/error.hpp"
#include "gcs/common/stats.hpp"

namespace gcs::assimilate {

using geomodel::kMetaCount;
using geomodel::Metaparameters;
using geomodel::PriorSpec;

void ProposalConfig::validate() const {
  if (!(beta > 0.0 && beta <= 1.0)) throw ArgumentError("pCN beta must lie in (0, 1]");
  if (!(sigma_divisor > 0.0)) throw ArgumentError("proposal sigma divisor must be positive");
  if (burn_in < 0 || chains < 1 || rhat_every < 1 || max_iterations < 1 || latent_store_every < 1) {
    throw ArgumentError("invalid chain lengths or counts");
  }
  if (!(rhat_threshold > 1.0)) throw ArgumentError("R-hat threshold must exceed 1");
}

std::vector<double> pcn_propose(std::span<const double> xi, double beta, Rng& rng, PcnForm form) {
  const double a = form == PcnForm::standard ? std::sqrt(1.0 - beta * beta) : 1.0 - beta * beta;
  std::vector<double> out(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) out[i] = a * xi[i] + beta * rng.normal();
  return out;
}

Metaparameters meta_propose(const Metaparameters& meta, const PriorSpec& prior, double sigma_divisor, Rng& rng) {
  Metaparameters out = meta;
  for (std::size_t i = 0; i < kMetaCount; ++i) {
    const double e = rng.normal();
    const double range = prior.entries[i].range();
    if (range > 0.0) out.values[i] += range / sigma_divisor * e;
  }
  return out;
}

bool mh_accept(double loglike_current, double loglike_proposed, bool in_bounds, Rng& rng) {
  if (!in_bounds || std::isnan(loglike_proposed) || loglike_proposed == -std::numeric_limits<double>::infinity()) {
    return false;
  }
  const double delta = loglike_proposed - loglike_current;
  if (delta >= 0.0) return true;
  return rng.uniform() < std::exp(delta);
}

double Chain::meta_acceptance() const {
  return proposed_meta ? static_cast<double>(accepted_meta) / proposed_meta : 0.0;
}

double Chain::latent_acceptance() const {
  return records.empty() ? 0.0 : static_cast<double>(accepted_latent) / records.size();
}

std::vector<Metaparameters> ChainResults::posterior_meta() const {
  std::vector<Metaparameters> out;
  for (const auto& c : chains) {
    for (std::size_t i = static_cast<std::size_t>(burn_in); i < c.records.size(); ++i) out.push_back(c.records[i].meta);
  }
  return out;
}

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
  const std::size_t m = chains.size();
  if (m < 2) throw ArgumentError("R-hat needs at least two chains");
  const std::size_t n = chains[0].size();
  if (n < 2) throw ArgumentError("R-hat needs at least two samples per chain");
  std::vector<double> means(m), vars(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (chains[j].size() != n) throw ArgumentError("chains must have equal length");
    means[j] = stats::mean(chains[j]);
    vars[j] = stats::sample_variance(chains[j]);
  }
  const double W = stats::mean(vars);
  if (!(W > 0.0)) throw NumericalError("zero within-chain variance");
  const double grand = stats::mean(means);
  std::vector<double> dev(m);
  for (std::size_t j = 0; j < m; ++j) dev[j] = (means[j] - grand) * (means[j] - grand);
  const double B = static_cast<double>(n) / static_cast<double>(m - 1) * stats::pairwise_sum(dev);
  const double nd = static_cast<double>(n);
  const double V = (1.0 - 1.0 / nd) * W + B / nd;
  return std::sqrt(V / W);
}

namespace {

struct ChainState {
  Metaparameters meta;
  std::vector<double> xi;
  double loglike = 0.0;
  Rng rng;
  Chain chain;

  explicit ChainState(std::uint64_t seed) : rng(seed) {}
};

constexpr int kMaxInitTries = 10000;

void init_chain(ChainState& s, const PriorSpec& prior, int n_latent, const LogLikelihoodFn& loglike) {
  for (int attempt = 0; attempt < kMaxInitTries; ++attempt) {
    s.meta = geomodel::sample_metaparameters(prior, s.rng);
    s.xi.assign(n_latent, 0.0);
    for (auto& v : s.xi) v = s.rng.normal();
    s.loglike = loglike(s.meta, s.xi);
    if (std::isfinite(s.loglike)) return;
  }
  throw NumericalError("no prior draw with a finite likelihood to start a chain");
}

void advance(ChainState& s, int iterations, int burn_in, const PriorSpec& prior, const LogLikelihoodFn& loglike,
             const ProposalConfig& cfg) {
  for (int it = 0; it < iterations; ++it) {
    ChainRecord rec;
    auto xi_new = pcn_propose(s.xi, cfg.beta, s.rng, cfg.pcn_form);
    const double ll_xi = loglike(s.meta, xi_new);
    if (mh_accept(s.loglike, ll_xi, true, s.rng)) {
      s.xi = std::move(xi_new);
      s.loglike = ll_xi;
      rec.accepted_latent = true;
      ++s.chain.accepted_latent;
    }
    const Metaparameters meta_new = meta_propose(s.meta, prior, cfg.sigma_divisor, s.rng);
    const bool inside = prior.contains(meta_new);
    const double ll_meta = inside ? loglike(meta_new, s.xi) : -std::numeric_limits<double>::infinity();
    ++s.chain.proposed_meta;
    if (mh_accept(s.loglike, ll_meta, inside, s.rng)) {
      s.meta = meta_new;
      s.loglike = ll_meta;
      rec.accepted_meta = true;
      ++s.chain.accepted_meta;
    }
    if (!prior.contains(s.meta)) throw NumericalError("chain state left the prior support");
    rec.meta = s.meta;
    rec.loglike = s.loglike;
    s.chain.records.push_back(rec);
    const int done = static_cast<int>(s.chain.records.size());
    if (done > burn_in && (done - burn_in) % cfg.latent_store_every == 0) {
      s.chain.latents.push_back(s.xi);
      s.chain.latent_iterations.push_back(done);
    }
  }
}

}  // namespace

ChainResults run_chains(const PriorSpec& prior, int n_latent, const LogLikelihoodFn& loglike,
                        const ProposalConfig& cfg) {
  cfg.validate();
  prior.validate();
  if (n_latent < 0) throw ArgumentError("latent dimension must be nonnegative");
  const int m = cfg.chains;
  std::vector<ChainState> states;
  states.reserve(m);
  for (int c = 0; c < m; ++c) states.emplace_back(derive_seed(cfg.seed, "chain", static_cast<std::uint64_t>(c)));
  for (auto& s : states) init_chain(s, prior, n_latent, loglike);

  ChainResults res;
  res.burn_in = std::min(cfg.burn_in, cfg.max_iterations);
  int done = 0;
  while (done < cfg.max_iterations) {
    // Blocks end at the burn-in boundary and then every rhat_every iterations.
    int block = done < res.burn_in ? res.burn_in - done : cfg.rhat_every;
    block = std::min(block, cfg.max_iterations - done);
#pragma omp parallel for schedule(static, 1)
    for (int c = 0; c < m; ++c) advance(states[c], block, res.burn_in, prior, loglike, cfg);
    done += block;
    const int post = done - res.burn_in;
    if (post < 2 || m < 2) continue;
    RhatPoint point{done, std::vector<double>(kMetaCount, std::numeric_limits<double>::quiet_NaN())};
    bool all_below = true;
    bool any_free = false;
    for (std::size_t p = 0; p < kMetaCount; ++p) {
      if (!(prior.entries[p].range() > 0.0)) continue;
      any_free = true;
      std::vector<std::vector<double>> series(m);
      for (int c = 0; c < m; ++c) {
        const auto& recs = states[c].chain.records;
        for (int i = res.burn_in; i < done; ++i) series[c].push_back(recs[i].meta.values[p]);
      }
      try {
        point.rhat[p] = gelman_rubin(series);
      } catch (const NumericalError&) {
        point.rhat[p] = std::numeric_limits<double>::infinity();
      }
      all_below = all_below && point.rhat[p] < cfg.rhat_threshold;
    }
    res.rhat_trace.push_back(point);
    // With every metaparameter fixed there is nothing to monitor; run to the cap.
    if (all_below && any_free) {
      res.converged = true;
      break;
    }
  }
  res.iterations = done;
  for (auto& s : states) {
    s.chain.final_latent = s.xi;
    res.chains.push_back(std::move(s.chain));
  }
  return res;
}

}  // namespace gcs::assimilate
