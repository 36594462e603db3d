#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gcs/common/rng.hpp"
#include "gcs/geomodel/metaparameters.hpp"

namespace gcs::assimilate {

enum class PcnForm : std::uint8_t {
  // xi' = sqrt(1 - beta^2) xi + beta eps; preserves N(0, I).
  standard,
  // xi' = (1 - beta^2) xi + beta eps, as printed; kept for comparison only.
  printed,
};

struct ProposalConfig {
  double beta = 0.05;
  double sigma_divisor = 80.0;
  int burn_in = 5000;
  int chains = 3;
  double rhat_threshold = 1.1;
  int rhat_every = 500;
  int max_iterations = 200000;
  // Latent vectors are stored every this many post-burn-in iterations.
  int latent_store_every = 50;
  PcnForm pcn_form = PcnForm::standard;
  std::uint64_t seed = 1;

  void validate() const;
};

std::vector<double> pcn_propose(std::span<const double> xi, double beta, Rng& rng,
                                PcnForm form = PcnForm::standard);

// Independent Gaussian step per parameter with sigma_i = range_i / divisor; zero-range entries stay fixed.
geomodel::Metaparameters meta_propose(const geomodel::Metaparameters& meta, const geomodel::PriorSpec& prior,
                                      double sigma_divisor, Rng& rng);

// Rejects out-of-bounds proposals; otherwise accepts with probability min(1, exp(proposed - current)).
bool mh_accept(double loglike_current, double loglike_proposed, bool in_bounds, Rng& rng);

// Returns -infinity for states the forward model cannot evaluate (for example invalid porosity).
using LogLikelihoodFn = std::function<double(const geomodel::Metaparameters&, std::span<const double> xi)>;

struct ChainRecord {
  geomodel::Metaparameters meta;
  double loglike = 0.0;
  bool accepted_meta = false;
  bool accepted_latent = false;
};

struct Chain {
  // One record per iteration, burn-in included.
  std::vector<ChainRecord> records;
  // Post-burn-in latent vectors with the iteration each belongs to.
  std::vector<std::vector<double>> latents;
  std::vector<int> latent_iterations;
  std::vector<double> final_latent;
  long accepted_meta = 0;
  long accepted_latent = 0;
  long proposed_meta = 0;

  double meta_acceptance() const;
  double latent_acceptance() const;
};

struct RhatPoint {
  int iteration = 0;
  std::vector<double> rhat;  // per metaparameter; NaN for zero-range parameters
};

struct ChainResults {
  std::vector<Chain> chains;
  std::vector<RhatPoint> rhat_trace;
  int iterations = 0;
  int burn_in = 0;
  bool converged = false;

  // Post-burn-in metaparameter states of all chains, chain-major.
  std::vector<geomodel::Metaparameters> posterior_meta() const;
};

// Multi-chain pCN-within-Gibbs: each iteration updates xi by pCN, then the metaparameters by a random walk,
// each with its own likelihood evaluation and accept test. Chains run in blocks of rhat_every iterations;
// after burn-in the run stops once every R-hat is below the threshold, or at max_iterations.
ChainResults run_chains(const geomodel::PriorSpec& prior, int n_latent, const LogLikelihoodFn& loglike,
                        const ProposalConfig& cfg);

// Potential scale reduction of one scalar across m >= 2 chains of equal length n >= 2.
double gelman_rubin(const std::vector<std::vector<double>>& chains);

}  // namespace gcs::assimilate
