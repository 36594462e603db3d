#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gcs/nn/layers.hpp"
#include "gcs/surrogate/data.hpp"
#include "gcs/surrogate/net.hpp"

namespace gcs::surrogate {

struct TrainConfig {
  double learning_rate = 5e-4;
  int patience = 10;
  double decay_factor = 2.0;
  double min_rate = 1e-7;
  int batch_size = 4;
  int epochs = 300;
  std::uint64_t seed = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  // Stop once an epoch's mean loss falls below this; 0 runs every epoch.
  double target_loss = 0.0;

  // Batch 8 for pressure, 4 for saturation.
  static TrainConfig for_target(TargetKind t);
  void validate() const;
};

class Adam {
 public:
  Adam(nn::ParameterStore& params, double beta1, double beta2, double eps);
  // Applies one update from the accumulated gradients, then clears them.
  void step(double rate);
  long steps() const { return t_; }

 private:
  nn::ParameterStore& params_;
  double beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

// Divides the rate by `factor` after `patience` consecutive epochs without a new best loss.
class PlateauScheduler {
 public:
  PlateauScheduler(double rate, int patience, double factor, double min_rate);
  // Records an epoch loss; returns the rate for the next epoch.
  double observe(double loss);
  double rate() const { return rate_; }

 private:
  double rate_;
  int patience_;
  double factor_;
  double min_rate_;
  double best_;
  int stale_ = 0;
};

struct TrainResult {
  std::vector<double> loss_history;
  std::vector<double> rate_history;
};

// Per-element mean squared error of a prediction batch.
nn::Var loss(const nn::Var& prediction, const nn::Tensor& target);

// Mini-batch Adam on the per-element mean squared error with the plateau schedule.
// `on_epoch(epoch, loss)` is called after every epoch when set.
TrainResult train(SurrogateNet& net, const Dataset& data, const TrainConfig& cfg,
                  const std::function<void(int, double)>& on_epoch = {});

double evaluate_loss(const SurrogateNet& net, const Dataset& data, int batch_size);

}  // namespace gcs::surrogate
