#include "gcs/surrogate/train.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "gcs/common/error.hpp"
#include "gcs/common/rng.hpp"

namespace gcs::surrogate {

TrainConfig TrainConfig::for_target(TargetKind t) {
  TrainConfig c;
  c.batch_size = t == TargetKind::pressure ? 8 : 4;
  return c;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !(min_rate > 0.0)) throw ArgumentError("learning rates must be positive");
  if (patience < 1) throw ArgumentError("patience must be at least 1");
  if (!(decay_factor > 1.0)) throw ArgumentError("decay factor must exceed 1");
  if (batch_size < 1 || epochs < 0) throw ArgumentError("batch size must be positive and epochs nonnegative");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && adam_eps > 0.0)) {
    throw ArgumentError("invalid moment decay settings");
  }
  if (!(target_loss >= 0.0)) throw ArgumentError("target loss must be nonnegative");
}

Adam::Adam(nn::ParameterStore& params, double beta1, double beta2, double eps)
    : params_(params), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& e : params_.entries()) {
    m_.emplace_back(e.second.size(), 0.0);
    v_.emplace_back(e.second.size(), 0.0);
  }
}

void Adam::step(double rate) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto& entries = params_.entries();
  for (std::size_t p = 0; p < entries.size(); ++p) {
    nn::Var w = entries[p].second;
    const auto& node = w.node();
    if (node->grad.size() != node->value.size()) continue;
    auto& m = m_[p];
    auto& v = v_[p];
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double g = node->grad[i];
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
      node->value.data[i] -= rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  }
  params_.zero_grad();
}

PlateauScheduler::PlateauScheduler(double rate, int patience, double factor, double min_rate)
    : rate_(rate), patience_(patience), factor_(factor), min_rate_(min_rate),
      best_(std::numeric_limits<double>::infinity()) {}

double PlateauScheduler::observe(double loss) {
  if (loss < best_) {
    best_ = loss;
    stale_ = 0;
  } else if (++stale_ >= patience_) {
    rate_ = std::max(rate_ / factor_, min_rate_);
    stale_ = 0;
  }
  return rate_;
}

nn::Var loss(const nn::Var& prediction, const nn::Tensor& target) { return nn::mse(prediction, target); }

namespace {

std::vector<int> range_rows(int begin, int end) {
  std::vector<int> r(end - begin);
  std::iota(r.begin(), r.end(), begin);
  return r;
}

}  // namespace

TrainResult train(SurrogateNet& net, const Dataset& data, const TrainConfig& cfg,
                  const std::function<void(int, double)>& on_epoch) {
  cfg.validate();
  const int n = data.size();
  if (n == 0) throw ArgumentError("training set is empty");
  Adam opt(net.parameters(), cfg.beta1, cfg.beta2, cfg.adam_eps);
  PlateauScheduler sched(cfg.learning_rate, cfg.patience, cfg.decay_factor, cfg.min_rate);
  TrainResult result;
  std::vector<int> order(n);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(cfg.seed, "train-shuffle", static_cast<std::uint64_t>(epoch));
    for (int i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    const double rate = sched.rate();
    double total = 0.0;
    for (int b = 0; b < n; b += cfg.batch_size) {
      const int e = std::min(n, b + cfg.batch_size);
      std::span<const int> rows(order.data() + b, static_cast<std::size_t>(e - b));
      Dataset batch = data.subset(rows);
      nn::Var l = loss(net.forward(nn::constant(batch.inputs)), batch.targets);
      const double lv = l.value().data[0];
      if (!std::isfinite(lv)) throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch));
      total += lv * (e - b);
      nn::backward(l);
      opt.step(rate);
    }
    const double epoch_loss = total / n;
    result.loss_history.push_back(epoch_loss);
    result.rate_history.push_back(rate);
    sched.observe(epoch_loss);
    if (on_epoch) on_epoch(epoch, epoch_loss);
    if (epoch_loss < cfg.target_loss) break;
  }
  return result;
}

double evaluate_loss(const SurrogateNet& net, const Dataset& data, int batch_size) {
  const int n = data.size();
  if (n == 0) throw ArgumentError("evaluation set is empty");
  double total = 0.0;
  for (int b = 0; b < n; b += batch_size) {
    const int e = std::min(n, b + batch_size);
    const auto rows = range_rows(b, e);
    Dataset batch = data.subset(rows);
    nn::NoGradGuard guard;
    total += loss(net.forward(nn::constant(batch.inputs)), batch.targets).value().data[0] * (e - b);
  }
  return total / n;
}

}  // namespace gcs::surrogate
