#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "gcs/common/rng.hpp"
#include "gcs/nn/ops.hpp"

namespace gcs::testing {

inline nn::Tensor random_tensor(const nn::Shape& s, Rng& rng, double lo = -1.0, double hi = 1.0) {
  nn::Tensor t(s);
  for (auto& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

// Values bounded away from zero, so relu kinks stay out of finite-difference reach.
inline nn::Tensor offset_tensor(const nn::Shape& s, Rng& rng) {
  nn::Tensor t(s);
  for (auto& v : t.data) v = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.1, 1.0);
  return t;
}

// Relative error of one coordinate. The denominator is floored at 1e-3 of the tensor's largest analytic
// gradient component, so near-zero components are judged against the tensor's gradient scale.
inline double relative_error(double analytic, double numeric, const std::vector<double>& grad) {
  double scale = 0.0;
  for (double v : grad) scale = std::max(scale, std::abs(v));
  const double den = std::max({std::abs(numeric), std::abs(analytic), 1e-3 * scale, 1e-12});
  return std::abs(numeric - analytic) / den;
}

struct GradCheck {
  double max_rel = 0.0;
  int checked = 0;
  // Stencils rejected because the two sides took different relu or pooling branches.
  int skipped = 0;
};

inline constexpr int kMaxStencilTries = 50;

// Loss = sum(f(inputs) * R) for a fixed random R; compares the analytic gradient of each input with central
// differences (step h) at `points` random coordinates per input.
inline GradCheck grad_check(const std::function<nn::Var(const std::vector<nn::Var>&)>& f,
                            std::vector<nn::Tensor> inputs, std::uint64_t seed, int points = 5, double h = 1e-5) {
  Rng rng(seed, "gradcheck");
  std::vector<nn::Var> vars;
  for (auto& t : inputs) vars.push_back(nn::parameter(t));
  nn::Var out = f(vars);
  const nn::Tensor r = random_tensor(out.shape(), rng);
  auto scalar = [&](const std::vector<nn::Var>& vs, std::uint64_t& branches) {
    nn::BranchRecorder rec;
    nn::Var o = f(vs);
    branches = rec.fingerprint();
    double s = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i) s += o.value().data[i] * r.data[i];
    return s;
  };
  nn::Var loss = nn::sum(nn::mul(out, nn::constant(r)));
  nn::backward(loss);
  GradCheck res;
  for (std::size_t a = 0; a < vars.size(); ++a) {
    const auto g = vars[a].grad();
    for (int p = 0, tries = 0; p < points && tries < kMaxStencilTries; ++tries) {
      const std::size_t idx = rng.below(inputs[a].size());
      std::vector<nn::Var> plus, minus;
      for (std::size_t b = 0; b < inputs.size(); ++b) {
        nn::Tensor tp = inputs[b], tm = inputs[b];
        if (b == a) {
          tp.data[idx] += h;
          tm.data[idx] -= h;
        }
        plus.push_back(nn::constant(tp));
        minus.push_back(nn::constant(tm));
      }
      std::uint64_t bp = 0, bm = 0;
      const double fp = scalar(plus, bp);
      const double fm = scalar(minus, bm);
      if (bp != bm) {
        ++res.skipped;
        continue;
      }
      const double num = (fp - fm) / (2.0 * h);
      res.max_rel = std::max(res.max_rel, relative_error(g[idx], num, g));
      ++res.checked;
      ++p;
    }
  }
  return res;
}

// Same check for tensors that live inside a model: `params` are perturbed in place and `f()` re-evaluated.
inline GradCheck param_grad_check(const std::function<nn::Var()>& f, const std::vector<nn::Var>& params,
                                  std::uint64_t seed, int points = 5, double h = 1e-5) {
  Rng rng(seed, "param-gradcheck");
  for (const auto& p : params) p.node()->grad.clear();
  nn::Var out = f();
  const nn::Tensor r = random_tensor(out.shape(), rng);
  auto scalar = [&](std::uint64_t& branches) {
    nn::NoGradGuard guard;
    nn::BranchRecorder rec;
    nn::Var o = f();
    branches = rec.fingerprint();
    double s = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i) s += o.value().data[i] * r.data[i];
    return s;
  };
  nn::backward(nn::sum(nn::mul(out, nn::constant(r))));
  GradCheck res;
  for (const auto& p : params) {
    const auto g = p.grad();
    for (int k = 0, tries = 0; k < points && tries < kMaxStencilTries; ++tries) {
      const std::size_t idx = rng.below(p.size());
      double& w = p.mutable_value().data[idx];
      const double w0 = w;
      std::uint64_t bp = 0, bm = 0;
      w = w0 + h;
      const double fp = scalar(bp);
      w = w0 - h;
      const double fm = scalar(bm);
      w = w0;
      if (bp != bm) {
        ++res.skipped;
        continue;
      }
      ++k;
      const double num = (fp - fm) / (2.0 * h);
      res.max_rel = std::max(res.max_rel, relative_error(g[idx], num, g));
      ++res.checked;
    }
  }
  return res;
}

}  // namespace gcs::testing
