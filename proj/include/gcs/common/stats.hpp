#pragma once

#include <functional>
#include <span>
#include <vector>

namespace gcs::stats {

// Pairwise (cascade) summation: result depends only on the element order.
double pairwise_sum(std::span<const double> values);

double mean(std::span<const double> values);

// Unbiased sample variance (divides by n - 1). Requires n >= 2.
double sample_variance(std::span<const double> values);

// Nearest-rank percentile, p in [0, 100].
double percentile_nearest_rank(std::span<const double> values, double p);

double normal_cdf(double x);
double normal_quantile(double p);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// One-sample Kolmogorov-Smirnov test against a continuous reference CDF.
KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf);

// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_survival(double lambda);

}  // namespace gcs::stats
