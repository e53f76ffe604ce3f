#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace nlfk {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;
};

/// Ordinary least squares y = intercept + slope * x. Needs >= 2 points.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value
/// (Stephens' small-sample correction).
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Kolmogorov survival function Q_KS(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

/// Runs fn(i) for i in [0, n) over `threads` workers. Callers write results
/// into slot i so the outcome never depends on scheduling.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// Worker count from an explicit request, else NONLOCAL_FK_THREADS, else the
/// hardware concurrency.
int resolve_threads(int requested);

}  // namespace nlfk
