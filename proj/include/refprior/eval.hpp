#pragma once

// Two-sample Kolmogorov-Smirnov evaluation against grid-sampled targets.

#include <string>
#include <utility>
#include <vector>

#include "refprior/baselines.hpp"
#include "refprior/common.hpp"
#include "refprior/models.hpp"

namespace refprior {

/// Right-continuous empirical CDF.
class Ecdf {
 public:
  explicit Ecdf(std::vector<double> samples);
  double operator()(double x) const;
  std::size_t size() const { return sorted_.size(); }

 private:
  std::vector<double> sorted_;
};

/// sup_x |F_a(x) - F_b(x)| by a merged walk over both sorted samples.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Column-wise statistic, max over dimensions.
double ks_statistic(const Matrix& a, const Matrix& b);

/// c(alpha) sqrt((n+m)/(nm)) with the asymptotic c(alpha) = sqrt(-ln(alpha/2)/2).
double ks_threshold(std::size_t n, std::size_t m, double alpha = 0.05);

struct KsResult {
  double statistic = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;
  double threshold = 0.0;
  bool reject = false;
};

KsResult ks_test(const std::vector<double>& a, const std::vector<double>& b, double alpha = 0.05);

/// Jeffreys density normalized over the `grid_size` cell centres of bounds.
DiscreteGridDistribution true_rp_sampler(const LikelihoodModel& model, const Interval& bounds,
                                         std::size_t grid_size = 1000);

struct KsdRow {
  std::string method;
  std::size_t n = 0;
  double ksd = 0.0;
  double threshold = 0.0;
};

struct KsdCurve {
  std::vector<KsdRow> rows;
  /// CSV with header method,n,ksd,threshold.
  std::string to_csv() const;
};

/// For each size n (outer) and method (inner, in the given order): KSD of the
/// first n method samples against n fresh truth draws. One truth draw per
/// size is shared by all methods.
KsdCurve ksd_curve(const std::vector<std::pair<std::string, std::vector<double>>>& methods,
                   const DiscreteGridDistribution& truth, const std::vector<std::size_t>& sizes,
                   Rng& rng, double alpha = 0.05);

}  // namespace refprior
