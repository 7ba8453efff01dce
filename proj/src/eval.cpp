#include "refprior/eval.hpp"

#include <algorithm>
#include <cmath>

#include "refprior/io.hpp"

namespace refprior {

Ecdf::Ecdf(std::vector<double> samples) : sorted_(std::move(samples)) {
  if (sorted_.empty()) throw ArgumentError("ecdf needs at least one sample");
  std::sort(sorted_.begin(), sorted_.end());
}

double Ecdf::operator()(double x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ArgumentError("ks_statistic needs nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return best;
}

double ks_statistic(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw ArgumentError("samples differ in dimension");
  double best = 0.0;
  for (std::size_t c = 0; c < a.cols(); ++c)
    best = std::max(best, ks_statistic(a.column(c), b.column(c)));
  return best;
}

double ks_threshold(std::size_t n, std::size_t m, double alpha) {
  if (n < 1 || m < 1) throw ArgumentError("ks_threshold needs positive sample counts");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

KsResult ks_test(const std::vector<double>& a, const std::vector<double>& b, double alpha) {
  KsResult r;
  r.statistic = ks_statistic(a, b);
  r.n = a.size();
  r.m = b.size();
  r.threshold = ks_threshold(r.n, r.m, alpha);
  r.reject = r.statistic > r.threshold;
  return r;
}

DiscreteGridDistribution true_rp_sampler(const LikelihoodModel& model, const Interval& bounds,
                                         std::size_t grid_size) {
  if (model.param_dim() != 1) throw ArgumentError("grid sampler supports one dimension only");
  if (!std::isfinite(bounds.lower) || !std::isfinite(bounds.upper) || !(bounds.lower < bounds.upper))
    throw ArgumentError("bounds must be finite with lower < upper");
  auto grid = cell_centres(bounds, grid_size);
  std::vector<double> logw(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t[1] = {grid[i]};
    logw[i] = std::log(jeffreys_density_unnorm(model, t));
  }
  return DiscreteGridDistribution::from_log_weights(std::move(grid), logw);
}

std::string KsdCurve::to_csv() const {
  std::string out = "method,n,ksd,threshold\n";
  for (const auto& r : rows)
    out += r.method + ',' + std::to_string(r.n) + ',' + format_double(r.ksd) + ',' +
           format_double(r.threshold) + '\n';
  return out;
}

KsdCurve ksd_curve(const std::vector<std::pair<std::string, std::vector<double>>>& methods,
                   const DiscreteGridDistribution& truth, const std::vector<std::size_t>& sizes,
                   Rng& rng, double alpha) {
  std::size_t largest = 0;
  for (auto n : sizes) {
    if (n < 1) throw ArgumentError("curve sizes must be positive");
    largest = std::max(largest, n);
  }
  for (const auto& [name, samples] : methods)
    if (samples.size() < largest)
      throw ArgumentError("method '" + name + "' has " + std::to_string(samples.size()) +
                          " samples, needs " + std::to_string(largest));
  KsdCurve curve;
  for (auto n : sizes) {
    const auto ref = truth.sample(n, rng);
    const double thr = ks_threshold(n, n, alpha);
    for (const auto& [name, samples] : methods) {
      std::vector<double> head(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(n));
      curve.rows.push_back({name, n, ks_statistic(std::move(head), ref), thr});
    }
  }
  return curve;
}

}  // namespace refprior
