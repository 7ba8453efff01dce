#pragma once

// Likelihood families with closed-form information quantities.

#include <span>
#include <string>
#include <string_view>
#include <utility>

#include <json.hpp>

#include "refprior/common.hpp"

namespace refprior {

enum class ModelKind { bernoulli_mean, gaussian_mean, gaussian_scale, poisson_rate };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

/// One-parameter family (or diagonal multivariate Gaussian scale).
///
/// Bernoulli accepts the closed interval [0, 1] for sampling, likelihood and
/// divergence so degenerate coins can be represented; the Jeffreys density
/// needs the open interval. All other families use open domains.
struct LikelihoodModel {
  ModelKind kind = ModelKind::bernoulli_mean;
  double sigma = 1.0;     // known standard deviation (gaussian_mean)
  double mu = 0.0;        // known location (gaussian_scale)
  std::size_t dims = 1;   // > 1 only for gaussian_scale

  static LikelihoodModel bernoulli() { return {ModelKind::bernoulli_mean}; }
  static LikelihoodModel gaussian_mean(double sigma = 1.0) {
    return {ModelKind::gaussian_mean, sigma};
  }
  static LikelihoodModel gaussian_scale(std::size_t dims = 1, double mu = 0.0) {
    return {ModelKind::gaussian_scale, 1.0, mu, dims};
  }
  static LikelihoodModel poisson() { return {ModelKind::poisson_rate}; }

  std::size_t param_dim() const { return dims; }

  /// Open (or for Bernoulli closed) parameter support of one coordinate.
  Interval param_domain() const;
  bool in_domain(std::span<const double> theta) const;
  bool in_interior(std::span<const double> theta) const;

  /// Throws DomainError naming the offending coordinate.
  void require_domain(std::span<const double> theta) const;

  friend bool operator==(const LikelihoodModel&, const LikelihoodModel&) = default;
};

/// Observations stored row-major, `dims` values per observation.
struct Dataset {
  std::vector<double> values;
  std::size_t dims = 1;

  std::size_t size() const { return dims == 0 ? 0 : values.size() / dims; }
  std::span<const double> observation(std::size_t i) const {
    return {values.data() + i * dims, dims};
  }
};

/// Dataset summary sufficient for the log-likelihood of every family.
struct SufficientStats {
  std::size_t count = 0;
  double sum = 0.0;                  // sum of x (Bernoulli successes, Poisson counts)
  double log_factorial_sum = 0.0;    // sum of log(x!) for Poisson
  std::vector<double> sum_sq_dev;    // per dim sum of (x - centre)^2 for Gaussians
};

Dataset sample_dataset(const LikelihoodModel& model, std::span<const double> theta,
                       std::size_t n, Rng& rng);

/// Sum of per-observation log densities/masses. An impossible observation
/// yields kLogZero.
double log_likelihood(const LikelihoodModel& model, std::span<const double> theta,
                      const Dataset& data);

SufficientStats summarize(const LikelihoodModel& model, const Dataset& data);
double log_likelihood(const LikelihoodModel& model, std::span<const double> theta,
                      const SufficientStats& stats);

/// Entropy of one observation. Poisson uses a truncated series.
double entropy_per_obs(const LikelihoodModel& model, std::span<const double> theta);

/// KLD[p(x|a) || p(x|b)] for one observation.
double kld_per_obs(const LikelihoodModel& model, std::span<const double> a,
                   std::span<const double> b);

/// Partial derivatives of kld_per_obs with respect to both arguments, written
/// into grad_a and grad_b (overwritten). Requires a and b inside the open domain.
void kld_gradient(const LikelihoodModel& model, std::span<const double> a,
                  std::span<const double> b, std::span<double> grad_a,
                  std::span<double> grad_b);

/// Unnormalized Jeffreys density (the reference prior for these families).
double jeffreys_density_unnorm(const LikelihoodModel& model, std::span<const double> theta);

/// Log density or mass of a single scalar observation; used by the grid
/// baselines. Only one-dimensional models.
double log_density_scalar(const LikelihoodModel& model, double theta, double x);

nlohmann::json to_json(const LikelihoodModel& model);
LikelihoodModel model_from_json(const nlohmann::json& j);

}  // namespace refprior
