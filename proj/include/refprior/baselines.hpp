#pragma once

// Literature baselines: the Monte Carlo pointwise estimator of the reference
// prior (evaluated on a grid and normalized), the iterative MCMC sampler of
// the reference prior, and the flat prior.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "refprior/common.hpp"
#include "refprior/models.hpp"
#include "refprior/priors.hpp"

namespace refprior {

/// Default bounds used for improper priors: Bernoulli (1e-3, 1-1e-3),
/// Gaussian scale (0.1, 10), Poisson rate (0.1, 20), Gaussian mean (-10, 10).
Interval default_bounds(const LikelihoodModel& model);

struct BergerConfig {
  std::size_t datasets = 100;   // J
  std::size_t samples = 50;     // S
  std::size_t n_obs = 500;      // N
  std::size_t grid_size = 1000; // G
  Interval bounds{1e-3, 1.0 - 1e-3};

  void validate() const;
};

/// log of exp{(1/J) sum_j log[p(D_j|theta0) / sum_s p(D_j|theta_s)]} with
/// D_j ~ p(.|theta0) and, for each dataset, fresh theta_s ~ Uniform(bounds).
double berger_log_prior_at(const LikelihoodModel& model, double theta0, const BergerConfig& cfg,
                           Rng& rng);

/// Same estimate with caller-supplied theta_s shared by every dataset.
double berger_log_prior_at(const LikelihoodModel& model, double theta0, const BergerConfig& cfg,
                           std::span<const double> prior_samples, Rng& rng);

/// Normalized point masses on a grid with inverse-CDF sampling.
class DiscreteGridDistribution {
 public:
  /// Normalizes in log space. Throws NumericError if every weight is log 0.
  static DiscreteGridDistribution from_log_weights(std::vector<double> points,
                                                   std::span<const double> log_weights);

  const std::vector<double>& points() const { return points_; }
  const std::vector<double>& probabilities() const { return probs_; }
  const std::vector<double>& cdf() const { return cdf_; }

  double sample(Rng& rng) const;
  std::vector<double> sample(std::size_t n, Rng& rng) const;

  /// CSV with header point,probability.
  std::string to_csv() const;

 private:
  std::vector<double> points_;
  std::vector<double> probs_;
  std::vector<double> cdf_;
};

/// Berger estimate at the cfg.grid_size cell centres of cfg.bounds. Each
/// grid point uses its own stream derived from one draw of rng.
DiscreteGridDistribution berger_grid_sampler(const LikelihoodModel& model,
                                             const BergerConfig& cfg, Rng& rng);

struct McmcConfig {
  std::size_t iterations = 10000;          // T
  std::size_t samples_per_iteration = 50;  // S_t
  std::size_t x_grid_size = 1000;
  std::size_t kept = 1000;
  Interval bounds{1e-3, 1.0 - 1e-3};

  void validate() const;
};

/// Discretized sample space with quadrature weights.
struct SampleSpaceGrid {
  std::vector<double> x;
  std::vector<double> dx;
};

/// {0,1} for Bernoulli, {0..size-1} for Poisson (unit weights); for the
/// Gaussian families a uniform grid over centre +- 6 sigma_max with trapezoid
/// weights.
SampleSpaceGrid sample_space_grid(const LikelihoodModel& model, const Interval& bounds,
                                  std::size_t size);

struct McmcState {
  std::size_t t = 0;
  double theta = 0.0;
  std::vector<double> w;  // W^t over the sample-space grid
  std::vector<double> kept;
};

/// log p^{t+1}(proposal) - log p^{t+1}(current) under the iterated target
///   log p^{t+1}(theta) = -(t+1) H(theta) - sum_x dx W^t(x) p(x|theta).
/// `current_pdf` and `proposal_pdf` are p(x|.) on the grid.
double lw_log_acceptance(std::size_t t, double entropy_current, double entropy_proposal,
                         std::span<const double> w, std::span<const double> dx,
                         std::span<const double> current_pdf,
                         std::span<const double> proposal_pdf);

/// Per-iteration record for replaying the W recursion.
struct McmcIterationRecord {
  std::vector<double> window;      // the S_t states used for the W update
  std::vector<double> log_mixture; // log (1/S_t) sum_s p(x|theta_s) on the grid
};

/// Metropolis-Hastings with a uniform proposal over cfg.bounds. The S_t
/// samples of iteration t are the chain's last S_t states (fewer early on).
/// Returns the last cfg.kept states.
SampleBatch lw_mcmc(const LikelihoodModel& model, const McmcConfig& cfg, Rng& rng,
                    McmcState* final_state = nullptr,
                    std::vector<McmcIterationRecord>* records = nullptr);

/// n uniform draws in the box given by bounds (one interval per dimension).
SampleBatch uniform_sampler(std::span<const Interval> bounds, std::size_t n, Rng& rng);

}  // namespace refprior
