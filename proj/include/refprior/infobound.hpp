#pragma once

// Mutual-information lower bound with the VR-max estimator of log p(D).
//
// For S samples theta_s of the prior, the Monte Carlo objective is
//   J = (N / S) * sum_s KLD[p(x|theta_s) || p(x|theta_max(s))]
// where theta_max(s) is the sample that best explains data generated by
// theta_s. Two selection rules are provided:
//   analytic_loo     - argmin over s' != s of KLD(theta_s, theta_s'), i.e. the
//                      maximizer of the expected log-likelihood, excluding s
//                      itself (with s included the analytic form is always 0);
//   realized_dataset - draw N observations from theta_s and take the
//                      likelihood argmax over all samples, s included.
// Gradients hold the selected indices fixed.

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "refprior/adam.hpp"
#include "refprior/common.hpp"
#include "refprior/models.hpp"
#include "refprior/priors.hpp"

namespace refprior {

enum class MaxMode { analytic_loo, realized_dataset };

std::string_view to_string(MaxMode m);
MaxMode max_mode_from_string(std::string_view s);

/// Marker for the VR-max (alpha -> -infinity) estimator.
inline constexpr double kVrMax = -std::numeric_limits<double>::infinity();

struct InfoBoundConfig {
  std::size_t samples = 50;        // S, the VR-max pool
  std::size_t n_obs = 1;           // N, dataset size
  std::size_t iterations = 250;
  std::size_t batch = 100;         // fresh noise draws per iteration, in pools of S
  double lr = 1e-4;
  MaxMode mode = MaxMode::analytic_loo;
  double alpha = kVrMax;
  std::size_t snapshot_interval = 0;  // 0 disables lambda snapshots

  /// Pools of S drawn per iteration: ceil(batch / S), at least one.
  std::size_t pools_per_iteration() const;
  void validate() const;
};

struct TraceRow {
  std::size_t iteration = 0;
  double objective = 0.0;
  double elapsed_ms = 0.0;
};

struct TrainTrace {
  std::vector<TraceRow> rows;
  std::vector<std::pair<std::size_t, std::vector<double>>> snapshots;

  std::size_t size() const { return rows.size(); }
  std::vector<double> objectives() const;
  /// CSV with header iteration,objective,elapsed_ms. Timing is written as 0
  /// unless with_timing is set so that reruns are byte-identical.
  std::string to_csv(bool with_timing = false) const;
};

struct TrainResult {
  PriorApprox prior;
  TrainTrace trace;
};

/// theta_max index for sample s. analytic_loo needs S >= 2.
std::size_t select_max_sample(const LikelihoodModel& model, std::size_t s,
                              const SampleBatch& batch, MaxMode mode, std::size_t n_obs,
                              Rng& rng);

/// theta_max for every sample; realized mode draws one dataset per sample from
/// streams derived from a single draw of rng.
std::vector<std::size_t> select_all(const LikelihoodModel& model, const SampleBatch& batch,
                                    MaxMode mode, std::size_t n_obs, Rng& rng);

/// J for a fixed selection.
double jrp_value(const LikelihoodModel& model, const SampleBatch& batch,
                 std::span<const std::size_t> selection, std::size_t n_obs);

double jrp_estimate(const LikelihoodModel& model, const SampleBatch& batch, std::size_t n_obs,
                    MaxMode mode, Rng& rng);

/// dJ/dlambda with the selection held fixed; gradients flow through both
/// theta_s and theta_max(s).
std::vector<double> jrp_gradient(const LikelihoodModel& model, const PriorShape& prior,
                                 std::span<const double> lambda, const NoiseBatch& noise,
                                 std::span<const std::size_t> selection, std::size_t n_obs);

/// Convenience overload that selects with `mode` first.
std::vector<double> jrp_gradient(const LikelihoodModel& model, const PriorShape& prior,
                                 std::span<const double> lambda, const NoiseBatch& noise,
                                 std::size_t n_obs, MaxMode mode, Rng& rng);

/// Renyi upper bound on log p(D): (1/(1-alpha)) log mean_s p(D|theta_s)^(1-alpha)
/// for finite alpha <= 0, max_s log p(D|theta_s) for kVrMax.
double vr_bound(const LikelihoodModel& model, const Dataset& data, const SampleBatch& batch,
                double alpha);

/// Ascends J with AdaM for cfg.iterations; each iteration averages the
/// objective and gradient over the iteration's pools.
TrainResult train_info_bound(const LikelihoodModel& model, const PriorApprox& prior,
                             const InfoBoundConfig& cfg, Rng& rng);

}  // namespace refprior
