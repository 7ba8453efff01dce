#include "refprior/infobound.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "refprior/io.hpp"
#include "refprior/kernels.hpp"

namespace refprior {

std::string_view to_string(MaxMode m) {
  return m == MaxMode::analytic_loo ? "analytic_loo" : "realized_dataset";
}

MaxMode max_mode_from_string(std::string_view s) {
  if (s == "analytic_loo") return MaxMode::analytic_loo;
  if (s == "realized_dataset") return MaxMode::realized_dataset;
  throw ConfigError("unknown max_mode '" + std::string(s) + "'");
}

std::size_t InfoBoundConfig::pools_per_iteration() const {
  if (samples == 0) return 1;
  return std::max<std::size_t>(1, (batch + samples - 1) / samples);
}

void InfoBoundConfig::validate() const {
  if (mode == MaxMode::analytic_loo && samples < 2)
    throw ArgumentError("analytic_loo needs at least two samples per pool");
  if (samples < 1) throw ArgumentError("samples must be positive");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ArgumentError("lr must be positive");
  if (alpha > 0.0 || std::isnan(alpha)) throw ArgumentError("alpha must be <= 0");
}

std::vector<double> TrainTrace::objectives() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.objective);
  return out;
}

std::string TrainTrace::to_csv(bool with_timing) const {
  std::string out = "iteration,objective,elapsed_ms\n";
  for (const auto& r : rows) {
    out += std::to_string(r.iteration) + ',' + format_double(r.objective) + ',' +
           format_double(with_timing ? r.elapsed_ms : 0.0) + '\n';
  }
  return out;
}

std::size_t select_max_sample(const LikelihoodModel& model, std::size_t s,
                              const SampleBatch& batch, MaxMode mode, std::size_t n_obs,
                              Rng& rng) {
  const auto& theta = batch.theta;
  const std::size_t count = theta.rows();
  if (s >= count) throw ArgumentError("sample index out of range");
  if (mode == MaxMode::analytic_loo) {
    if (count < 2) throw ArgumentError("analytic_loo needs at least two samples");
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_index = s == 0 ? 1 : 0;
    for (std::size_t o = 0; o < count; ++o) {
      if (o == s) continue;
      const double k = kld_per_obs(model, theta.row(s), theta.row(o));
      if (k < best) {
        best = k;
        best_index = o;
      }
    }
    return best_index;
  }
  const auto data = sample_dataset(model, theta.row(s), n_obs, rng);
  const auto stats = summarize(model, data);
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  for (std::size_t o = 0; o < count; ++o) {
    const double ll = log_likelihood(model, theta.row(o), stats);
    if (ll > best) {
      best = ll;
      best_index = o;
    }
  }
  return best_index;
}

std::vector<std::size_t> select_all(const LikelihoodModel& model, const SampleBatch& batch,
                                    MaxMode mode, std::size_t n_obs, Rng& rng) {
  if (mode == MaxMode::analytic_loo) return kernels::nearest_by_kld(model, batch.theta);
  const std::uint64_t seed = rng();
  return kernels::argmax_likelihood(model, batch.theta, n_obs, seed);
}

double jrp_value(const LikelihoodModel& model, const SampleBatch& batch,
                 std::span<const std::size_t> selection, std::size_t n_obs) {
  const std::size_t count = batch.size();
  if (count == 0) throw ArgumentError("empty batch");
  if (selection.size() != count) throw ArgumentError("selection size does not match batch");
  double sum = 0.0;
  for (std::size_t s = 0; s < count; ++s)
    sum += kld_per_obs(model, batch.theta.row(s), batch.theta.row(selection[s]));
  return static_cast<double>(n_obs) / static_cast<double>(count) * sum;
}

double jrp_estimate(const LikelihoodModel& model, const SampleBatch& batch, std::size_t n_obs,
                    MaxMode mode, Rng& rng) {
  const auto sel = select_all(model, batch, mode, n_obs, rng);
  return jrp_value(model, batch, sel, n_obs);
}

std::vector<double> jrp_gradient(const LikelihoodModel& model, const PriorShape& prior,
                                 std::span<const double> lambda, const NoiseBatch& noise,
                                 std::span<const std::size_t> selection, std::size_t n_obs) {
  const auto batch = push_forward(prior, lambda, noise);
  const auto terms = kernels::kld_terms(model, batch.theta, selection);
  const double scale = static_cast<double>(n_obs) / static_cast<double>(batch.size());
  std::vector<double> grad(lambda.size(), 0.0);
  std::vector<double> cot(batch.theta.cols());
  for (std::size_t s = 0; s < batch.size(); ++s) {
    for (std::size_t d = 0; d < cot.size(); ++d) cot[d] = scale * terms.grad_theta(s, d);
    grad_sample_wrt_lambda(prior, lambda, noise.eps.row(s), cot, grad);
  }
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (!std::isfinite(grad[i]))
      throw NumericError("non-finite gradient entry " + std::to_string(i));
  return grad;
}

std::vector<double> jrp_gradient(const LikelihoodModel& model, const PriorShape& prior,
                                 std::span<const double> lambda, const NoiseBatch& noise,
                                 std::size_t n_obs, MaxMode mode, Rng& rng) {
  const auto batch = push_forward(prior, lambda, noise);
  const auto sel = select_all(model, batch, mode, n_obs, rng);
  return jrp_gradient(model, prior, lambda, noise, sel, n_obs);
}

double vr_bound(const LikelihoodModel& model, const Dataset& data, const SampleBatch& batch,
                double alpha) {
  if (alpha > 0.0 || std::isnan(alpha)) throw ArgumentError("alpha must be <= 0");
  if (batch.size() == 0) throw ArgumentError("empty batch");
  const auto stats = summarize(model, data);
  std::vector<double> ll(batch.size());
  for (std::size_t s = 0; s < batch.size(); ++s)
    ll[s] = log_likelihood(model, batch.theta.row(s), stats);
  if (std::isinf(alpha)) return *std::max_element(ll.begin(), ll.end());
  const double w = 1.0 - alpha;
  std::vector<double> scaled(ll.size());
  for (std::size_t s = 0; s < ll.size(); ++s) scaled[s] = w * ll[s];
  const double lme = log_sum_exp(scaled) - std::log(static_cast<double>(ll.size()));
  return lme / w;
}

TrainResult train_info_bound(const LikelihoodModel& model, const PriorApprox& prior,
                             const InfoBoundConfig& cfg, Rng& rng) {
  cfg.validate();
  TrainResult result{prior, {}};
  auto& lambda = result.prior.lambda;
  auto opt = AdamState::fresh(lambda.size(), cfg.lr);
  const std::size_t pools = cfg.pools_per_iteration();
  const auto start = std::chrono::steady_clock::now();

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    double objective = 0.0;
    std::vector<double> grad(lambda.size(), 0.0);
    try {
      for (std::size_t p = 0; p < pools; ++p) {
        auto [batch, noise] = sample_prior(prior.shape, lambda, cfg.samples, rng);
        const auto sel = select_all(model, batch, cfg.mode, cfg.n_obs, rng);
        objective += jrp_value(model, batch, sel, cfg.n_obs);
        const auto g = jrp_gradient(model, prior.shape, lambda, noise, sel, cfg.n_obs);
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += g[i];
      }
    } catch (const NumericError& e) {
      throw NumericError("iteration " + std::to_string(it) + ": " + e.what());
    } catch (const DomainError& e) {
      throw NumericError("iteration " + std::to_string(it) + ": " + e.what());
    }
    objective /= static_cast<double>(pools);
    if (!std::isfinite(objective) || objective == kInfiniteDivergence)
      throw NumericError("non-finite objective at iteration " + std::to_string(it));
    for (auto& g : grad) g = -g / static_cast<double>(pools);
    adam_apply(opt, grad, lambda);

    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    result.trace.rows.push_back({it, objective, ms});
    if (cfg.snapshot_interval > 0 && (it + 1) % cfg.snapshot_interval == 0)
      result.trace.snapshots.emplace_back(it + 1, lambda);
  }
  return result;
}

}  // namespace refprior
