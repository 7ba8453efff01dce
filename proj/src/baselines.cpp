#include "refprior/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "refprior/io.hpp"
#include "refprior/kernels.hpp"

namespace refprior {

namespace {

void require_scalar(const LikelihoodModel& model, const char* what) {
  if (model.param_dim() != 1)
    throw ArgumentError(std::string(what) + " supports one-dimensional models only");
}

void require_bounds(const Interval& b) {
  if (!std::isfinite(b.lower) || !std::isfinite(b.upper) || !(b.lower < b.upper))
    throw ArgumentError("bounds must be finite with lower < upper");
}

std::vector<double> log_pdf_on_grid(const LikelihoodModel& model, double theta,
                                    const std::vector<double>& x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = log_density_scalar(model, theta, x[i]);
  return out;
}

std::vector<double> exp_all(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] == kLogZero ? 0.0 : std::exp(v[i]);
  return out;
}

}  // namespace

Interval default_bounds(const LikelihoodModel& model) {
  switch (model.kind) {
    case ModelKind::bernoulli_mean:
      return {1e-3, 1.0 - 1e-3};
    case ModelKind::gaussian_scale:
      return {0.1, 10.0};
    case ModelKind::poisson_rate:
      return {0.1, 20.0};
    case ModelKind::gaussian_mean:
      break;
  }
  return {-10.0, 10.0};
}

void BergerConfig::validate() const {
  if (datasets < 1 || samples < 1 || n_obs < 1 || grid_size < 1)
    throw ArgumentError("Berger counts must be positive");
  require_bounds(bounds);
}

namespace {

// Mean over J datasets of log p(D_j|theta0) - log sum_s p(D_j|theta_s); the
// theta_s for dataset j come from next_samples(j).
template <typename Samples>
double berger_average(const LikelihoodModel& model, double theta0, const BergerConfig& cfg,
                      Rng& rng, Samples&& next_samples) {
  require_scalar(model, "Berger estimator");
  cfg.validate();
  if (!cfg.bounds.contains(theta0)) throw DomainError("theta0 outside the prior bounds");
  const double t0[1] = {theta0};
  model.require_domain(t0);

  std::vector<double> diff;
  double total = 0.0;
  for (std::size_t j = 0; j < cfg.datasets; ++j) {
    const auto data = sample_dataset(model, t0, cfg.n_obs, rng);
    const std::span<const double> prior = next_samples(j);
    const auto stats = summarize(model, data);
    const double ll0 = log_likelihood(model, t0, stats);
    diff.resize(prior.size());
    for (std::size_t s = 0; s < prior.size(); ++s) {
      const double ts[1] = {prior[s]};
      const double ll = log_likelihood(model, ts, stats);
      diff[s] = ll == kLogZero ? kLogZero : ll - ll0;
    }
    // shifted by ll0 so that theta_s == theta0 cancels exactly
    total += -log_sum_exp(diff);
  }
  return total / static_cast<double>(cfg.datasets);
}

}  // namespace

double berger_log_prior_at(const LikelihoodModel& model, double theta0, const BergerConfig& cfg,
                           Rng& rng) {
  std::uniform_real_distribution<double> u(cfg.bounds.lower, cfg.bounds.upper);
  std::vector<double> prior(cfg.samples);
  // the normalizer of every dataset gets its own uniform draws
  return berger_average(model, theta0, cfg, rng, [&](std::size_t) {
    for (auto& v : prior) v = u(rng);
    return std::span<const double>(prior);
  });
}

double berger_log_prior_at(const LikelihoodModel& model, double theta0, const BergerConfig& cfg,
                           std::span<const double> prior_samples, Rng& rng) {
  if (prior_samples.empty()) throw ArgumentError("need at least one prior sample");
  return berger_average(model, theta0, cfg, rng,
                        [&](std::size_t) { return prior_samples; });
}

DiscreteGridDistribution DiscreteGridDistribution::from_log_weights(
    std::vector<double> points, std::span<const double> log_weights) {
  if (points.empty()) throw ArgumentError("grid must contain at least one point");
  if (points.size() != log_weights.size()) throw ArgumentError("grid and weights differ in size");
  for (double w : log_weights)
    if (std::isnan(w) || w == std::numeric_limits<double>::infinity())
      throw NumericError("grid log-weight is NaN or +inf");
  const double lse = log_sum_exp(log_weights);
  if (lse == kLogZero || !std::isfinite(lse))
    throw NumericError("all grid weights are zero");

  DiscreteGridDistribution out;
  out.points_ = std::move(points);
  out.probs_.resize(log_weights.size());
  out.cdf_.resize(log_weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    const double lw = log_weights[i];
    out.probs_[i] = lw == kLogZero || std::isinf(lw) ? 0.0 : std::exp(lw - lse);
    acc += out.probs_[i];
    out.cdf_[i] = acc;
  }
  // guard the last step against rounding so every u in [0,1) lands on a point
  std::size_t last = out.cdf_.size() - 1;
  while (last > 0 && out.probs_[last] == 0.0) --last;
  for (std::size_t i = last; i < out.cdf_.size(); ++i) out.cdf_[i] = 1.0;
  return out;
}

double DiscreteGridDistribution::sample(Rng& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), r);
  if (it == cdf_.end()) --it;
  return points_[static_cast<std::size_t>(it - cdf_.begin())];
}

std::vector<double> DiscreteGridDistribution::sample(std::size_t n, Rng& rng) const {
  std::vector<double> out(n);
  for (auto& v : out) v = sample(rng);
  return out;
}

std::string DiscreteGridDistribution::to_csv() const {
  std::string out = "point,probability\n";
  for (std::size_t i = 0; i < points_.size(); ++i)
    out += format_double(points_[i]) + ',' + format_double(probs_[i]) + '\n';
  return out;
}

DiscreteGridDistribution berger_grid_sampler(const LikelihoodModel& model,
                                             const BergerConfig& cfg, Rng& rng) {
  require_scalar(model, "Berger grid sampler");
  cfg.validate();
  auto grid = cell_centres(cfg.bounds, cfg.grid_size);
  const std::uint64_t seed = rng();
  const auto logw = kernels::berger_log_prior_grid(model, grid, cfg, seed);
  return DiscreteGridDistribution::from_log_weights(std::move(grid), logw);
}

void McmcConfig::validate() const {
  if (iterations < 1 || samples_per_iteration < 1 || x_grid_size < 1)
    throw ArgumentError("MCMC counts must be positive");
  if (kept > iterations) throw ArgumentError("cannot keep more states than iterations");
  require_bounds(bounds);
}

SampleSpaceGrid sample_space_grid(const LikelihoodModel& model, const Interval& bounds,
                                  std::size_t size) {
  SampleSpaceGrid g;
  switch (model.kind) {
    case ModelKind::bernoulli_mean:
      g.x = {0.0, 1.0};
      g.dx = {1.0, 1.0};
      return g;
    case ModelKind::poisson_rate:
      if (size < 1) throw ArgumentError("sample-space grid needs at least one point");
      g.x.resize(size);
      for (std::size_t i = 0; i < size; ++i) g.x[i] = static_cast<double>(i);
      g.dx.assign(size, 1.0);
      return g;
    case ModelKind::gaussian_mean:
    case ModelKind::gaussian_scale:
      break;
  }
  if (size < 2) throw ArgumentError("continuous sample-space grid needs at least two points");
  Interval range;
  if (model.kind == ModelKind::gaussian_mean) {
    range = {bounds.lower - 6.0 * model.sigma, bounds.upper + 6.0 * model.sigma};
  } else {
    range = {model.mu - 6.0 * bounds.upper, model.mu + 6.0 * bounds.upper};
  }
  g.x = linspace(range, size);
  const double h = range.width() / static_cast<double>(size - 1);
  g.dx.assign(size, h);
  g.dx.front() = 0.5 * h;
  g.dx.back() = 0.5 * h;
  return g;
}

double lw_log_acceptance(std::size_t t, double entropy_current, double entropy_proposal,
                         std::span<const double> w, std::span<const double> dx,
                         std::span<const double> current_pdf,
                         std::span<const double> proposal_pdf) {
  if (w.size() != dx.size() || w.size() != current_pdf.size() ||
      w.size() != proposal_pdf.size())
    throw ArgumentError("acceptance inputs differ in size");
  double cross = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    cross += dx[i] * w[i] * (proposal_pdf[i] - current_pdf[i]);
  const double tp1 = static_cast<double>(t + 1);
  return tp1 * (entropy_current - entropy_proposal) - cross;
}

SampleBatch lw_mcmc(const LikelihoodModel& model, const McmcConfig& cfg, Rng& rng,
                    McmcState* final_state, std::vector<McmcIterationRecord>* records) {
  require_scalar(model, "MCMC baseline");
  cfg.validate();
  const auto grid = sample_space_grid(model, cfg.bounds, cfg.x_grid_size);
  const std::size_t nx = grid.x.size();
  std::uniform_real_distribution<double> proposal(cfg.bounds.lower, cfg.bounds.upper);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  McmcState state;
  state.w.assign(nx, 0.0);
  state.theta = proposal(rng);
  std::vector<double> chain;
  chain.reserve(cfg.iterations + 1);
  chain.push_back(state.theta);

  auto entropy_of = [&](double th) {
    const double v[1] = {th};
    return entropy_per_obs(model, v);
  };
  double h_cur = entropy_of(state.theta);
  // log p(x|theta) per chain state; rejected moves share the current vector
  using LogPdf = std::shared_ptr<const std::vector<double>>;
  LogPdf cur_log = std::make_shared<const std::vector<double>>(
      log_pdf_on_grid(model, state.theta, grid.x));
  std::vector<double> cur_pdf = exp_all(*cur_log);
  std::vector<LogPdf> chain_log{cur_log};

  std::vector<double> terms;
  std::vector<double> log_mix(nx);
  for (std::size_t t = 0; t < cfg.iterations; ++t) {
    state.t = t;
    const std::size_t first =
        chain.size() > cfg.samples_per_iteration ? chain.size() - cfg.samples_per_iteration : 0;
    const std::size_t count = chain.size() - first;
    terms.resize(count);
    const double log_count = std::log(static_cast<double>(count));
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t s = 0; s < count; ++s) terms[s] = (*chain_log[first + s])[x];
      log_mix[x] = log_sum_exp(terms) - log_count;
      state.w[x] += log_mix[x];
    }
    if (records) {
      records->push_back(
          {std::vector<double>(chain.begin() + static_cast<std::ptrdiff_t>(first), chain.end()),
           log_mix});
    }

    const double cand = proposal(rng);
    const double h_prop = entropy_of(cand);
    auto prop_log =
        std::make_shared<const std::vector<double>>(log_pdf_on_grid(model, cand, grid.x));
    auto prop_pdf = exp_all(*prop_log);
    const double log_a = lw_log_acceptance(t, h_cur, h_prop, state.w, grid.dx, cur_pdf, prop_pdf);
    const double u = unit(rng);
    if (log_a >= 0.0 || std::log(u) < log_a) {
      state.theta = cand;
      h_cur = h_prop;
      cur_pdf = std::move(prop_pdf);
      cur_log = std::move(prop_log);
    }
    chain.push_back(state.theta);
    chain_log.push_back(cur_log);
    // only the last window is ever read again
    if (chain_log.size() > cfg.samples_per_iteration + 1)
      chain_log[chain_log.size() - cfg.samples_per_iteration - 2].reset();
  }

  SampleBatch out;
  out.method = "mcmc";
  out.theta = Matrix(cfg.kept, 1);
  const std::size_t start = chain.size() - cfg.kept;
  for (std::size_t i = 0; i < cfg.kept; ++i) out.theta(i, 0) = chain[start + i];
  state.t = cfg.iterations;
  state.kept = out.theta.column(0);
  if (final_state) *final_state = std::move(state);
  return out;
}

SampleBatch uniform_sampler(std::span<const Interval> bounds, std::size_t n, Rng& rng) {
  if (bounds.empty()) throw ArgumentError("uniform sampler needs at least one dimension");
  for (const auto& b : bounds)
    if (!std::isfinite(b.lower) || !std::isfinite(b.upper) || b.lower > b.upper)
      throw ArgumentError("uniform bounds must be finite with lower <= upper");
  SampleBatch out;
  out.method = "uniform";
  out.theta = Matrix(n, bounds.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < bounds.size(); ++d) {
      std::uniform_real_distribution<double> u(bounds[d].lower, bounds[d].upper);
      out.theta(i, d) = u(rng);
    }
  return out;
}

}  // namespace refprior
