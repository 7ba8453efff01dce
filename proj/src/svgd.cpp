#include "refprior/svgd.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "refprior/kernels.hpp"

namespace refprior {

namespace {

void require_same_size(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ArgumentError("kernel arguments differ in dimension");
}

double to_kernel_coord(const Kernel& k, double v) {
  if (!k.log_space) return v;
  if (!(v > 0.0)) throw DomainError("log-space kernel needs positive coordinates");
  return std::log(v);
}

void require_unit_interval(double v) {
  if (!(v > 0.0 && v < 1.0)) throw DomainError("Sobolev kernel needs coordinates in (0, 1)");
}

double sobolev_1d(double a, double x, double y) {
  const double lo = std::min(x, y);
  const double hi = std::max(x, y);
  return std::cosh(a * lo) * std::cosh(a * (1.0 - hi)) / (a * std::sinh(a));
}

double sobolev_1d_dx(double a, double x, double y) {
  const double sa = std::sinh(a);
  if (x < y) return std::sinh(a * x) * std::cosh(a * (1.0 - y)) / sa;
  if (x > y) return -std::cosh(a * y) * std::sinh(a * (1.0 - x)) / sa;
  // kink on the diagonal: mean of the one-sided derivatives
  return std::sinh(a * (2.0 * x - 1.0)) / (2.0 * sa);
}

// Evaluation and x-gradient in kernel coordinates.
double base_eval(const Kernel& k, std::span<const double> x, std::span<const double> y) {
  if (k.kind == KernelKind::rbf) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
    return std::exp(-d2 / k.length_scale);
  }
  const double a = 1.0 / k.length_scale;
  double v = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require_unit_interval(x[i]);
    require_unit_interval(y[i]);
    v *= sobolev_1d(a, x[i], y[i]);
  }
  return v;
}

void base_grad(const Kernel& k, std::span<const double> x, std::span<const double> y,
               std::span<double> out) {
  if (k.kind == KernelKind::rbf) {
    const double v = base_eval(k, x, y);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = -2.0 * (x[i] - y[i]) / k.length_scale * v;
    return;
  }
  const double a = 1.0 / k.length_scale;
  const std::size_t n = x.size();
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) {
    require_unit_interval(x[i]);
    require_unit_interval(y[i]);
    f[i] = sobolev_1d(a, x[i], y[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double g = sobolev_1d_dx(a, x[i], y[i]);
    for (std::size_t e = 0; e < n; ++e)
      if (e != i) g *= f[e];
    out[i] = g;
  }
}

void require_bandwidth(const Kernel& k) {
  if (!(k.length_scale > 0.0) || !std::isfinite(k.length_scale))
    throw ArgumentError("kernel length scale must be positive");
}

}  // namespace

double kernel_eval(const Kernel& k, std::span<const double> x, std::span<const double> y) {
  require_same_size(x, y);
  require_bandwidth(k);
  if (!k.log_space) return base_eval(k, x, y);
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx[i] = to_kernel_coord(k, x[i]);
    ly[i] = to_kernel_coord(k, y[i]);
  }
  return base_eval(k, lx, ly);
}

void kernel_grad_x(const Kernel& k, std::span<const double> x, std::span<const double> y,
                   std::span<double> out) {
  require_same_size(x, y);
  require_bandwidth(k);
  if (out.size() != x.size()) throw ArgumentError("kernel gradient output has wrong size");
  if (!k.log_space) {
    base_grad(k, x, y, out);
    return;
  }
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx[i] = to_kernel_coord(k, x[i]);
    ly[i] = to_kernel_coord(k, y[i]);
  }
  base_grad(k, lx, ly, out);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] /= x[i];
}

double median_heuristic(const Matrix& points) {
  const std::size_t n = points.rows();
  if (n < 2) throw ArgumentError("median heuristic needs at least two particles");
  std::vector<double> dist;
  dist.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < points.cols(); ++c) {
        const double d = points(i, c) - points(j, c);
        d2 += d * d;
      }
      dist.push_back(std::sqrt(d2));
    }
  std::sort(dist.begin(), dist.end());
  const std::size_t m = dist.size();
  const double med = m % 2 ? dist[m / 2] : 0.5 * (dist[m / 2 - 1] + dist[m / 2]);
  const double log_k = std::max(std::log(static_cast<double>(n)), std::log(2.0));
  return std::max(med * med / log_k, 1e-8);
}

Matrix kernel_coordinates(const Kernel& k, const Matrix& particles) {
  Matrix out = particles;
  if (k.log_space)
    for (auto& v : out.data()) v = to_kernel_coord(k, v);
  return out;
}

Kernel resolve_bandwidth(const Kernel& k, const Matrix& particles) {
  Kernel out = k;
  if (k.median_heuristic) {
    out.length_scale = particles.rows() < 2 ? 1.0 : median_heuristic(kernel_coordinates(k, particles));
    out.median_heuristic = false;
  }
  return out;
}

ParamVector grad_log_f(const LikelihoodModel& model, std::span<const double> particle,
                       const SampleBatch& samples, std::size_t n_obs) {
  if (samples.size() == 0) throw ArgumentError("grad_log_f needs at least one prior sample");
  const std::size_t dims = particle.size();
  ParamVector acc(dims, 0.0), ga(dims), gb(dims);
  for (std::size_t s = 0; s < samples.size(); ++s) {
    kld_gradient(model, particle, samples.theta.row(s), ga, gb);
    for (std::size_t d = 0; d < dims; ++d) acc[d] += ga[d];
  }
  const double scale = static_cast<double>(n_obs) / static_cast<double>(samples.size());
  for (auto& v : acc) v *= scale;
  return acc;
}

Matrix svgd_direction(const ParticleState& state, const Kernel& kernel, const Matrix& gradients) {
  const Matrix& x = state.particles;
  if (gradients.rows() != x.rows() || gradients.cols() != x.cols())
    throw ArgumentError("svgd_direction: gradients do not match particles");
  const Kernel resolved = resolve_bandwidth(kernel, x);
  Kernel base = resolved;
  base.log_space = false;
  const Matrix coords = kernel_coordinates(resolved, x);
  Matrix jac(x.rows(), x.cols(), 1.0);
  if (resolved.log_space)
    for (std::size_t i = 0; i < jac.data().size(); ++i) jac.data()[i] = 1.0 / x.data()[i];
  return kernels::stein_direction(base, coords, gradients, jac);
}

std::vector<double> amortized_gradient(const PriorShape& sampler, std::span<const double> lambda,
                                       const Matrix& noise, const Matrix& phi, double eta) {
  if (noise.rows() != phi.rows()) throw ArgumentError("noise and phi row counts differ");
  if (phi.cols() != output_dim(sampler)) throw ArgumentError("phi has wrong dimension");
  std::vector<double> grad(lambda.size(), 0.0);
  std::vector<double> cot(phi.cols());
  for (std::size_t k = 0; k < phi.rows(); ++k) {
    for (std::size_t d = 0; d < cot.size(); ++d) cot[d] = -2.0 * eta * phi(k, d);
    grad_sample_wrt_lambda(sampler, lambda, noise.row(k), cot, grad);
  }
  return grad;
}

double amortized_loss(const PriorShape& sampler, std::span<const double> lambda,
                      const Matrix& noise, const Matrix& targets) {
  if (noise.rows() != targets.rows()) throw ArgumentError("noise and target row counts differ");
  double loss = 0.0;
  for (std::size_t k = 0; k < noise.rows(); ++k) {
    const auto g = transform(sampler, lambda, noise.row(k));
    if (g.size() != targets.cols()) throw ArgumentError("targets have wrong dimension");
    for (std::size_t d = 0; d < g.size(); ++d) {
      const double r = g[d] - targets(k, d);
      loss += r * r;
    }
  }
  return loss;
}

void amortized_step(const PriorShape& sampler, std::span<double> lambda, const Matrix& noise,
                    const Matrix& phi, double eta, AdamState& optimizer) {
  const auto grad = amortized_gradient(sampler, lambda, noise, phi, eta);
  adam_apply(optimizer, grad, lambda);
}

TrainResult train_svgd(const LikelihoodModel& model, const PriorApprox& sampler,
                       const SvgdConfig& cfg, Rng& rng) {
  if (cfg.particles < 1) throw ArgumentError("need at least one particle");
  if (cfg.samples < 1) throw ArgumentError("need at least one prior sample");
  if (!(cfg.eta > 0.0)) throw ArgumentError("eta must be positive");
  if (!(cfg.lr > 0.0)) throw ArgumentError("lr must be positive");
  TrainResult result{sampler, {}};
  auto& lambda = result.prior.lambda;
  auto opt = AdamState::fresh(lambda.size(), cfg.lr);
  const auto start = std::chrono::steady_clock::now();

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    double objective = 0.0;
    try {
      auto [particles, noise] = sample_prior(sampler.shape, lambda, cfg.particles, rng);
      auto [samples, unused] = sample_prior(sampler.shape, lambda, cfg.samples, rng);
      const Matrix grads =
          kernels::grad_log_f_all(model, particles.theta, samples.theta, cfg.n_obs);
      ParticleState state{particles.theta, noise.eps, cfg.eta};
      const Matrix phi = svgd_direction(state, cfg.kernel, grads);
      for (double v : phi.data()) objective += (cfg.eta * v) * (cfg.eta * v);
      if (!std::isfinite(objective))
        throw NumericError("non-finite Stein direction");
      amortized_step(sampler.shape, lambda, noise.eps, phi, cfg.eta, opt);
    } catch (const NumericError& e) {
      throw NumericError("iteration " + std::to_string(it) + ": " + e.what());
    } catch (const DomainError& e) {
      throw NumericError("iteration " + std::to_string(it) + ": " + e.what());
    }
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    result.trace.rows.push_back({it, objective, ms});
  }
  return result;
}

Kernel default_kernel(const LikelihoodModel& model) {
  switch (model.kind) {
    case ModelKind::bernoulli_mean:
      return {KernelKind::sobolev01, 2.0, false, false};
    case ModelKind::gaussian_scale:
    case ModelKind::poisson_rate:
      return {KernelKind::rbf, 1.0, true, true};
    case ModelKind::gaussian_mean:
      break;
  }
  return {KernelKind::rbf, 1.0, true, false};
}

nlohmann::json to_json(const Kernel& k) {
  return {{"kind", k.kind == KernelKind::rbf ? "rbf" : "sobolev01"},
          {"length_scale", k.length_scale},
          {"median_heuristic", k.median_heuristic},
          {"log_space", k.log_space}};
}

Kernel kernel_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("kernel must be an object");
  Kernel k;
  const std::string kind = j.value("kind", std::string("rbf"));
  if (kind == "rbf") {
    k.kind = KernelKind::rbf;
  } else if (kind == "sobolev01" || kind == "sobolev") {
    k.kind = KernelKind::sobolev01;
  } else {
    throw ConfigError("unknown kernel kind '" + kind + "'");
  }
  if (j.contains("length_scale")) {
    const auto& ls = j.at("length_scale");
    if (ls.is_string() && ls.get<std::string>() == "median") {
      k.median_heuristic = true;
    } else if (ls.is_number()) {
      k.length_scale = ls.get<double>();
    } else {
      throw ConfigError("kernel length_scale must be a number or \"median\"");
    }
  }
  k.median_heuristic = j.value("median_heuristic", k.median_heuristic);
  k.log_space = j.value("log_space", k.log_space);
  if (!(k.length_scale > 0.0)) throw ConfigError("kernel length_scale must be positive");
  if (k.kind == KernelKind::sobolev01 && k.median_heuristic)
    throw ConfigError("the median heuristic applies to the RBF kernel only");
  return k;
}

}  // namespace refprior
