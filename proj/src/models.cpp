#include "refprior/models.hpp"

#include <cmath>
#include <limits>

namespace refprior {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

double xlogy_ratio(double x, double y) {
  // x * log(x / y) with 0 log 0 = 0
  if (x == 0.0) return 0.0;
  return x * std::log(x / y);
}

void require_dims(const LikelihoodModel& model, std::span<const double> theta) {
  if (theta.size() != model.param_dim())
    throw ArgumentError("parameter has " + std::to_string(theta.size()) +
                        " entries, model expects " + std::to_string(model.param_dim()));
}

void require_scalar_model(const LikelihoodModel& model) {
  if (model.param_dim() != 1)
    throw ArgumentError("operation requires a one-dimensional model");
}

double poisson_log_pmf(double lambda, double k) {
  return k * std::log(lambda) - lambda - std::lgamma(k + 1.0);
}

double poisson_entropy(double lambda) {
  // Sum -p ln p upward. Once past the mode, the remaining mass is bounded by
  // p(k+1) / (1 - lambda/(k+2)) and each remaining term by p * (-ln p(k+1)),
  // which grows with k; stop when that product is below 1e-10.
  double h = 0.0;
  for (std::size_t k = 0;; ++k) {
    const double kd = static_cast<double>(k);
    const double lp = poisson_log_pmf(lambda, kd);
    const double p = std::exp(lp);
    if (p > 0.0) h -= p * lp;
    if (kd + 2.0 > lambda) {
      const double lp_next = poisson_log_pmf(lambda, kd + 1.0);
      const double tail_mass = std::exp(lp_next) / (1.0 - lambda / (kd + 2.0));
      if (tail_mass * std::max(1.0, -lp_next) < 1e-10) break;
    }
  }
  return h;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::bernoulli_mean: return "bernoulli_mean";
    case ModelKind::gaussian_mean: return "gaussian_mean";
    case ModelKind::gaussian_scale: return "gaussian_scale";
    case ModelKind::poisson_rate: return "poisson_rate";
  }
  return "unknown";
}

ModelKind model_kind_from_string(std::string_view name) {
  if (name == "bernoulli_mean") return ModelKind::bernoulli_mean;
  if (name == "gaussian_mean") return ModelKind::gaussian_mean;
  if (name == "gaussian_scale") return ModelKind::gaussian_scale;
  if (name == "poisson_rate") return ModelKind::poisson_rate;
  throw ConfigError("unknown model kind '" + std::string(name) + "'");
}

Interval LikelihoodModel::param_domain() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (kind) {
    case ModelKind::bernoulli_mean: return {0.0, 1.0};
    case ModelKind::gaussian_mean: return {-inf, inf};
    case ModelKind::gaussian_scale:
    case ModelKind::poisson_rate: return {0.0, inf};
  }
  return {-inf, inf};
}

bool LikelihoodModel::in_domain(std::span<const double> theta) const {
  if (theta.size() != param_dim()) return false;
  for (double t : theta) {
    if (!std::isfinite(t)) return false;
    switch (kind) {
      case ModelKind::bernoulli_mean:
        if (t < 0.0 || t > 1.0) return false;
        break;
      case ModelKind::gaussian_mean: break;
      case ModelKind::gaussian_scale:
      case ModelKind::poisson_rate:
        if (t <= 0.0) return false;
        break;
    }
  }
  return true;
}

bool LikelihoodModel::in_interior(std::span<const double> theta) const {
  if (!in_domain(theta)) return false;
  if (kind == ModelKind::bernoulli_mean)
    for (double t : theta)
      if (t <= 0.0 || t >= 1.0) return false;
  return true;
}

void LikelihoodModel::require_domain(std::span<const double> theta) const {
  require_dims(*this, theta);
  if (in_domain(theta)) return;
  const Interval dom = param_domain();
  for (std::size_t d = 0; d < theta.size(); ++d) {
    const double t = theta[d];
    const bool closed = kind == ModelKind::bernoulli_mean;
    const bool ok = std::isfinite(t) && (closed ? dom.contains(t)
                                                : (t > dom.lower && t < dom.upper));
    if (!ok)
      throw DomainError(std::string(to_string(kind)) + ": parameter[" + std::to_string(d) +
                        "] = " + std::to_string(t) + " outside domain");
  }
  throw DomainError(std::string(to_string(kind)) + ": parameter outside domain");
}

Dataset sample_dataset(const LikelihoodModel& model, std::span<const double> theta,
                       std::size_t n, Rng& rng) {
  model.require_domain(theta);
  Dataset out;
  out.dims = model.param_dim();
  out.values.resize(n * out.dims);
  switch (model.kind) {
    case ModelKind::bernoulli_mean: {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (auto& v : out.values) v = u(rng) < theta[0] ? 1.0 : 0.0;
      break;
    }
    case ModelKind::gaussian_mean: {
      std::normal_distribution<double> z(0.0, 1.0);
      for (auto& v : out.values) v = theta[0] + model.sigma * z(rng);
      break;
    }
    case ModelKind::gaussian_scale: {
      std::normal_distribution<double> z(0.0, 1.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < out.dims; ++d)
          out.values[i * out.dims + d] = model.mu + theta[d] * z(rng);
      break;
    }
    case ModelKind::poisson_rate: {
      std::poisson_distribution<long long> p(theta[0]);
      for (auto& v : out.values) v = static_cast<double>(p(rng));
      break;
    }
  }
  return out;
}

SufficientStats summarize(const LikelihoodModel& model, const Dataset& data) {
  if (data.dims != model.param_dim())
    throw ArgumentError("dataset dimension does not match model");
  SufficientStats s;
  s.count = data.size();
  switch (model.kind) {
    case ModelKind::bernoulli_mean:
      for (double x : data.values) {
        if (x != 0.0 && x != 1.0) throw ArgumentError("Bernoulli observation not in {0,1}");
        s.sum += x;
      }
      break;
    case ModelKind::poisson_rate:
      for (double x : data.values) {
        if (x < 0.0 || x != std::floor(x))
          throw ArgumentError("Poisson observation not a nonnegative integer");
        s.sum += x;
        s.log_factorial_sum += std::lgamma(x + 1.0);
      }
      break;
    case ModelKind::gaussian_mean:
      // centred at zero; the mean enters through sum and sum of squares
      s.sum_sq_dev.assign(1, 0.0);
      for (double x : data.values) {
        s.sum += x;
        s.sum_sq_dev[0] += x * x;
      }
      break;
    case ModelKind::gaussian_scale:
      s.sum_sq_dev.assign(data.dims, 0.0);
      for (std::size_t i = 0; i < s.count; ++i)
        for (std::size_t d = 0; d < data.dims; ++d) {
          const double dev = data.values[i * data.dims + d] - model.mu;
          s.sum_sq_dev[d] += dev * dev;
        }
      break;
  }
  return s;
}

double log_likelihood(const LikelihoodModel& model, std::span<const double> theta,
                      const SufficientStats& stats) {
  model.require_domain(theta);
  const double n = static_cast<double>(stats.count);
  if (stats.count == 0) return 0.0;
  switch (model.kind) {
    case ModelKind::bernoulli_mean: {
      const double p = theta[0];
      const double k = stats.sum;
      if ((p == 0.0 && k > 0.0) || (p == 1.0 && k < n)) return kLogZero;
      double ll = 0.0;
      if (k > 0.0) ll += k * std::log(p);
      if (n - k > 0.0) ll += (n - k) * std::log1p(-p);
      return ll;
    }
    case ModelKind::gaussian_mean: {
      const double m = theta[0];
      const double ss = stats.sum_sq_dev[0] - 2.0 * m * stats.sum + n * m * m;
      const double s2 = model.sigma * model.sigma;
      return -0.5 * n * kLogTwoPi - n * std::log(model.sigma) - ss / (2.0 * s2);
    }
    case ModelKind::gaussian_scale: {
      double ll = 0.0;
      for (std::size_t d = 0; d < model.dims; ++d) {
        const double s = theta[d];
        ll += -0.5 * n * kLogTwoPi - n * std::log(s) - stats.sum_sq_dev[d] / (2.0 * s * s);
      }
      return ll;
    }
    case ModelKind::poisson_rate: {
      const double lambda = theta[0];
      return stats.sum * std::log(lambda) - n * lambda - stats.log_factorial_sum;
    }
  }
  return 0.0;
}

double log_likelihood(const LikelihoodModel& model, std::span<const double> theta,
                      const Dataset& data) {
  model.require_domain(theta);
  if (data.dims != model.param_dim())
    throw ArgumentError("dataset dimension does not match model");
  double ll = 0.0;
  const std::size_t n = data.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = data.observation(i);
    switch (model.kind) {
      case ModelKind::bernoulli_mean: {
        if (x[0] != 0.0 && x[0] != 1.0)
          throw ArgumentError("Bernoulli observation not in {0,1}");
        const double p = x[0] == 1.0 ? theta[0] : 1.0 - theta[0];
        if (p == 0.0) return kLogZero;
        ll += std::log(p);
        break;
      }
      case ModelKind::gaussian_mean: {
        const double z = (x[0] - theta[0]) / model.sigma;
        ll += -0.5 * kLogTwoPi - std::log(model.sigma) - 0.5 * z * z;
        break;
      }
      case ModelKind::gaussian_scale:
        for (std::size_t d = 0; d < model.dims; ++d) {
          const double z = (x[d] - model.mu) / theta[d];
          ll += -0.5 * kLogTwoPi - std::log(theta[d]) - 0.5 * z * z;
        }
        break;
      case ModelKind::poisson_rate:
        if (x[0] < 0.0 || x[0] != std::floor(x[0]))
          throw ArgumentError("Poisson observation not a nonnegative integer");
        ll += poisson_log_pmf(theta[0], x[0]);
        break;
    }
  }
  return ll;
}

double entropy_per_obs(const LikelihoodModel& model, std::span<const double> theta) {
  model.require_domain(theta);
  switch (model.kind) {
    case ModelKind::bernoulli_mean: {
      const double p = theta[0];
      double h = 0.0;
      if (p > 0.0) h -= p * std::log(p);
      if (p < 1.0) h -= (1.0 - p) * std::log1p(-p);
      return h;
    }
    case ModelKind::gaussian_mean:
      return 0.5 * (kLogTwoPi + 1.0) + std::log(model.sigma);
    case ModelKind::gaussian_scale: {
      double h = 0.0;
      for (double s : theta) h += 0.5 * (kLogTwoPi + 1.0) + std::log(s);
      return h;
    }
    case ModelKind::poisson_rate:
      return poisson_entropy(theta[0]);
  }
  return 0.0;
}

double kld_per_obs(const LikelihoodModel& model, std::span<const double> a,
                   std::span<const double> b) {
  model.require_domain(a);
  model.require_domain(b);
  switch (model.kind) {
    case ModelKind::bernoulli_mean: {
      const double pa = a[0];
      const double pb = b[0];
      if ((pb == 0.0 && pa > 0.0) || (pb == 1.0 && pa < 1.0)) return kInfiniteDivergence;
      return xlogy_ratio(pa, pb) + xlogy_ratio(1.0 - pa, 1.0 - pb);
    }
    case ModelKind::gaussian_mean: {
      const double d = (a[0] - b[0]) / model.sigma;
      return 0.5 * d * d;
    }
    case ModelKind::gaussian_scale: {
      double k = 0.0;
      for (std::size_t d = 0; d < model.dims; ++d) {
        const double r = a[d] / b[d];
        k += -std::log(r) + 0.5 * r * r - 0.5;
      }
      return k;
    }
    case ModelKind::poisson_rate:
      return xlogy_ratio(a[0], b[0]) + b[0] - a[0];
  }
  return 0.0;
}

void kld_gradient(const LikelihoodModel& model, std::span<const double> a,
                  std::span<const double> b, std::span<double> grad_a,
                  std::span<double> grad_b) {
  require_dims(model, a);
  require_dims(model, b);
  if (!model.in_interior(a) || !model.in_interior(b))
    throw DomainError("kld_gradient needs interior parameters");
  switch (model.kind) {
    case ModelKind::bernoulli_mean: {
      const double pa = a[0];
      const double pb = b[0];
      grad_a[0] = std::log(pa / pb) - std::log((1.0 - pa) / (1.0 - pb));
      grad_b[0] = -pa / pb + (1.0 - pa) / (1.0 - pb);
      break;
    }
    case ModelKind::gaussian_mean: {
      const double g = (a[0] - b[0]) / (model.sigma * model.sigma);
      grad_a[0] = g;
      grad_b[0] = -g;
      break;
    }
    case ModelKind::gaussian_scale:
      for (std::size_t d = 0; d < model.dims; ++d) {
        const double sa = a[d];
        const double sb = b[d];
        grad_a[d] = -1.0 / sa + sa / (sb * sb);
        grad_b[d] = 1.0 / sb - sa * sa / (sb * sb * sb);
      }
      break;
    case ModelKind::poisson_rate:
      grad_a[0] = std::log(a[0] / b[0]);
      grad_b[0] = 1.0 - a[0] / b[0];
      break;
  }
}

double jeffreys_density_unnorm(const LikelihoodModel& model, std::span<const double> theta) {
  require_dims(model, theta);
  if (!model.in_interior(theta))
    throw DomainError("Jeffreys density needs an interior parameter");
  switch (model.kind) {
    case ModelKind::bernoulli_mean:
      return 1.0 / std::sqrt(theta[0] * (1.0 - theta[0]));
    case ModelKind::gaussian_mean:
      return 1.0;
    case ModelKind::gaussian_scale: {
      double d = 1.0;
      for (double s : theta) d /= s;
      return d;
    }
    case ModelKind::poisson_rate:
      return 1.0 / std::sqrt(theta[0]);
  }
  return 1.0;
}

double log_density_scalar(const LikelihoodModel& model, double theta, double x) {
  require_scalar_model(model);
  switch (model.kind) {
    case ModelKind::bernoulli_mean: {
      const double p = x == 1.0 ? theta : 1.0 - theta;
      return p > 0.0 ? std::log(p) : kLogZero;
    }
    case ModelKind::gaussian_mean: {
      const double z = (x - theta) / model.sigma;
      return -0.5 * kLogTwoPi - std::log(model.sigma) - 0.5 * z * z;
    }
    case ModelKind::gaussian_scale: {
      const double z = (x - model.mu) / theta;
      return -0.5 * kLogTwoPi - std::log(theta) - 0.5 * z * z;
    }
    case ModelKind::poisson_rate:
      return poisson_log_pmf(theta, x);
  }
  return kLogZero;
}

nlohmann::json to_json(const LikelihoodModel& model) {
  nlohmann::json params = nlohmann::json::object();
  if (model.kind == ModelKind::gaussian_mean) params["sigma"] = model.sigma;
  if (model.kind == ModelKind::gaussian_scale) params["mu"] = model.mu;
  return {{"kind", std::string(to_string(model.kind))}, {"params", params}, {"dims", model.dims}};
}

LikelihoodModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) throw ConfigError("model descriptor needs 'kind'");
  LikelihoodModel m;
  m.kind = model_kind_from_string(j.at("kind").get<std::string>());
  const auto params = j.value("params", nlohmann::json::object());
  m.sigma = params.value("sigma", 1.0);
  m.mu = params.value("mu", 0.0);
  m.dims = j.value("dims", std::size_t{1});
  if (m.dims == 0) throw ConfigError("model dims must be positive");
  if (m.dims != 1 && m.kind != ModelKind::gaussian_scale)
    throw ConfigError("only gaussian_scale supports dims > 1");
  if (!(m.sigma > 0.0) || !std::isfinite(m.sigma)) throw ConfigError("sigma must be positive");
  return m;
}

}  // namespace refprior
