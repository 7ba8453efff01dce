#include "refprior/priors.hpp"

#include <cmath>

namespace refprior {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double apply_map(DomainMap m, double x) {
  switch (m) {
    case DomainMap::identity: return x;
    case DomainMap::sigmoid: return sigmoid(x);
    case DomainMap::exp: return std::exp(x);
    case DomainMap::softplus: return softplus(x);
  }
  return x;
}

// derivative expressed through input x and output y = map(x)
double map_derivative(DomainMap m, double x, double y) {
  switch (m) {
    case DomainMap::identity: return 1.0;
    case DomainMap::sigmoid: return y * (1.0 - y);
    case DomainMap::exp: return y;
    case DomainMap::softplus: return sigmoid(x);
  }
  return 1.0;
}

double activate(Activation a, double x) {
  switch (a) {
    case Activation::tanh: return std::tanh(x);
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::identity: return x;
  }
  return x;
}

double activation_derivative(Activation a, double x, double y) {
  switch (a) {
    case Activation::tanh: return 1.0 - y * y;
    case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
    case Activation::identity: return 1.0;
  }
  return 1.0;
}

DomainMap family_map(ParametricFamily f) {
  switch (f) {
    case ParametricFamily::normal: return DomainMap::identity;
    case ParametricFamily::log_normal: return DomainMap::exp;
    case ParametricFamily::logit_normal: return DomainMap::sigmoid;
  }
  return DomainMap::identity;
}

void require_size(std::span<const double> v, std::size_t n, const char* what) {
  if (v.size() != n)
    throw ArgumentError(std::string(what) + " has " + std::to_string(v.size()) +
                        " entries, expected " + std::to_string(n));
}

void validate(const ImplicitSampler& arch) {
  if (arch.widths.size() < 2) throw ArgumentError("sampler needs at least input and output widths");
  for (auto w : arch.widths)
    if (w == 0) throw ArgumentError("sampler layer of zero width");
}

// Activations of every layer for one noise row. layers[0] is the input,
// pre[l] the affine output of layer l+1.
struct ForwardPass {
  std::vector<std::vector<double>> act;
  std::vector<std::vector<double>> pre;
};

ForwardPass run_network(const ImplicitSampler& arch, std::span<const double> lambda,
                        std::span<const double> eps) {
  const std::size_t layers = arch.widths.size() - 1;
  ForwardPass fp;
  fp.act.reserve(layers + 1);
  fp.pre.reserve(layers);
  fp.act.emplace_back(eps.begin(), eps.end());
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = arch.widths[l];
    const std::size_t out = arch.widths[l + 1];
    const double* w = lambda.data() + offset;
    const double* b = w + in * out;
    const auto& x = fp.act.back();
    std::vector<double> z(out);
    for (std::size_t o = 0; o < out; ++o) {
      double acc = b[o];
      const double* wr = w + o * in;
      for (std::size_t i = 0; i < in; ++i) acc += wr[i] * x[i];
      z[o] = acc;
    }
    std::vector<double> a(out);
    const bool last = l + 1 == layers;
    for (std::size_t o = 0; o < out; ++o)
      a[o] = last ? apply_map(arch.output_map, z[o]) : activate(arch.hidden, z[o]);
    fp.pre.push_back(std::move(z));
    fp.act.push_back(std::move(a));
    offset += in * out + out;
  }
  return fp;
}

}  // namespace

std::string_view to_string(ParametricFamily f) {
  switch (f) {
    case ParametricFamily::normal: return "normal";
    case ParametricFamily::log_normal: return "log_normal";
    case ParametricFamily::logit_normal: return "logit_normal";
  }
  return "unknown";
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::tanh: return "tanh";
    case Activation::relu: return "relu";
    case Activation::identity: return "identity";
  }
  return "unknown";
}

std::string_view to_string(DomainMap m) {
  switch (m) {
    case DomainMap::identity: return "identity";
    case DomainMap::sigmoid: return "sigmoid";
    case DomainMap::exp: return "exp";
    case DomainMap::softplus: return "softplus";
  }
  return "unknown";
}

ParametricFamily parametric_family_from_string(std::string_view s) {
  if (s == "normal") return ParametricFamily::normal;
  if (s == "log_normal") return ParametricFamily::log_normal;
  if (s == "logit_normal") return ParametricFamily::logit_normal;
  throw ConfigError("unknown parametric family '" + std::string(s) + "'");
}

Activation activation_from_string(std::string_view s) {
  if (s == "tanh") return Activation::tanh;
  if (s == "relu" || s == "rectifier") return Activation::relu;
  if (s == "identity" || s == "linear") return Activation::identity;
  throw ConfigError("unknown activation '" + std::string(s) + "'");
}

DomainMap domain_map_from_string(std::string_view s) {
  if (s == "identity") return DomainMap::identity;
  if (s == "sigmoid") return DomainMap::sigmoid;
  if (s == "exp") return DomainMap::exp;
  if (s == "softplus") return DomainMap::softplus;
  throw ConfigError("unknown domain map '" + std::string(s) + "'");
}

DomainMap default_domain_map(const LikelihoodModel& model, bool softplus_for_positive) {
  switch (model.kind) {
    case ModelKind::bernoulli_mean: return DomainMap::sigmoid;
    case ModelKind::gaussian_mean: return DomainMap::identity;
    case ModelKind::gaussian_scale:
    case ModelKind::poisson_rate:
      return softplus_for_positive ? DomainMap::softplus : DomainMap::exp;
  }
  return DomainMap::identity;
}

ParametricFamily default_family(const LikelihoodModel& model) {
  switch (model.kind) {
    case ModelKind::bernoulli_mean: return ParametricFamily::logit_normal;
    case ModelKind::gaussian_mean: return ParametricFamily::normal;
    case ModelKind::gaussian_scale:
    case ModelKind::poisson_rate: return ParametricFamily::log_normal;
  }
  return ParametricFamily::normal;
}

std::size_t noise_dim(const PriorShape& shape) {
  if (const auto* p = std::get_if<ParametricPrior>(&shape)) return p->dims;
  return std::get<ImplicitSampler>(shape).widths.front();
}

std::size_t output_dim(const PriorShape& shape) {
  if (const auto* p = std::get_if<ParametricPrior>(&shape)) return p->dims;
  return std::get<ImplicitSampler>(shape).widths.back();
}

std::size_t lambda_size(const PriorShape& shape) {
  if (const auto* p = std::get_if<ParametricPrior>(&shape)) return 2 * p->dims;
  const auto& w = std::get<ImplicitSampler>(shape).widths;
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < w.size(); ++l) n += w[l] * w[l + 1] + w[l + 1];
  return n;
}

PriorApprox init_parametric(const ParametricPrior& prior, double location, double log_scale) {
  if (prior.dims == 0) throw ArgumentError("parametric prior needs at least one dimension");
  PriorApprox out{prior, std::vector<double>(2 * prior.dims)};
  for (std::size_t d = 0; d < prior.dims; ++d) {
    out.lambda[d] = location;
    out.lambda[prior.dims + d] = log_scale;
  }
  return out;
}

PriorApprox init_sampler(const ImplicitSampler& arch, Rng& rng) {
  validate(arch);
  PriorApprox out{arch, std::vector<double>(lambda_size(arch), 0.0)};
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < arch.widths.size(); ++l) {
    const std::size_t in = arch.widths[l];
    const std::size_t o = arch.widths[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + o));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (std::size_t k = 0; k < in * o; ++k) out.lambda[offset + k] = u(rng);
    offset += in * o + o;  // biases stay zero
  }
  return out;
}

ParamVector transform(const PriorShape& shape, std::span<const double> lambda,
                      std::span<const double> eps) {
  require_size(lambda, lambda_size(shape), "lambda");
  require_size(eps, noise_dim(shape), "noise row");
  if (const auto* p = std::get_if<ParametricPrior>(&shape)) {
    const DomainMap map = family_map(p->family);
    ParamVector theta(p->dims);
    for (std::size_t d = 0; d < p->dims; ++d) {
      const double s = std::exp(lambda[p->dims + d]);
      theta[d] = apply_map(map, lambda[d] + s * eps[d]);
    }
    return theta;
  }
  const auto& arch = std::get<ImplicitSampler>(shape);
  auto fp = run_network(arch, lambda, eps);
  return std::move(fp.act.back());
}

void grad_sample_wrt_lambda(const PriorShape& shape, std::span<const double> lambda,
                            std::span<const double> eps, std::span<const double> cotangent,
                            std::span<double> grad) {
  require_size(lambda, lambda_size(shape), "lambda");
  require_size(eps, noise_dim(shape), "noise row");
  require_size(cotangent, output_dim(shape), "cotangent");
  if (grad.size() != lambda.size()) throw ArgumentError("gradient buffer has wrong size");

  if (const auto* p = std::get_if<ParametricPrior>(&shape)) {
    const DomainMap map = family_map(p->family);
    for (std::size_t d = 0; d < p->dims; ++d) {
      const double s = std::exp(lambda[p->dims + d]);
      const double u = lambda[d] + s * eps[d];
      const double g = cotangent[d] * map_derivative(map, u, apply_map(map, u));
      grad[d] += g;
      grad[p->dims + d] += g * s * eps[d];
    }
    return;
  }

  const auto& arch = std::get<ImplicitSampler>(shape);
  const auto fp = run_network(arch, lambda, eps);
  const std::size_t layers = arch.widths.size() - 1;

  std::vector<std::size_t> offsets(layers);
  for (std::size_t l = 0, off = 0; l < layers; ++l) {
    offsets[l] = off;
    off += arch.widths[l] * arch.widths[l + 1] + arch.widths[l + 1];
  }

  std::vector<double> g(cotangent.begin(), cotangent.end());
  for (std::size_t o = 0; o < g.size(); ++o)
    g[o] *= map_derivative(arch.output_map, fp.pre.back()[o], fp.act.back()[o]);

  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = arch.widths[l];
    const std::size_t out = arch.widths[l + 1];
    const double* w = lambda.data() + offsets[l];
    double* gw = grad.data() + offsets[l];
    double* gb = gw + in * out;
    const auto& x = fp.act[l];
    for (std::size_t o = 0; o < out; ++o) {
      gb[o] += g[o];
      for (std::size_t i = 0; i < in; ++i) gw[o * in + i] += g[o] * x[i];
    }
    if (l == 0) break;
    std::vector<double> prev(in, 0.0);
    for (std::size_t o = 0; o < out; ++o)
      for (std::size_t i = 0; i < in; ++i) prev[i] += w[o * in + i] * g[o];
    for (std::size_t i = 0; i < in; ++i)
      prev[i] *= activation_derivative(arch.hidden, fp.pre[l - 1][i], x[i]);
    g = std::move(prev);
  }
}

NoiseBatch draw_noise(std::size_t rows, std::size_t cols, Rng& rng) {
  NoiseBatch nb;
  nb.seed = rng();
  Rng local(nb.seed);
  std::normal_distribution<double> z(0.0, 1.0);
  nb.eps = Matrix(rows, cols);
  for (auto& v : nb.eps.data()) v = z(local);
  return nb;
}

SampleBatch push_forward(const PriorShape& shape, std::span<const double> lambda,
                         const NoiseBatch& noise, std::string method) {
  SampleBatch out;
  out.method = std::move(method);
  out.seed = noise.seed;
  out.theta = Matrix(noise.eps.rows(), output_dim(shape));
  for (std::size_t r = 0; r < noise.eps.rows(); ++r) {
    const auto th = transform(shape, lambda, noise.eps.row(r));
    std::copy(th.begin(), th.end(), out.theta.row(r).begin());
  }
  return out;
}

std::pair<SampleBatch, NoiseBatch> sample_prior(const PriorShape& shape,
                                                std::span<const double> lambda,
                                                std::size_t count, Rng& rng) {
  if (count == 0) throw ArgumentError("sample_prior needs at least one sample");
  auto noise = draw_noise(count, noise_dim(shape), rng);
  auto batch = push_forward(shape, lambda, noise);
  return {std::move(batch), std::move(noise)};
}

nlohmann::json shape_to_json(const PriorShape& shape) {
  if (const auto* p = std::get_if<ParametricPrior>(&shape))
    return {{"family", std::string(to_string(p->family))}, {"dims", p->dims}};
  const auto& a = std::get<ImplicitSampler>(shape);
  return {{"arch",
           {{"widths", a.widths},
            {"activation", std::string(to_string(a.hidden))},
            {"output_map", std::string(to_string(a.output_map))}}}};
}

PriorShape shape_from_json(const nlohmann::json& j) {
  if (j.contains("family")) {
    ParametricPrior p;
    p.family = parametric_family_from_string(j.at("family").get<std::string>());
    p.dims = j.value("dims", std::size_t{1});
    return p;
  }
  if (j.contains("arch")) {
    const auto& a = j.at("arch");
    ImplicitSampler s;
    s.widths = a.at("widths").get<std::vector<std::size_t>>();
    s.hidden = activation_from_string(a.value("activation", std::string("identity")));
    s.output_map = domain_map_from_string(a.value("output_map", std::string("identity")));
    validate(s);
    return s;
  }
  throw ConfigError("prior document needs 'family' or 'arch'");
}

nlohmann::json prior_to_json(const PriorApprox& prior,
                             const std::vector<std::uint64_t>& seed_history) {
  auto j = shape_to_json(prior.shape);
  j["version"] = 1;
  j["lambda"] = prior.lambda;
  j["seed_history"] = seed_history;
  return j;
}

PriorApprox prior_from_json(const nlohmann::json& j, std::vector<std::uint64_t>* seed_history) {
  if (j.value("version", 0) != 1) throw ConfigError("unsupported prior document version");
  PriorApprox p{shape_from_json(j), j.at("lambda").get<std::vector<double>>()};
  if (p.lambda.size() != lambda_size(p.shape))
    throw ConfigError("lambda length does not match prior shape");
  if (seed_history) *seed_history = j.value("seed_history", std::vector<std::uint64_t>{});
  return p;
}

}  // namespace refprior
