#pragma once

// Prior approximations that can be sampled by a differentiable map of noise.
//
// Two shapes are supported: parametric families with a non-centred
// parametrization (theta = T(m + s * eps)), and implicit samplers where a
// small feed-forward network maps latent noise to parameters. Both expose
// the sample map and the reverse-mode product cotangent^T * d theta / d lambda.

#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "refprior/common.hpp"
#include "refprior/models.hpp"

namespace refprior {

enum class ParametricFamily { normal, log_normal, logit_normal };
enum class Activation { tanh, relu, identity };
enum class DomainMap { identity, sigmoid, exp, softplus };

std::string_view to_string(ParametricFamily f);
std::string_view to_string(Activation a);
std::string_view to_string(DomainMap m);
ParametricFamily parametric_family_from_string(std::string_view s);
Activation activation_from_string(std::string_view s);
DomainMap domain_map_from_string(std::string_view s);

/// Per-dimension location/scale family. lambda = [m_1..m_D, log s_1..log s_D].
struct ParametricPrior {
  ParametricFamily family = ParametricFamily::normal;
  std::size_t dims = 1;
};

/// Feed-forward sampler. widths = [latent, hidden..., output]. Hidden layers
/// use `hidden`; the last layer is affine followed by `output_map`.
/// lambda stores, layer by layer, the weight matrix (out x in, row-major)
/// followed by the bias.
struct ImplicitSampler {
  std::vector<std::size_t> widths{5, 1};
  Activation hidden = Activation::identity;
  DomainMap output_map = DomainMap::identity;
};

using PriorShape = std::variant<ParametricPrior, ImplicitSampler>;

/// A prior shape together with its current variational parameters.
struct PriorApprox {
  PriorShape shape;
  std::vector<double> lambda;
};

/// Domain map that keeps implicit samples inside the model's support.
DomainMap default_domain_map(const LikelihoodModel& model, bool softplus_for_positive = false);
/// Parametric family whose range is the model's support.
ParametricFamily default_family(const LikelihoodModel& model);

std::size_t noise_dim(const PriorShape& shape);
std::size_t output_dim(const PriorShape& shape);
std::size_t lambda_size(const PriorShape& shape);

PriorApprox init_parametric(const ParametricPrior& prior, double location = 0.0,
                            double log_scale = 0.0);

/// Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero biases.
PriorApprox init_sampler(const ImplicitSampler& arch, Rng& rng);

ParamVector transform(const PriorShape& shape, std::span<const double> lambda,
                      std::span<const double> eps);

/// Adds cotangent^T * d theta / d lambda into grad (size lambda_size).
void grad_sample_wrt_lambda(const PriorShape& shape, std::span<const double> lambda,
                            std::span<const double> eps, std::span<const double> cotangent,
                            std::span<double> grad);

/// Standard-normal noise with its seed.
struct NoiseBatch {
  Matrix eps;
  std::uint64_t seed = 0;
};

/// Parameter draws (rows) with the method that produced them.
struct SampleBatch {
  Matrix theta;
  std::string method;
  std::uint64_t seed = 0;

  std::size_t size() const { return theta.rows(); }
};

NoiseBatch draw_noise(std::size_t rows, std::size_t cols, Rng& rng);

/// Pushes every noise row through transform.
SampleBatch push_forward(const PriorShape& shape, std::span<const double> lambda,
                         const NoiseBatch& noise, std::string method = "prior");

/// Draws S noise rows and transforms them. S must be positive.
std::pair<SampleBatch, NoiseBatch> sample_prior(const PriorShape& shape,
                                                std::span<const double> lambda,
                                                std::size_t count, Rng& rng);

/// Versioned document {"version", "family"|"arch", "lambda", "seed_history"}.
nlohmann::json prior_to_json(const PriorApprox& prior,
                             const std::vector<std::uint64_t>& seed_history);
PriorApprox prior_from_json(const nlohmann::json& j,
                            std::vector<std::uint64_t>* seed_history = nullptr);
nlohmann::json shape_to_json(const PriorShape& shape);
PriorShape shape_from_json(const nlohmann::json& j);

}  // namespace refprior
