#pragma once

// Amortized Stein variational gradient descent toward the reference-prior
// functional f, with log f's gradient taken through a mean KLD against
// samples of the current sampler.

#include <optional>
#include <span>

#include <json.hpp>

#include "refprior/adam.hpp"
#include "refprior/common.hpp"
#include "refprior/infobound.hpp"
#include "refprior/models.hpp"
#include "refprior/priors.hpp"

namespace refprior {

enum class KernelKind { rbf, sobolev01 };

/// RBF: k = exp(-|x-y|^2 / h) with h = bandwidth.
/// Sobolev01 (product over dimensions, a = 1/length_scale):
///   k = cosh(a min(x,y)) cosh(a (1 - max(x,y))) / (a sinh a).
/// With log_space set, particles are mapped through log before evaluation.
struct Kernel {
  KernelKind kind = KernelKind::rbf;
  double length_scale = 1.0;
  bool median_heuristic = false;
  bool log_space = false;
};

double kernel_eval(const Kernel& k, std::span<const double> x, std::span<const double> y);
/// Gradient of kernel_eval with respect to x (chain rule through log when
/// log_space is set).
void kernel_grad_x(const Kernel& k, std::span<const double> x, std::span<const double> y,
                   std::span<double> out);

/// h = med^2 / ln(K) (ln K floored at ln 2, h floored at 1e-8) where med is
/// the median pairwise Euclidean distance. Needs K >= 2.
double median_heuristic(const Matrix& points);

/// Particles mapped into the kernel's coordinates (log for log_space).
Matrix kernel_coordinates(const Kernel& k, const Matrix& particles);

/// Kernel with a concrete bandwidth; computes the median heuristic when asked.
Kernel resolve_bandwidth(const Kernel& k, const Matrix& particles);

struct ParticleState {
  Matrix particles;   // K x D
  Matrix noise;       // K x d0, the eps that generated the particles
  double eta = 0.1;
};

/// d/d theta of N * mean_s KLD[p(x|theta) || p(x|samples_s)].
ParamVector grad_log_f(const LikelihoodModel& model, std::span<const double> particle,
                       const SampleBatch& samples, std::size_t n_obs);

/// phi_j = (1/K) sum_k k(x_k, x_j) grad_k + grad_{x_k} k(x_k, x_j), returned in
/// parameter coordinates.
Matrix svgd_direction(const ParticleState& state, const Kernel& kernel, const Matrix& gradients);

/// Gradient of ||g(lambda, eps) - stop(theta + eta * phi)||^2 at the current
/// lambda: -2 (eta phi)^T dg/dlambda summed over particles.
std::vector<double> amortized_gradient(const PriorShape& sampler, std::span<const double> lambda,
                                       const Matrix& noise, const Matrix& phi, double eta);

/// Loss the amortized step minimizes, for finite-difference checks.
double amortized_loss(const PriorShape& sampler, std::span<const double> lambda,
                      const Matrix& noise, const Matrix& targets);

/// One AdaM step on the amortized loss. Updates lambda in place.
void amortized_step(const PriorShape& sampler, std::span<double> lambda, const Matrix& noise,
                    const Matrix& phi, double eta, AdamState& optimizer);

struct SvgdConfig {
  std::size_t particles = 50;
  std::size_t samples = 50;
  std::size_t n_obs = 1;
  double eta = 0.1;
  std::size_t iterations = 250;
  double lr = 1e-4;
  Kernel kernel;
};

/// Trace objective is ||eta phi||^2 per iteration.
TrainResult train_svgd(const LikelihoodModel& model, const PriorApprox& sampler,
                       const SvgdConfig& cfg, Rng& rng);

/// Kernel the recovery experiments pair with each model: Sobolev (length 2)
/// on the unit interval for Bernoulli, median-heuristic RBF in log space for
/// positive parameters, plain median-heuristic RBF otherwise.
Kernel default_kernel(const LikelihoodModel& model);

nlohmann::json to_json(const Kernel& k);
Kernel kernel_from_json(const nlohmann::json& j);

}  // namespace refprior
