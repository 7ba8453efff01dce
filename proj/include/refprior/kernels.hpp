#pragma once

// Data-parallel inner loops. Every kernel has a serial reference and an
// OpenMP version that produce bit-identical results: parallel loops write
// per-index outputs and any reduction runs afterwards in index order.

#include <span>
#include <vector>

#include "refprior/baselines.hpp"
#include "refprior/common.hpp"
#include "refprior/models.hpp"
#include "refprior/svgd.hpp"

namespace refprior::kernels {

enum class Exec { serial, parallel };

/// For each row s, the row s' != s minimising KLD(theta_s || theta_s').
/// Ties go to the lowest index.
std::vector<std::size_t> nearest_by_kld(const LikelihoodModel& model, const Matrix& theta,
                                        Exec exec = Exec::parallel);

/// For each row s, draws n_obs observations from theta_s on stream (seed, s)
/// and returns the row with the largest log-likelihood (lowest index on ties).
std::vector<std::size_t> argmax_likelihood(const LikelihoodModel& model, const Matrix& theta,
                                           std::size_t n_obs, std::uint64_t seed,
                                           Exec exec = Exec::parallel);

struct KldTerms {
  std::vector<double> value;  // KLD(theta_s || theta_sel(s)) per sample
  Matrix grad_theta;          // d/d theta of sum_s value_s
};

/// Per-sample divergences for a fixed selection, with the gradient scattered
/// onto both arguments. Throws NumericError naming the sample on non-finite terms.
KldTerms kld_terms(const LikelihoodModel& model, const Matrix& theta,
                   std::span<const std::size_t> selection, Exec exec = Exec::parallel);

/// grad_log_f for every particle row.
Matrix grad_log_f_all(const LikelihoodModel& model, const Matrix& particles,
                      const Matrix& samples, std::size_t n_obs, Exec exec = Exec::parallel);

/// Stein direction in kernel coordinates. `points` are the particles in the
/// kernel's coordinates, `grads` the score in parameter coordinates and
/// `jacobian` d(kernel coordinate)/d(parameter) per entry (all ones for the
/// identity map). Output is in parameter coordinates.
Matrix stein_direction(const Kernel& kernel, const Matrix& points, const Matrix& grads,
                       const Matrix& jacobian, Exec exec = Exec::parallel);

/// Berger log-prior estimate at each grid point; point i uses stream (seed, i).
std::vector<double> berger_log_prior_grid(const LikelihoodModel& model,
                                          std::span<const double> grid, const BergerConfig& cfg,
                                          std::uint64_t seed, Exec exec = Exec::parallel);

}  // namespace refprior::kernels
