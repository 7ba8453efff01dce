#include "refprior/kernels.hpp"

#include <cmath>
#include <string>

namespace refprior::kernels {

namespace {

// Runs body(i) for i in [0, n). The parallel branch uses a static schedule;
// bodies only write to slot i, so the order of execution is irrelevant.
template <typename Body>
void for_each_index(std::size_t n, Exec exec, Body&& body) {
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
}

// Exceptions may not cross an OpenMP region; record the first failure per
// slot and rethrow after the loop in index order.
struct SlotErrors {
  explicit SlotErrors(std::size_t n) : messages(n) {}
  std::vector<std::string> messages;
  std::vector<char> kind = std::vector<char>(messages.size(), 0);

  template <typename F>
  void guard(std::size_t i, F&& f) {
    try {
      f();
    } catch (const DomainError& e) {
      messages[i] = e.what();
      kind[i] = 'd';
    } catch (const NumericError& e) {
      messages[i] = e.what();
      kind[i] = 'n';
    } catch (const std::exception& e) {
      messages[i] = e.what();
      kind[i] = 'a';
    }
  }

  void rethrow() const {
    for (std::size_t i = 0; i < kind.size(); ++i) {
      if (kind[i] == 0) continue;
      if (kind[i] == 'd') throw DomainError(messages[i]);
      if (kind[i] == 'n') throw NumericError(messages[i]);
      throw ArgumentError(messages[i]);
    }
  }
};

}  // namespace

std::vector<std::size_t> nearest_by_kld(const LikelihoodModel& model, const Matrix& theta,
                                        Exec exec) {
  const std::size_t s_count = theta.rows();
  if (s_count < 2) throw ArgumentError("leave-one-out selection needs at least two samples");
  std::vector<std::size_t> out(s_count);
  SlotErrors errors(s_count);
  for_each_index(s_count, exec, [&](std::size_t s) {
    errors.guard(s, [&] {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_index = s == 0 ? 1 : 0;
      for (std::size_t o = 0; o < s_count; ++o) {
        if (o == s) continue;
        const double k = kld_per_obs(model, theta.row(s), theta.row(o));
        if (k < best) {
          best = k;
          best_index = o;
        }
      }
      out[s] = best_index;
    });
  });
  errors.rethrow();
  return out;
}

std::vector<std::size_t> argmax_likelihood(const LikelihoodModel& model, const Matrix& theta,
                                           std::size_t n_obs, std::uint64_t seed, Exec exec) {
  const std::size_t s_count = theta.rows();
  if (s_count == 0) throw ArgumentError("selection needs at least one sample");
  std::vector<std::size_t> out(s_count);
  SlotErrors errors(s_count);
  for_each_index(s_count, exec, [&](std::size_t s) {
    errors.guard(s, [&] {
      Rng rng = make_stream(seed, s);
      const auto data = sample_dataset(model, theta.row(s), n_obs, rng);
      const auto stats = summarize(model, data);
      double best = -std::numeric_limits<double>::infinity();
      std::size_t best_index = 0;
      for (std::size_t o = 0; o < s_count; ++o) {
        const double ll = log_likelihood(model, theta.row(o), stats);
        if (ll > best) {
          best = ll;
          best_index = o;
        }
      }
      out[s] = best_index;
    });
  });
  errors.rethrow();
  return out;
}

KldTerms kld_terms(const LikelihoodModel& model, const Matrix& theta,
                   std::span<const std::size_t> selection, Exec exec) {
  const std::size_t s_count = theta.rows();
  const std::size_t dims = theta.cols();
  if (selection.size() != s_count) throw ArgumentError("selection size does not match batch");
  for (auto j : selection)
    if (j >= s_count) throw ArgumentError("selection index out of range");

  KldTerms out{std::vector<double>(s_count), Matrix(s_count, dims)};
  Matrix grad_self(s_count, dims);
  Matrix grad_other(s_count, dims);
  SlotErrors errors(s_count);
  for_each_index(s_count, exec, [&](std::size_t s) {
    errors.guard(s, [&] {
      const auto a = theta.row(s);
      const auto b = theta.row(selection[s]);
      const double k = kld_per_obs(model, a, b);
      if (!std::isfinite(k) || k == kInfiniteDivergence)
        throw NumericError("non-finite divergence at sample " + std::to_string(s));
      kld_gradient(model, a, b, grad_self.row(s), grad_other.row(s));
      for (std::size_t d = 0; d < dims; ++d)
        if (!std::isfinite(grad_self(s, d)) || !std::isfinite(grad_other(s, d)))
          throw NumericError("non-finite divergence gradient at sample " + std::to_string(s));
      out.value[s] = k;
    });
  });
  errors.rethrow();
  for (std::size_t s = 0; s < s_count; ++s)
    for (std::size_t d = 0; d < dims; ++d) {
      out.grad_theta(s, d) += grad_self(s, d);
      out.grad_theta(selection[s], d) += grad_other(s, d);
    }
  return out;
}

Matrix grad_log_f_all(const LikelihoodModel& model, const Matrix& particles,
                      const Matrix& samples, std::size_t n_obs, Exec exec) {
  if (samples.rows() == 0) throw ArgumentError("grad_log_f needs at least one prior sample");
  const std::size_t dims = particles.cols();
  Matrix out(particles.rows(), dims);
  const double scale = static_cast<double>(n_obs) / static_cast<double>(samples.rows());
  SlotErrors errors(particles.rows());
  for_each_index(particles.rows(), exec, [&](std::size_t k) {
    errors.guard(k, [&] {
      std::vector<double> ga(dims), gb(dims), acc(dims, 0.0);
      for (std::size_t s = 0; s < samples.rows(); ++s) {
        kld_gradient(model, particles.row(k), samples.row(s), ga, gb);
        for (std::size_t d = 0; d < dims; ++d) acc[d] += ga[d];
      }
      for (std::size_t d = 0; d < dims; ++d) out(k, d) = scale * acc[d];
    });
  });
  errors.rethrow();
  return out;
}

Matrix stein_direction(const Kernel& kernel, const Matrix& points, const Matrix& grads,
                       const Matrix& jacobian, Exec exec) {
  const std::size_t k_count = points.rows();
  const std::size_t dims = points.cols();
  if (grads.rows() != k_count || grads.cols() != dims || jacobian.rows() != k_count ||
      jacobian.cols() != dims)
    throw ArgumentError("stein_direction: shape mismatch");
  Matrix phi(k_count, dims);
  SlotErrors errors(k_count);
  const double inv_k = 1.0 / static_cast<double>(k_count);
  for_each_index(k_count, exec, [&](std::size_t j) {
    errors.guard(j, [&] {
      std::vector<double> gk(dims), acc(dims, 0.0);
      for (std::size_t k = 0; k < k_count; ++k) {
        const double kv = kernel_eval(kernel, points.row(k), points.row(j));
        kernel_grad_x(kernel, points.row(k), points.row(j), gk);
        for (std::size_t d = 0; d < dims; ++d)
          acc[d] += kv * grads(k, d) + gk[d] * jacobian(k, d);
      }
      for (std::size_t d = 0; d < dims; ++d) phi(j, d) = inv_k * acc[d];
    });
  });
  errors.rethrow();
  return phi;
}

std::vector<double> berger_log_prior_grid(const LikelihoodModel& model,
                                          std::span<const double> grid, const BergerConfig& cfg,
                                          std::uint64_t seed, Exec exec) {
  std::vector<double> out(grid.size());
  SlotErrors errors(grid.size());
  for_each_index(grid.size(), exec, [&](std::size_t i) {
    errors.guard(i, [&] {
      Rng rng = make_stream(seed, i);
      out[i] = berger_log_prior_at(model, grid[i], cfg, rng);
    });
  });
  errors.rethrow();
  return out;
}

}  // namespace refprior::kernels
