#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "refprior/models.hpp"
#include "support/oracles.hpp"

using namespace refprior;

namespace {

double ll1(const LikelihoodModel& m, double theta, std::vector<double> xs) {
  Dataset d{std::move(xs), 1};
  const double t[1] = {theta};
  return log_likelihood(m, t, d);
}

double kld1(const LikelihoodModel& m, double a, double b) {
  const double x[1] = {a}, y[1] = {b};
  return kld_per_obs(m, x, y);
}

double h1(const LikelihoodModel& m, double a) {
  const double x[1] = {a};
  return entropy_per_obs(m, x);
}

double jeff1(const LikelihoodModel& m, double a) {
  const double x[1] = {a};
  return jeffreys_density_unnorm(m, x);
}

// random interior parameter for each scalar family
double draw_param(const LikelihoodModel& m, std::mt19937_64& rng) {
  switch (m.kind) {
    case ModelKind::bernoulli_mean: return std::uniform_real_distribution<double>(0.01, 0.99)(rng);
    case ModelKind::gaussian_mean: return std::uniform_real_distribution<double>(-5, 5)(rng);
    case ModelKind::gaussian_scale: return std::exp(std::uniform_real_distribution<double>(-1.5, 1.5)(rng));
    case ModelKind::poisson_rate: return std::exp(std::uniform_real_distribution<double>(-2, 3)(rng));
  }
  return 0.0;
}

const LikelihoodModel kFamilies[] = {LikelihoodModel::bernoulli(), LikelihoodModel::gaussian_mean(),
                                     LikelihoodModel::gaussian_scale(), LikelihoodModel::poisson()};

double brute_kld(const LikelihoodModel& m, double a, double b) {
  switch (m.kind) {
    case ModelKind::bernoulli_mean: return oracle::bernoulli_kld_sum(a, b);
    case ModelKind::gaussian_mean: return oracle::gaussian_kld_numeric(a, m.sigma, b, m.sigma);
    case ModelKind::gaussian_scale: return oracle::gaussian_kld_numeric(m.mu, a, m.mu, b);
    case ModelKind::poisson_rate: return oracle::poisson_kld_sum(a, b);
  }
  return 0.0;
}

double brute_cross_entropy(const LikelihoodModel& m, double a, double b) {
  switch (m.kind) {
    case ModelKind::bernoulli_mean:
      return -(a * std::log(b) + (1 - a) * std::log(1 - b));
    case ModelKind::gaussian_mean: return oracle::gaussian_cross_entropy_numeric(a, m.sigma, b, m.sigma);
    case ModelKind::gaussian_scale: return oracle::gaussian_cross_entropy_numeric(m.mu, a, m.mu, b);
    case ModelKind::poisson_rate: return oracle::poisson_cross_entropy_sum(a, b);
  }
  return 0.0;
}

}  // namespace

TEST_CASE("sample_dataset: degenerate coin gives all successes") {
  Rng rng(1);
  const double p[1] = {1.0};
  const auto d = sample_dataset(LikelihoodModel::bernoulli(), p, 5, rng);
  CHECK(d.values == std::vector<double>{1, 1, 1, 1, 1});
}

TEST_CASE("sample_dataset: empty request and determinism") {
  for (const auto& m : kFamilies) {
    Rng a(7);
    std::mt19937_64 g(3);
    const double t[1] = {draw_param(m, g)};
    CHECK(sample_dataset(m, t, 0, a).size() == 0);
    const auto x = sample_dataset(m, t, 200, a);
    Rng c(7);
    sample_dataset(m, t, 0, c);
    const auto y = sample_dataset(m, t, 200, c);
    CHECK(x.values == y.values);
  }
}

TEST_CASE("sample_dataset: Poisson mean converges") {
  Rng rng(11);
  const double l[1] = {3.0};
  const auto d = sample_dataset(LikelihoodModel::poisson(), l, 100000, rng);
  const double mean = std::accumulate(d.values.begin(), d.values.end(), 0.0) / d.size();
  CHECK(std::abs(mean - 3.0) < 0.05);
  for (double v : d.values) CHECK(v == std::floor(v));
}

TEST_CASE("sample_dataset rejects out-of-domain parameters") {
  Rng rng(1);
  const double bad_rate[1] = {-1.0};
  CHECK_THROWS_AS(sample_dataset(LikelihoodModel::poisson(), bad_rate, 3, rng), DomainError);
  const double bad_p[1] = {1.5};
  CHECK_THROWS_AS(sample_dataset(LikelihoodModel::bernoulli(), bad_p, 3, rng), DomainError);
  const double zero_scale[1] = {0.0};
  CHECK_THROWS_AS(sample_dataset(LikelihoodModel::gaussian_scale(), zero_scale, 3, rng), DomainError);
  const double two[2] = {1.0, 1.0};
  CHECK_THROWS_AS(sample_dataset(LikelihoodModel::poisson(), two, 3, rng), ArgumentError);
}

TEST_CASE("domain errors name the offending coordinate") {
  const auto m = LikelihoodModel::gaussian_scale(3);
  const double t[3] = {1.0, -2.0, 1.0};
  try {
    m.require_domain(t);
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("parameter[1]") != std::string::npos);
  }
}

TEST_CASE("log_likelihood examples") {
  CHECK(ll1(LikelihoodModel::bernoulli(), 0.5, {1, 0, 1}) == doctest::Approx(3 * std::log(0.5)).epsilon(1e-12));
  CHECK(ll1(LikelihoodModel::poisson(), 1.0, {0}) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(ll1(LikelihoodModel::gaussian_mean(), 0.0, {0}) ==
        doctest::Approx(-0.5 * std::log(2 * oracle::kPi)).epsilon(1e-14));
  CHECK(ll1(LikelihoodModel::gaussian_scale(), 1.0, {}) == 0.0);
}

TEST_CASE("log_likelihood: impossible observation gives the log-zero sentinel") {
  CHECK(ll1(LikelihoodModel::bernoulli(), 0.0, {1}) == kLogZero);
  CHECK(ll1(LikelihoodModel::bernoulli(), 1.0, {0, 1}) == kLogZero);
  CHECK(ll1(LikelihoodModel::bernoulli(), 1.0, {1, 1}) == 0.0);
}

TEST_CASE("log_likelihood: sufficient statistics agree with the raw sum") {
  std::mt19937_64 g(5);
  for (const auto& m : kFamilies) {
    Rng rng(9);
    const double t[1] = {draw_param(m, g)};
    const auto d = sample_dataset(m, t, 37, rng);
    const double u[1] = {draw_param(m, g)};
    double raw = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) raw += log_density_scalar(m, u[0], d.values[i]);
    CHECK(log_likelihood(m, u, summarize(m, d)) == doctest::Approx(raw).epsilon(1e-12));
    CHECK(log_likelihood(m, u, d) == doctest::Approx(raw).epsilon(1e-12));
  }
}

TEST_CASE("log_likelihood is additive over concatenated datasets") {
  std::mt19937_64 g(21);
  for (const auto& m : kFamilies) {
    for (int rep = 0; rep < 20; ++rep) {
      Rng rng(100 + rep);
      const double t[1] = {draw_param(m, g)};
      const auto a = sample_dataset(m, t, 13, rng);
      const auto b = sample_dataset(m, t, 29, rng);
      Dataset ab = a;
      ab.values.insert(ab.values.end(), b.values.begin(), b.values.end());
      const double u[1] = {draw_param(m, g)};
      const double whole = log_likelihood(m, u, ab);
      const double parts = log_likelihood(m, u, a) + log_likelihood(m, u, b);
      CHECK(std::abs(whole - parts) <= 1e-13 * std::max(1.0, std::abs(whole)));
    }
  }
}

TEST_CASE("entropy examples") {
  CHECK(h1(LikelihoodModel::bernoulli(), 0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  for (double mu : {-3.0, 0.0, 8.0}) {
    CHECK(h1(LikelihoodModel::gaussian_mean(), mu) ==
          doctest::Approx(0.5 * std::log(2 * oracle::kPi * std::exp(1.0))).epsilon(1e-14));
  }
  const double h = h1(LikelihoodModel::poisson(), 1.0);
  CHECK(std::abs(h - oracle::poisson_entropy_sum(1.0)) < 1e-9);
  CHECK(std::abs(h - 1.3049) < 1e-4);
}

TEST_CASE("Poisson entropy matches the truncated-sum oracle across rates") {
  for (double l : {0.01, 0.3, 2.0, 7.5, 40.0, 300.0})
    CHECK(std::abs(h1(LikelihoodModel::poisson(), l) - oracle::poisson_entropy_sum(l)) < 1e-9);
}

TEST_CASE("kld examples") {
  CHECK(kld1(LikelihoodModel::gaussian_mean(), 0, 2) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(kld1(LikelihoodModel::poisson(), 3, 3) == 0.0);
  CHECK(kld1(LikelihoodModel::poisson(), 2, 1) == doctest::Approx(2 * std::log(2.0) - 1).epsilon(1e-13));
  CHECK(std::abs(kld1(LikelihoodModel::poisson(), 2, 1) - oracle::poisson_kld_sum(2, 1)) < 1e-10);
  const double ref = std::log(2.0) + 1.0 / 8 - 0.5;
  CHECK(kld1(LikelihoodModel::gaussian_scale(), 1, 2) == doctest::Approx(ref).epsilon(1e-13));
  CHECK(std::abs(oracle::gaussian_kld_numeric(0, 1, 0, 2) - ref) < 1e-8);
}

TEST_CASE("kld: Bernoulli against a degenerate coin is infinite") {
  const auto m = LikelihoodModel::bernoulli();
  CHECK(kld1(m, 0.3, 0.0) == kInfiniteDivergence);
  CHECK(kld1(m, 0.3, 1.0) == kInfiniteDivergence);
  CHECK(kld1(m, 1.0, 1.0) == 0.0);
  CHECK(kld1(m, 0.0, 0.4) == doctest::Approx(-std::log(0.6)).epsilon(1e-14));
}

TEST_CASE("kld is nonnegative and vanishes only on the diagonal") {
  std::mt19937_64 g(77);
  for (const auto& m : kFamilies) {
    for (int i = 0; i < 1000; ++i) {
      const double a = draw_param(m, g), b = draw_param(m, g);
      const double k = kld1(m, a, b);
      CHECK(k >= 0.0);
      if (std::abs(a - b) > 1e-3) CHECK(k > 0.0);
      CHECK(std::abs(kld1(m, a, a)) <= 1e-12);
    }
  }
}

TEST_CASE("kld matches brute-force oracles") {
  std::mt19937_64 g(2024);
  for (const auto& m : kFamilies) {
    for (int i = 0; i < 12; ++i) {
      const double a = draw_param(m, g), b = draw_param(m, g);
      CHECK(std::abs(kld1(m, a, b) - brute_kld(m, a, b)) < 1e-6);
    }
  }
}

TEST_CASE("entropy plus kld equals the brute-force cross-entropy") {
  std::mt19937_64 g(99);
  for (const auto& m : kFamilies) {
    for (int i = 0; i < 8; ++i) {
      const double a = draw_param(m, g), b = draw_param(m, g);
      CHECK(std::abs(h1(m, a) + kld1(m, a, b) - brute_cross_entropy(m, a, b)) < 1e-6);
    }
  }
}

TEST_CASE("kld gradient matches finite differences") {
  std::mt19937_64 g(8);
  for (const auto& m : kFamilies) {
    for (int i = 0; i < 50; ++i) {
      std::vector<double> ab = {draw_param(m, g), draw_param(m, g)};
      double ga[1], gb[1];
      kld_gradient(m, std::span<const double>(&ab[0], 1), std::span<const double>(&ab[1], 1), ga, gb);
      auto f = [&](const std::vector<double>& v) { return kld1(m, v[0], v[1]); };
      CHECK(oracle::close_rel(ga[0], oracle::central_diff(f, ab, 0), 1e-4, 1e-6));
      CHECK(oracle::close_rel(gb[0], oracle::central_diff(f, ab, 1), 1e-4, 1e-6));
    }
  }
}

TEST_CASE("multivariate scale kld is the sum of per-dimension terms") {
  const auto m = LikelihoodModel::gaussian_scale(3);
  const double a[3] = {0.5, 1.0, 2.0}, b[3] = {1.5, 1.0, 0.7};
  const auto s = LikelihoodModel::gaussian_scale();
  CHECK(kld_per_obs(m, a, b) ==
        doctest::Approx(kld1(s, 0.5, 1.5) + kld1(s, 1.0, 1.0) + kld1(s, 2.0, 0.7)).epsilon(1e-14));
}

TEST_CASE("Jeffreys density examples") {
  CHECK(jeff1(LikelihoodModel::gaussian_scale(), 2.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(jeff1(LikelihoodModel::poisson(), 4.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(jeff1(LikelihoodModel::bernoulli(), 0.5) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(jeff1(LikelihoodModel::gaussian_mean(), -4.0) == 1.0);
  CHECK_THROWS_AS(jeff1(LikelihoodModel::bernoulli(), 0.0), DomainError);
  CHECK_THROWS_AS(jeff1(LikelihoodModel::bernoulli(), 1.0), DomainError);
  CHECK_THROWS_AS(jeff1(LikelihoodModel::poisson(), 0.0), DomainError);
}

TEST_CASE("model descriptors round-trip through JSON") {
  for (auto m : {LikelihoodModel::bernoulli(), LikelihoodModel::gaussian_mean(2.5),
                 LikelihoodModel::gaussian_scale(4, -1.0), LikelihoodModel::poisson()})
    CHECK(model_from_json(to_json(m)) == m);
  CHECK_THROWS_AS(model_from_json(nlohmann::json{{"kind", "cauchy"}}), ConfigError);
  CHECK_THROWS_AS(model_from_json(nlohmann::json{{"kind", "poisson_rate"}, {"dims", 2}}), ConfigError);
}
