// Runs the acceptance criteria and prints one PASS/FAIL line each.
// Usage: acceptance [c1 ... c9]; no arguments runs them all.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "refprior/baselines.hpp"
#include "refprior/eval.hpp"
#include "refprior/experiments.hpp"
#include "refprior/infobound.hpp"
#include "refprior/svgd.hpp"
#include "support/oracles.hpp"

using namespace refprior;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// C1 ------------------------------------------------------------------------

Outcome jeffreys_recovery() {
  const double bound = 0.0607 * 1.5;
  const std::vector<std::string> learned = {"parametric", "implicit", "particle"};
  bool pass = true;
  std::ostringstream detail;
  for (const char* kind : {"bernoulli_mean", "gaussian_scale", "poisson_rate"}) {
    const auto cfg = effective_config("exp-jeffreys", {{"model", {{"kind", kind}}}});
    const auto seeds = cfg.at("seeds").get<std::vector<std::uint64_t>>();
    const auto t0 = Clock::now();
    std::map<std::string, int> below;
    int beats_uniform = 0;
    std::map<std::string, double> worst;
    for (auto seed : seeds) {
      const auto cell = run_jeffreys_cell(cfg, seed);
      std::map<std::pair<std::string, std::size_t>, double> ksd;
      for (const auto& r : cell.curve.rows) ksd[{r.method, r.n}] = r.ksd;
      bool all_better = true;
      for (std::size_t n : {250, 500, 1000})
        for (const auto& m : learned) all_better = all_better && ksd[{m, n}] < ksd[{"uniform", n}];
      beats_uniform += all_better;
      for (const auto& m : learned) {
        const double k = ksd[{m, 1000}];
        below[m] += k < bound;
        worst[m] = std::max(worst[m], k);
      }
    }
    const double secs = seconds_since(t0);
    const std::string k = kind;
    bool ok = beats_uniform >= 4 && secs < 180.0;
    if (k == "bernoulli_mean") ok = ok && below["parametric"] >= 3;
    else ok = ok && below["implicit"] >= 3;
    pass = pass && ok;
    detail << k << ": parametric<" << fmt("%.4f", bound) << " in " << below["parametric"] << "/5, implicit "
           << below["implicit"] << "/5, particle " << below["particle"] << "/5; learned<uniform at all n in "
           << beats_uniform << "/5; " << fmt("%.0f", secs) << " s. ";
  }
  return {pass, detail.str()};
}

// C2 ------------------------------------------------------------------------

Outcome gaussian_mean_divergence() {
  // the criterion fixes no learning rate; 1e-2 lets the scale move within 250 steps
  const double lr = 1e-2;
  std::vector<std::vector<double>> scales;
  for (std::uint64_t seed : {0, 1, 2}) {
    InfoBoundConfig cfg;
    cfg.lr = lr;
    cfg.snapshot_interval = 1;
    Rng rng = make_stream(seed, 0);
    const auto r = train_info_bound(LikelihoodModel::gaussian_mean(), init_parametric(ParametricPrior{}), cfg, rng);
    std::vector<double> s = {1.0};
    for (const auto& [it, lambda] : r.trace.snapshots) s.push_back(std::exp(lambda[1]));
    scales.push_back(s);
  }
  std::vector<double> median(scales[0].size());
  for (std::size_t t = 0; t < median.size(); ++t) {
    std::vector<double> v = {scales[0][t], scales[1][t], scales[2][t]};
    std::sort(v.begin(), v.end());
    median[t] = v[1];
  }
  const double ratio = median.back() / median.front();
  bool windows = true;
  for (std::size_t t = 0; t + 50 < median.size(); ++t) windows = windows && median[t + 50] >= median[t];
  std::size_t step_decreases = 0;
  for (std::size_t t = 1; t < median.size(); ++t) step_decreases += median[t] < median[t - 1];
  return {ratio > 5.0 && windows,
          "lr 1e-2: median final/initial scale " + fmt("%.3f", ratio) + ", every 50-iteration window " +
              (windows ? "nondecreasing" : "has a decrease") + ", single-step decreases " +
              std::to_string(step_decreases)};
}

// C3 ------------------------------------------------------------------------

Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  std::mt19937_64 g(2024);
  std::normal_distribution<double> n(0.0, 0.4);
  const LikelihoodModel models[] = {LikelihoodModel::bernoulli(), LikelihoodModel::gaussian_mean(),
                                    LikelihoodModel::gaussian_scale(), LikelihoodModel::poisson(),
                                    LikelihoodModel::gaussian_scale(3)};
  std::size_t checked = 0, bad = 0;
  double worst = 0.0;
  auto compare = [&](double a, double b) {
    ++checked;
    if (!oracle::close_rel(a, b, 1e-4, 1e-6)) {
      ++bad;
      worst = std::max(worst, std::abs(a - b) / std::max(std::abs(a), std::abs(b)));
    }
  };
  for (int c = 0; c < 100; ++c) {
    const auto& m = models[c % 5];
    Rng rng(c);
    PriorShape shape;
    std::vector<double> lambda;
    if (c % 2 == 0) {
      shape = ParametricPrior{default_family(m), m.param_dim()};
      lambda.resize(2 * m.param_dim());
      for (auto& x : lambda) x = n(g);
    } else {
      const ImplicitSampler arch{{3, 4, m.param_dim()}, c % 4 == 1 ? Activation::tanh : Activation::identity,
                                 default_domain_map(m)};
      shape = arch;
      lambda = init_sampler(arch, rng).lambda;
    }
    const auto noise = draw_noise(6, noise_dim(shape), rng);
    const std::size_t n_obs = 1 + c % 3;
    const auto sel = select_all(m, push_forward(shape, lambda, noise), MaxMode::analytic_loo, n_obs, rng);
    const auto grad = jrp_gradient(m, shape, lambda, noise, sel, n_obs);
    auto objective = [&](const std::vector<double>& l) {
      return jrp_value(m, push_forward(shape, l, noise), sel, n_obs);
    };
    for (std::size_t i = 0; i < lambda.size(); ++i) compare(grad[i], oracle::central_diff(objective, lambda, i));

    Matrix phi(noise.eps.rows(), m.param_dim());
    for (auto& x : phi.data()) x = n(g);
    const double eta = 0.1;
    Matrix targets = push_forward(shape, lambda, noise).theta;
    for (std::size_t i = 0; i < targets.data().size(); ++i) targets.data()[i] += eta * phi.data()[i];
    const auto ag = amortized_gradient(shape, lambda, noise.eps, phi, eta);
    auto loss = [&](const std::vector<double>& l) { return amortized_loss(shape, l, noise.eps, targets); };
    for (std::size_t i = 0; i < lambda.size(); ++i) compare(ag[i], oracle::central_diff(loss, lambda, i));
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 30.0, std::to_string(checked) + " partials over 100 configurations, " +
                                       std::to_string(bad) + " outside tolerance" +
                                       (bad ? " (worst rel " + fmt("%.2e", worst) + ")" : std::string()) +
                                       ", " + fmt("%.1f", secs) + " s"};
}

// C4 ------------------------------------------------------------------------

Outcome kld_oracles() {
  std::ostringstream detail;
  bool pass = true;
  struct Family {
    LikelihoodModel model;
    double lo, hi;
    bool log_grid;
  };
  const Family fams[] = {{LikelihoodModel::bernoulli(), 0.02, 0.98, false},
                         {LikelihoodModel::gaussian_mean(), -5.0, 5.0, false},
                         {LikelihoodModel::gaussian_scale(), 0.2, 5.0, true},
                         {LikelihoodModel::poisson(), 0.1, 20.0, true}};
  for (const auto& f : fams) {
    std::vector<double> grid(20);
    for (int i = 0; i < 20; ++i) {
      const double u = i / 19.0;
      grid[i] = f.log_grid ? std::exp(std::log(f.lo) + u * (std::log(f.hi) - std::log(f.lo)))
                           : f.lo + u * (f.hi - f.lo);
    }
    double worst = 0.0;
    for (double a : grid)
      for (double b : grid) {
        const double x[1] = {a}, y[1] = {b};
        const double closed = kld_per_obs(f.model, x, y);
        double ref = 0.0;
        switch (f.model.kind) {
          case ModelKind::bernoulli_mean: ref = oracle::bernoulli_kld_sum(a, b); break;
          case ModelKind::gaussian_mean: ref = oracle::gaussian_kld_numeric(a, 1.0, b, 1.0); break;
          case ModelKind::gaussian_scale: ref = oracle::gaussian_kld_numeric(0.0, a, 0.0, b); break;
          case ModelKind::poisson_rate: ref = oracle::poisson_kld_sum(a, b); break;
        }
        worst = std::max(worst, std::abs(closed - ref));
      }
    pass = pass && worst <= 1e-6;
    detail << to_string(f.model.kind) << " max abs diff " << fmt("%.2e", worst) << "; ";
  }
  return {pass, detail.str()};
}

// C5 ------------------------------------------------------------------------

Outcome svgd_single_particle() {
  std::mt19937_64 g(5);
  std::normal_distribution<double> n(0.0, 3.0);
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    const std::size_t d = 1 + c % 4;
    ParticleState st{Matrix(1, d), Matrix(1, 1), 0.1};
    Matrix grads(1, d);
    for (auto& x : st.particles.data()) x = n(g);
    for (auto& x : grads.data()) x = n(g);
    const Kernel k{KernelKind::rbf, 0.1 + 0.05 * c, false, false};
    const auto phi = svgd_direction(st, k, grads);
    for (std::size_t i = 0; i < d; ++i) worst = std::max(worst, std::abs(phi(0, i) - grads(0, i)));
  }
  return {worst <= 1e-12, "max abs difference " + fmt("%.2e", worst) + " over 100 cases"};
}

// C6 ------------------------------------------------------------------------

Outcome vr_max_limit() {
  std::mt19937_64 g(6);
  std::normal_distribution<double> n;
  const LikelihoodModel models[] = {LikelihoodModel::gaussian_mean(), LikelihoodModel::poisson(),
                                    LikelihoodModel::bernoulli()};
  double worst = 0.0;
  std::size_t non_monotone = 0;
  for (int c = 0; c < 100; ++c) {
    const auto& m = models[c % 3];
    Rng rng(c);
    SampleBatch batch;
    batch.theta = Matrix(20, 1);
    for (auto& x : batch.theta.data()) {
      x = n(g);
      if (m.kind == ModelKind::poisson_rate) x = std::exp(x);
      if (m.kind == ModelKind::bernoulli_mean) x = 1 / (1 + std::exp(-x));
    }
    const double t[1] = {batch.theta(0, 0)};
    const auto data = sample_dataset(m, t, 1 + c % 10, rng);
    worst = std::max(worst, std::abs(vr_bound(m, data, batch, -1e4) - vr_bound(m, data, batch, kVrMax)));
    double prev = -std::numeric_limits<double>::infinity();
    for (double a : {0.0, -1.0, -10.0, -100.0}) {
      // as alpha decreases the bound can only grow, i.e. nonincreasing in alpha
      const double v = vr_bound(m, data, batch, a);
      if (v < prev - 1e-12) ++non_monotone;
      prev = v;
    }
  }
  return {worst <= 1e-3 && non_monotone == 0, "max |alpha=-1e4 - max| " + fmt("%.2e", worst) +
                                                  ", monotonicity violations " + std::to_string(non_monotone)};
}

// C7 ------------------------------------------------------------------------

Outcome berger_fidelity() {
  const auto m = LikelihoodModel::bernoulli();
  BergerConfig cfg;
  Rng rng = make_stream(0, 3);
  const auto grid = berger_grid_sampler(m, cfg, rng);
  std::vector<double> arcsine;
  for (double p : grid.points()) arcsine.push_back(1.0 / (oracle::kPi * std::sqrt(p * (1 - p))));
  const double corr = oracle::pearson(grid.probabilities(), arcsine);

  double worst = 0.0;
  for (std::size_t s : {1, 10, 50}) {
    BergerConfig c = cfg;
    c.samples = s;
    for (double theta0 : {0.01, 0.3, 0.5, 0.97}) {
      Rng r(s);
      const std::vector<double> forced(s, theta0);
      worst = std::max(worst, std::abs(berger_log_prior_at(m, theta0, c, forced, r) - std::log(1.0 / s)));
    }
  }
  return {corr >= 0.95 && worst <= 1e-12,
          "Pearson with arcsine density " + fmt("%.4f", corr) + " (need >= 0.95); cancellation error " +
              fmt("%.1e", worst)};
}

// C8 ------------------------------------------------------------------------

Outcome stability_trends() {
  const auto t0 = Clock::now();
  const auto cfg = effective_config("exp-stability", {{"model", {{"kind", "gaussian_scale"}, {"dims", 5}}}});
  const auto cells = run_stability_cells(cfg);
  const auto summary = stability_summary(cells, cfg);
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << "median tail std over dims {";
  for (const auto& r : summary.at("dim_sweep")) d << ' ' << fmt("%.4g", r.at("median_tail_std").get<double>());
  d << " } over samples {";
  for (const auto& r : summary.at("sample_sweep")) d << ' ' << fmt("%.4g", r.at("median_tail_std").get<double>());
  d << " }, " << fmt("%.0f", secs) << " s";
  const bool ok = summary.at("std_decreases_with_dims").get<bool>() &&
                  summary.at("std_increases_with_samples").get<bool>() && secs < 300.0;
  return {ok, d.str()};
}

// C9 ------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& command, const fs::path& cfg, const fs::path& out) {
  const std::string cmd = std::string(REFPRIOR_CLI) + " " + command + " --config " + cfg.string() +
                          " --seed 7 --out " + out.string() + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  const auto root = fs::temp_directory_path() / "refprior_acceptance_c9";
  fs::remove_all(root);
  fs::create_directories(root);
  {
    std::ofstream(root / "ref.csv") << "theta0\n0.2\n0.5\n0.9\n0.4\n0.45\n";
  }
  const std::map<std::string, std::string> configs = {
      {"train-info", R"({"model":{"kind":"bernoulli_mean"},"info":{"iterations":20,"samples":10,"batch":20},"eval":{"draws":200}})"},
      {"train-svgd", R"({"model":{"kind":"poisson_rate"},"svgd":{"iterations":20,"particles":10,"samples":10},"eval":{"draws":200}})"},
      {"baseline-berger", R"({"model":{"kind":"bernoulli_mean"},"berger":{"datasets":10,"samples":10,"n_obs":50,"grid_size":100},"eval":{"draws":200}})"},
      {"baseline-mcmc", R"({"model":{"kind":"gaussian_scale"},"mcmc":{"iterations":300,"samples_per_iteration":10,"x_grid_size":100,"kept":100}})"},
      {"eval-ks", R"({"model":{"kind":"bernoulli_mean"},"eval":{"samples_csv":"ref.csv","sizes":[2,5]}})"},
      {"exp-jeffreys", R"({"model":{"kind":"poisson_rate"},
        "parametric":{"info":{"iterations":5,"samples":10,"batch":10}},
        "implicit":{"info":{"iterations":5,"samples":10,"batch":10}},
        "particle":{"svgd":{"iterations":5,"particles":10,"samples":10}},
        "berger":{"datasets":5,"samples":5,"n_obs":20,"grid_size":50},
        "mcmc":{"iterations":100,"samples_per_iteration":5,"x_grid_size":30,"kept":50},
        "eval":{"draws":50,"sizes":[25,50],"grid_size":100}})"},
      {"exp-stability", R"({"model":{"kind":"gaussian_scale","dims":5},"info":{"iterations":20},
        "sample_sweep":{"dims":3,"samples":[5,10]},"dim_sweep":{"samples":10,"dims":[2,4]},"tail":10})"}};
  std::size_t compared = 0;
  std::vector<std::string> failures;
  for (const auto& [command, text] : configs) {
    const auto cfg = root / (command + ".json");
    std::ofstream(cfg) << text;
    const auto a = root / (command + "_a"), b = root / (command + "_b");
    if (run_cli(command, cfg, a) != 0 || run_cli(command, cfg, b) != 0) {
      failures.push_back(command + " did not exit 0");
      continue;
    }
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
      if (!e.is_regular_file() || e.path().filename() == "timing.json") continue;
      ++files;
      const auto other = b / fs::relative(e.path(), a);
      if (!fs::exists(other) || slurp(e.path()) != slurp(other)) failures.push_back(fs::relative(e.path(), root).string());
    }
    std::size_t files_b = 0;
    for (const auto& e : fs::recursive_directory_iterator(b))
      if (e.is_regular_file() && e.path().filename() != "timing.json") ++files_b;
    if (files != files_b) failures.push_back(command + " file sets differ");
    compared += files;
  }
  std::string detail = std::to_string(configs.size()) + " commands, " + std::to_string(compared) +
                       " files compared byte for byte (timing.json excluded)";
  for (const auto& f : failures) detail += "; differs: " + f;
  return {failures.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"c1", jeffreys_recovery},    {"c2", gaussian_mean_divergence}, {"c3", gradient_correctness},
      {"c4", kld_oracles},          {"c5", svgd_single_particle},     {"c6", vr_max_limit},
      {"c7", berger_fidelity},      {"c8", stability_trends},         {"c9", determinism}};
  std::vector<std::string> wanted(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("criterion %s: %s  %s\n", name.c_str() + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
