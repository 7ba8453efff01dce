#include "refprior/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include <omp.h>

#include "refprior/io.hpp"

namespace refprior {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool is_experiment(std::string_view command) {
  return command == "exp-jeffreys" || command == "exp-stability";
}

std::size_t get_count(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(std::string("'") + key + "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

double get_real(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

std::vector<std::size_t> get_counts(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_array()) throw ConfigError(std::string("'") + key + "' must be an array");
  std::vector<std::size_t> out;
  for (const auto& e : v) {
    if (!e.is_number_integer() || e.get<long long>() < 0)
      throw ConfigError(std::string("'") + key + "' entries must be nonnegative integers");
    out.push_back(e.get<std::size_t>());
  }
  return out;
}

json prior_defaults(const LikelihoodModel& model, const std::string& type) {
  if (type == "parametric")
    return {{"type", "parametric"},
            {"family", std::string(to_string(default_family(model)))},
            {"init_location", 0.0},
            {"init_log_scale", 0.0}};
  return {{"type", "implicit"},
          {"widths", std::vector<std::size_t>{5, model.param_dim()}},
          {"activation", "identity"},
          {"output_map", std::string(to_string(default_domain_map(model)))},
          {"init", "glorot_uniform"}};
}

json info_defaults(double lr) {
  return {{"samples", 50},       {"n_obs", 1},
          {"iterations", 250},   {"batch", 100},
          {"lr", lr},            {"max_mode", "analytic_loo"},
          {"alpha", "max"},      {"snapshot_interval", 0}};
}

json svgd_defaults(const LikelihoodModel& model) {
  return {{"particles", 50}, {"samples", 50},     {"n_obs", 1},
          {"eta", 0.1},      {"iterations", 250}, {"lr", 1e-4},
          {"kernel", to_json(default_kernel(model))}};
}

json berger_defaults() {
  return {{"datasets", 100}, {"samples", 50}, {"n_obs", 500}, {"grid_size", 1000}};
}

json mcmc_defaults() {
  return {{"iterations", 10000}, {"samples_per_iteration", 50}, {"x_grid_size", 1000},
          {"kept", 1000}};
}

json eval_defaults() {
  return {{"alpha", 0.05},
          {"draws", 1000},
          {"sizes", std::vector<std::size_t>{250, 500, 1000}},
          {"grid_size", 1000}};
}

json build_defaults(std::string_view command, const LikelihoodModel& model,
                    const std::string& prior_type) {
  const Interval b = default_bounds(model);
  json d = {{"command", std::string(command)},
            {"model", to_json(model)},
            {"bounds", {b.lower, b.upper}}};
  if (is_experiment(command)) {
    d["seeds"] = command == "exp-jeffreys" ? std::vector<std::uint64_t>{0, 1, 2, 3, 4}
                                           : std::vector<std::uint64_t>{0, 1, 2};
  } else {
    d["seed"] = 0;
  }
  if (command == "train-info") {
    d["prior"] = prior_defaults(model, prior_type.empty() ? "parametric" : prior_type);
    d["info"] = info_defaults(1e-4);
    d["eval"] = {{"draws", 1000}};
  } else if (command == "train-svgd") {
    d["prior"] = prior_defaults(model, prior_type.empty() ? "implicit" : prior_type);
    d["svgd"] = svgd_defaults(model);
    d["eval"] = {{"draws", 1000}};
  } else if (command == "baseline-berger") {
    d["berger"] = berger_defaults();
    d["eval"] = {{"draws", 1000}};
  } else if (command == "baseline-mcmc") {
    d["mcmc"] = mcmc_defaults();
  } else if (command == "eval-ks") {
    d["eval"] = eval_defaults();
    d["eval"]["samples_csv"] = "";
    d["eval"]["reference_csv"] = "";
  } else if (command == "exp-jeffreys") {
    d["parametric"] = {{"prior", prior_defaults(model, "parametric")}, {"info", info_defaults(1e-4)}};
    d["implicit"] = {{"prior", prior_defaults(model, "implicit")}, {"info", info_defaults(1e-3)}};
    d["particle"] = {{"prior", prior_defaults(model, "implicit")}, {"svgd", svgd_defaults(model)}};
    d["berger"] = berger_defaults();
    d["mcmc"] = mcmc_defaults();
    d["eval"] = eval_defaults();
  } else if (command == "exp-stability") {
    json info = info_defaults(1e-3);
    info["max_mode"] = "realized_dataset";
    info.erase("samples");
    d["info"] = info;
    d["latent"] = 5;
    d["sample_sweep"] = {{"dims", 5}, {"samples", {10, 50, 100}}};
    d["dim_sweep"] = {{"samples", 100}, {"dims", {2, 10, 50}}};
    d["tail"] = 50;
  }
  return d;
}

// Keys of `user` must exist in `defaults` wherever defaults has an object,
// except free-form leaves (model params, kernel, prior sections).
void check_keys(const json& user, const json& defaults, const std::string& path) {
  if (!user.is_object()) return;
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = it.key();
    const std::string here = path.empty() ? key : path + "." + key;
    if (!defaults.contains(key)) throw ConfigError("unknown config key '" + here + "'");
    if (key == "model" || key == "prior" || key == "kernel") continue;
    if (defaults.at(key).is_object()) {
      if (!it.value().is_object()) throw ConfigError("'" + here + "' must be an object");
      check_keys(it.value(), defaults.at(key), here);
    }
  }
}

std::string user_prior_type(const json& user) {
  if (user.contains("prior") && user["prior"].is_object() && user["prior"].contains("type"))
    return user["prior"]["type"].get<std::string>();
  return {};
}

void require_jeffreys_model(const LikelihoodModel& m) {
  if (m.param_dim() != 1 || m.kind == ModelKind::gaussian_mean)
    throw ConfigError("exp-jeffreys supports bernoulli_mean, gaussian_scale and poisson_rate");
}

std::vector<double> first_column(const SampleBatch& b) { return b.theta.column(0); }

Matrix draw_from_prior(const PriorApprox& p, std::size_t n, Rng& rng) {
  if (n == 0) return Matrix(0, output_dim(p.shape));
  return sample_prior(p.shape, p.lambda, n, rng).first.theta;
}

Matrix column_matrix(const std::vector<double>& v) {
  Matrix m(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
  return m;
}

Matrix read_samples_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  std::vector<std::vector<double>> rows;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      // a header row is any first line that does not parse as numbers
      char* end = nullptr;
      std::strtod(line.c_str(), &end);
      if (end == line.c_str()) continue;
    }
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw ConfigError("non-numeric cell in " + path.string());
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ConfigError("ragged rows in " + path.string());
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("no samples in " + path.string());
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  return m;
}

// Runs body(i) for every cell with at most thread_cap() cells at once and
// rethrows the lowest-index failure afterwards.
template <typename Body>
void run_cells(std::size_t n, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  const int threads = static_cast<int>(std::max<std::size_t>(1, std::min(thread_cap(), n)));
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

json effective_config(std::string_view command, const json& user,
                      std::optional<std::uint64_t> seed) {
  if (std::find(std::begin(kCommands), std::end(kCommands), command) == std::end(kCommands))
    throw ConfigError("unknown command '" + std::string(command) + "'");
  if (!user.is_object()) throw ConfigError("config must be a JSON object");
  try {
    if (user.contains("command") && user["command"].get<std::string>() != command)
      throw ConfigError("config is for '" + user["command"].get<std::string>() + "', not '" +
                        std::string(command) + "'");
    LikelihoodModel model = LikelihoodModel::bernoulli();
    if (user.contains("model")) model = model_from_json(user["model"]);
    if (command == "exp-stability") {
      if (user.contains("model") && model.kind != ModelKind::gaussian_scale)
        throw ConfigError("exp-stability needs the gaussian_scale model");
      model = LikelihoodModel::gaussian_scale(5, model.mu);
    }
    if (command == "exp-jeffreys") require_jeffreys_model(model);

    json cfg = build_defaults(command, model, user_prior_type(user));
    check_keys(user, cfg, "");
    // a user prior of another type replaces the default rather than merging with it
    json patch = user;
    patch.erase("model");
    cfg.merge_patch(patch);
    cfg["model"] = to_json(model);
    if (seed) {
      if (is_experiment(command)) {
        cfg["seeds"] = std::vector<std::uint64_t>{*seed};
      } else {
        cfg["seed"] = *seed;
      }
    }

    // parse every section once so bad values fail before any compute
    config_bounds(cfg);
    Rng scratch(0);
    if (cfg.contains("prior")) config_prior(cfg["prior"], model, scratch);
    if (cfg.contains("info") && command != "exp-stability") info_config(cfg["info"]);
    if (cfg.contains("svgd")) svgd_config(cfg["svgd"]);
    if (cfg.contains("berger")) berger_config(cfg["berger"], config_bounds(cfg));
    if (cfg.contains("mcmc")) mcmc_config(cfg["mcmc"], config_bounds(cfg));
    for (const char* m : {"parametric", "implicit", "particle"}) {
      if (!cfg.contains(m)) continue;
      config_prior(cfg[m]["prior"], model, scratch);
      if (cfg[m].contains("info")) info_config(cfg[m]["info"]);
      if (cfg[m].contains("svgd")) svgd_config(cfg[m]["svgd"]);
    }
    if (cfg.contains("eval")) {
      const auto& e = cfg["eval"];
      if (e.contains("alpha")) {
        const double a = get_real(e, "alpha");
        if (!(a > 0.0 && a < 1.0)) throw ConfigError("eval.alpha must lie in (0, 1)");
      }
      if (e.contains("sizes"))
        for (auto n : get_counts(e, "sizes"))
          if (n == 0) throw ConfigError("eval.sizes must be positive");
      if (e.contains("draws")) get_count(e, "draws");
    }
    if (command == "exp-jeffreys") {
      const auto sizes = get_counts(cfg["eval"], "sizes");
      const std::size_t draws = get_count(cfg["eval"], "draws");
      for (auto n : sizes)
        if (n > draws) throw ConfigError("eval.sizes exceed eval.draws");
    }
    if (command == "exp-stability") {
      json probe = cfg["info"];
      probe["samples"] = 2;
      info_config(probe);
      get_count(cfg, "latent");
      get_count(cfg, "tail");
      get_count(cfg["sample_sweep"], "dims");
      get_counts(cfg["sample_sweep"], "samples");
      get_count(cfg["dim_sweep"], "samples");
      get_counts(cfg["dim_sweep"], "dims");
    }
    if (is_experiment(command) && cfg["seeds"].empty()) throw ConfigError("seeds is empty");
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
}

LikelihoodModel config_model(const json& cfg) { return model_from_json(cfg.at("model")); }

Interval config_bounds(const json& cfg) {
  const auto& b = cfg.at("bounds");
  if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number())
    throw ConfigError("bounds must be [lower, upper]");
  Interval out{b[0].get<double>(), b[1].get<double>()};
  if (!std::isfinite(out.lower) || !std::isfinite(out.upper) || !(out.lower < out.upper))
    throw ConfigError("bounds must be finite with lower < upper");
  return out;
}

InfoBoundConfig info_config(const json& s) {
  InfoBoundConfig c;
  c.samples = get_count(s, "samples");
  c.n_obs = get_count(s, "n_obs");
  c.iterations = get_count(s, "iterations");
  c.batch = get_count(s, "batch");
  c.lr = get_real(s, "lr");
  c.mode = max_mode_from_string(s.at("max_mode").get<std::string>());
  const auto& a = s.at("alpha");
  if (a.is_string()) {
    if (a.get<std::string>() != "max") throw ConfigError("alpha must be a number or \"max\"");
    c.alpha = kVrMax;
  } else {
    c.alpha = get_real(s, "alpha");
  }
  c.snapshot_interval = get_count(s, "snapshot_interval");
  c.validate();
  return c;
}

SvgdConfig svgd_config(const json& s) {
  SvgdConfig c;
  c.particles = get_count(s, "particles");
  c.samples = get_count(s, "samples");
  c.n_obs = get_count(s, "n_obs");
  c.eta = get_real(s, "eta");
  c.iterations = get_count(s, "iterations");
  c.lr = get_real(s, "lr");
  c.kernel = kernel_from_json(s.at("kernel"));
  if (c.particles < 1 || c.samples < 1) throw ConfigError("svgd counts must be positive");
  if (!(c.eta > 0.0) || !(c.lr > 0.0)) throw ConfigError("svgd eta and lr must be positive");
  return c;
}

BergerConfig berger_config(const json& s, const Interval& bounds) {
  BergerConfig c;
  c.datasets = get_count(s, "datasets");
  c.samples = get_count(s, "samples");
  c.n_obs = get_count(s, "n_obs");
  c.grid_size = get_count(s, "grid_size");
  c.bounds = bounds;
  c.validate();
  return c;
}

McmcConfig mcmc_config(const json& s, const Interval& bounds) {
  McmcConfig c;
  c.iterations = get_count(s, "iterations");
  c.samples_per_iteration = get_count(s, "samples_per_iteration");
  c.x_grid_size = get_count(s, "x_grid_size");
  c.kept = get_count(s, "kept");
  c.bounds = bounds;
  c.validate();
  return c;
}

PriorApprox config_prior(const json& s, const LikelihoodModel& model, Rng& rng) {
  if (!s.is_object()) throw ConfigError("prior must be an object");
  const std::string type = s.value("type", std::string("parametric"));
  if (type == "parametric") {
    for (auto it = s.begin(); it != s.end(); ++it)
      if (it.key() != "type" && it.key() != "family" && it.key() != "init_location" &&
          it.key() != "init_log_scale")
        throw ConfigError("unknown parametric prior key '" + it.key() + "'");
    ParametricPrior p;
    p.family = parametric_family_from_string(
        s.value("family", std::string(to_string(default_family(model)))));
    p.dims = model.param_dim();
    return init_parametric(p, s.value("init_location", 0.0), s.value("init_log_scale", 0.0));
  }
  if (type == "implicit") {
    for (auto it = s.begin(); it != s.end(); ++it)
      if (it.key() != "type" && it.key() != "widths" && it.key() != "activation" &&
          it.key() != "output_map" && it.key() != "init")
        throw ConfigError("unknown implicit prior key '" + it.key() + "'");
    if (s.value("init", std::string("glorot_uniform")) != "glorot_uniform")
      throw ConfigError("implicit prior init must be 'glorot_uniform'");
    ImplicitSampler arch;
    arch.widths = s.value("widths", std::vector<std::size_t>{5, model.param_dim()});
    arch.hidden = activation_from_string(s.value("activation", std::string("identity")));
    arch.output_map = domain_map_from_string(
        s.value("output_map", std::string(to_string(default_domain_map(model)))));
    if (arch.widths.size() < 2 || arch.widths.back() != model.param_dim())
      throw ConfigError("implicit widths must end with the model's parameter dimension");
    return init_sampler(arch, rng);
  }
  throw ConfigError("prior type must be 'parametric' or 'implicit'");
}

std::size_t thread_cap() {
  if (const char* env = std::getenv("REFPRIOR_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return static_cast<std::size_t>(std::max(1, omp_get_max_threads()));
}

double tail_std(const std::vector<double>& values, std::size_t tail) {
  const std::size_t n = std::min(tail, values.size());
  if (n < 2) return 0.0;
  const auto first = values.end() - static_cast<std::ptrdiff_t>(n);
  double mean = 0.0;
  for (auto it = first; it != values.end(); ++it) mean += *it;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (auto it = first; it != values.end(); ++it) ss += (*it - mean) * (*it - mean);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

JeffreysCell run_jeffreys_cell(const json& cfg, std::uint64_t seed) {
  const auto model = config_model(cfg);
  require_jeffreys_model(model);
  const Interval bounds = config_bounds(cfg);
  const auto& ev = cfg.at("eval");
  const std::size_t draws = get_count(ev, "draws");
  const auto sizes = get_counts(ev, "sizes");
  const double alpha = get_real(ev, "alpha");

  JeffreysCell cell;
  cell.seed = seed;
  cell.timing = json::object();

  auto learned = [&](const char* name, std::uint64_t stream, bool svgd) {
    const auto t0 = Clock::now();
    Rng rng = make_stream(seed, stream);
    const auto& sec = cfg.at(name);
    PriorApprox init = config_prior(sec.at("prior"), model, rng);
    TrainResult r = svgd ? train_svgd(model, init, svgd_config(sec.at("svgd")), rng)
                         : train_info_bound(model, init, info_config(sec.at("info")), rng);
    cell.samples.emplace_back(name, draw_from_prior(r.prior, draws, rng).column(0));
    cell.timing[name] = ms_since(t0);
  };
  learned("parametric", 0, false);
  learned("implicit", 1, false);
  learned("particle", 2, true);

  {
    const auto t0 = Clock::now();
    Rng rng = make_stream(seed, 3);
    const auto grid = berger_grid_sampler(model, berger_config(cfg.at("berger"), bounds), rng);
    cell.samples.emplace_back("berger", grid.sample(draws, rng));
    cell.timing["berger"] = ms_since(t0);
  }
  {
    const auto t0 = Clock::now();
    Rng rng = make_stream(seed, 4);
    auto mc = mcmc_config(cfg.at("mcmc"), bounds);
    const auto kept = lw_mcmc(model, mc, rng);
    auto v = first_column(kept);
    // the chain keeps mc.kept states; cycle them if more draws are requested
    std::vector<double> out(draws);
    for (std::size_t i = 0; i < draws; ++i) out[i] = v[i % v.size()];
    cell.samples.emplace_back("mcmc", std::move(out));
    cell.timing["mcmc"] = ms_since(t0);
  }
  {
    Rng rng = make_stream(seed, 5);
    const Interval box[1] = {bounds};
    cell.samples.emplace_back("uniform", first_column(uniform_sampler(box, draws, rng)));
  }

  Rng truth_rng = make_stream(seed, 6);
  const auto truth =
      true_rp_sampler(model, bounds, get_count(ev, "grid_size"));
  cell.curve = ksd_curve(cell.samples, truth, sizes, truth_rng, alpha);

  json methods = json::object();
  const std::size_t final_n = *std::max_element(sizes.begin(), sizes.end());
  for (const auto& row : cell.curve.rows) {
    if (row.n != final_n) continue;
    methods[row.method] = {{"ksd", row.ksd},
                           {"threshold", row.threshold},
                           {"reject", row.ksd > row.threshold}};
  }
  cell.summary = {{"seed", seed}, {"n", final_n}, {"alpha", alpha}, {"methods", methods}};
  return cell;
}

std::vector<StabilityCell> run_stability_cells(const json& cfg) {
  const auto seeds = cfg.at("seeds").get<std::vector<std::uint64_t>>();
  const double mu = config_model(cfg).mu;
  const std::size_t latent = get_count(cfg, "latent");
  const std::size_t tail = get_count(cfg, "tail");
  std::vector<StabilityCell> cells;
  for (auto seed : seeds) {
    const auto& a = cfg.at("sample_sweep");
    for (auto s : get_counts(a, "samples"))
      cells.push_back({"samples", get_count(a, "dims"), s, seed, {}, 0.0});
    const auto& b = cfg.at("dim_sweep");
    for (auto d : get_counts(b, "dims"))
      cells.push_back({"dims", d, get_count(b, "samples"), seed, {}, 0.0});
  }
  // stream index = position of the cell within its seed's list
  const std::size_t per_seed = cells.size() / std::max<std::size_t>(1, seeds.size());

  run_cells(cells.size(), [&](std::size_t i) {
    auto& c = cells[i];
    if (c.dims == 0) throw ConfigError("stability dims must be positive");
    const auto model = LikelihoodModel::gaussian_scale(c.dims, mu);
    json info = cfg.at("info");
    info["samples"] = c.samples;
    const auto ic = info_config(info);
    Rng rng = make_stream(c.seed, i % per_seed);
    ImplicitSampler arch;
    arch.widths = {latent, c.dims};
    arch.hidden = Activation::identity;
    arch.output_map = default_domain_map(model);
    const auto init = init_sampler(arch, rng);
    auto r = train_info_bound(model, init, ic, rng);
    c.trace = std::move(r.trace);
    c.tail_std = tail_std(c.trace.objectives(), tail);
  });
  return cells;
}

json stability_summary(const std::vector<StabilityCell>& cells, const json& cfg) {
  auto median_of = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n == 0) return 0.0;
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  auto collect = [&](const std::string& sweep, std::size_t dims, std::size_t samples) {
    std::vector<double> v;
    for (const auto& c : cells)
      if (c.sweep == sweep && c.dims == dims && c.samples == samples) v.push_back(c.tail_std);
    return v;
  };

  json out = json::object();
  json sample_rows = json::array();
  const auto& a = cfg.at("sample_sweep");
  const std::size_t a_dims = get_count(a, "dims");
  std::vector<double> a_medians;
  for (auto s : get_counts(a, "samples")) {
    const auto v = collect("samples", a_dims, s);
    a_medians.push_back(median_of(v));
    sample_rows.push_back({{"samples", s}, {"dims", a_dims}, {"tail_std", v},
                           {"median_tail_std", a_medians.back()}});
  }
  json dim_rows = json::array();
  const auto& b = cfg.at("dim_sweep");
  const std::size_t b_samples = get_count(b, "samples");
  std::vector<double> b_medians;
  for (auto d : get_counts(b, "dims")) {
    const auto v = collect("dims", d, b_samples);
    b_medians.push_back(median_of(v));
    dim_rows.push_back({{"samples", b_samples}, {"dims", d}, {"tail_std", v},
                        {"median_tail_std", b_medians.back()}});
  }
  bool decreasing = b_medians.size() >= 2;
  for (std::size_t i = 1; i < b_medians.size(); ++i)
    decreasing = decreasing && b_medians[i] < b_medians[i - 1];
  const bool increasing = a_medians.size() >= 2 && a_medians.back() > a_medians.front();
  out["tail"] = get_count(cfg, "tail");
  out["sample_sweep"] = sample_rows;
  out["dim_sweep"] = dim_rows;
  out["std_decreases_with_dims"] = decreasing;
  out["std_increases_with_samples"] = increasing;
  return out;
}

void run_command(std::string_view command, const std::filesystem::path& config_path,
                 std::optional<std::uint64_t> seed, const std::filesystem::path& out_dir) {
  json user;
  try {
    user = json::parse(read_text(config_path));
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse " + config_path.string() + ": " + e.what());
  }
  const json cfg = effective_config(command, user, seed);
  const auto base = config_path.has_parent_path() ? config_path.parent_path()
                                                  : std::filesystem::path(".");
  std::filesystem::create_directories(out_dir);
  write_text(out_dir / "config.json", dump_json(cfg));
  json timing = json::object();
  const auto t0 = Clock::now();

  if (command == "train-info" || command == "train-svgd") {
    const auto model = config_model(cfg);
    const std::uint64_t s = cfg.at("seed").get<std::uint64_t>();
    Rng rng = make_stream(s, 0);
    const auto init = config_prior(cfg.at("prior"), model, rng);
    TrainResult r = command == "train-info"
                        ? train_info_bound(model, init, info_config(cfg.at("info")), rng)
                        : train_svgd(model, init, svgd_config(cfg.at("svgd")), rng);
    write_text(out_dir / "prior.json", dump_json(prior_to_json(r.prior, {s})));
    write_text(out_dir / "trace.csv", r.trace.to_csv());
    if (!r.trace.snapshots.empty()) {
      json snaps = json::array();
      for (const auto& [it, lambda] : r.trace.snapshots)
        snaps.push_back({{"iteration", it}, {"lambda", lambda}});
      write_text(out_dir / "snapshots.json", dump_json(snaps));
    }
    write_text(out_dir / "samples.csv",
               matrix_to_csv(draw_from_prior(r.prior, get_count(cfg.at("eval"), "draws"), rng)));
    json per_iter = json::array();
    for (const auto& row : r.trace.rows) per_iter.push_back(row.elapsed_ms);
    timing["elapsed_ms_per_iteration"] = per_iter;
  } else if (command == "baseline-berger") {
    const auto model = config_model(cfg);
    Rng rng = make_stream(cfg.at("seed").get<std::uint64_t>(), 0);
    const auto grid = berger_grid_sampler(model, berger_config(cfg.at("berger"), config_bounds(cfg)), rng);
    write_text(out_dir / "grid.csv", grid.to_csv());
    write_text(out_dir / "samples.csv",
               matrix_to_csv(column_matrix(grid.sample(get_count(cfg.at("eval"), "draws"), rng))));
  } else if (command == "baseline-mcmc") {
    const auto model = config_model(cfg);
    Rng rng = make_stream(cfg.at("seed").get<std::uint64_t>(), 0);
    const auto batch = lw_mcmc(model, mcmc_config(cfg.at("mcmc"), config_bounds(cfg)), rng);
    write_text(out_dir / "samples.csv", matrix_to_csv(batch.theta));
  } else if (command == "eval-ks") {
    const auto& ev = cfg.at("eval");
    const std::string samples_path = ev.at("samples_csv").get<std::string>();
    if (samples_path.empty()) throw ConfigError("eval.samples_csv is required");
    const Matrix samples = read_samples_csv(resolve(base, samples_path));
    const double alpha = get_real(ev, "alpha");
    Rng rng = make_stream(cfg.at("seed").get<std::uint64_t>(), 0);
    const std::string ref_path = ev.at("reference_csv").get<std::string>();
    Matrix reference;
    std::optional<DiscreteGridDistribution> truth;
    if (!ref_path.empty()) {
      reference = read_samples_csv(resolve(base, ref_path));
      if (reference.cols() != samples.cols())
        throw ConfigError("samples and reference differ in dimension");
    } else {
      const auto model = config_model(cfg);
      if (samples.cols() != 1) throw ConfigError("grid truth needs one-dimensional samples");
      truth = true_rp_sampler(model, config_bounds(cfg), get_count(ev, "grid_size"));
      reference = column_matrix(truth->sample(samples.rows(), rng));
    }
    const double stat = ks_statistic(samples, reference);
    const double thr = ks_threshold(samples.rows(), reference.rows(), alpha);
    json res = {{"statistic", stat},       {"n", samples.rows()},
                {"m", reference.rows()},   {"threshold", thr},
                {"reject", stat > thr},    {"alpha", alpha},
                {"per_dimension_max", samples.cols() > 1}};
    write_text(out_dir / "ks.json", dump_json(res));
    if (truth) {
      std::vector<std::size_t> sizes;
      for (auto n : get_counts(ev, "sizes"))
        if (n <= samples.rows()) sizes.push_back(n);
      if (!sizes.empty()) {
        const auto curve = ksd_curve({{"samples", samples.column(0)}}, *truth, sizes, rng, alpha);
        write_text(out_dir / "curve.csv", curve.to_csv());
      }
    }
  } else if (command == "exp-jeffreys") {
    const auto seeds = cfg.at("seeds").get<std::vector<std::uint64_t>>();
    std::vector<JeffreysCell> cells(seeds.size());
    run_cells(seeds.size(), [&](std::size_t i) { cells[i] = run_jeffreys_cell(cfg, seeds[i]); });
    json all = json::array();
    json cell_timing = json::object();
    for (const auto& c : cells) {
      const auto dir = out_dir / ("seed_" + std::to_string(c.seed));
      for (const auto& [name, v] : c.samples)
        write_text(dir / ("samples_" + name + ".csv"), matrix_to_csv(column_matrix(v)));
      write_text(dir / "curve.csv", c.curve.to_csv());
      write_text(dir / "summary.json", dump_json(c.summary));
      all.push_back(c.summary);
      cell_timing["seed_" + std::to_string(c.seed)] = c.timing;
    }
    json below = json::object();
    for (const auto& c : cells)
      for (auto it = c.summary["methods"].begin(); it != c.summary["methods"].end(); ++it) {
        if (!below.contains(it.key())) below[it.key()] = 0;
        if (!it.value()["reject"].get<bool>()) below[it.key()] = below[it.key()].get<int>() + 1;
      }
    write_text(out_dir / "summary.json",
               dump_json({{"seeds", all}, {"not_rejected_count", below}}));
    timing["cells_ms"] = cell_timing;
  } else if (command == "exp-stability") {
    const auto cells = run_stability_cells(cfg);
    for (const auto& c : cells) {
      const std::string name = c.sweep == "samples"
                                   ? "samples_S" + std::to_string(c.samples)
                                   : "dims_D" + std::to_string(c.dims);
      write_text(out_dir / "traces" / (name + "_seed" + std::to_string(c.seed) + ".csv"),
                 c.trace.to_csv());
    }
    write_text(out_dir / "summary.json", dump_json(stability_summary(cells, cfg)));
  }

  timing["total_ms"] = ms_since(t0);
  write_text(out_dir / "timing.json", dump_json(timing));
}

}  // namespace refprior
