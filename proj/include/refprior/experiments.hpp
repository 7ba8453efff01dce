#pragma once

// Config-driven runners behind the command-line tool. Every run is fully
// determined by the effective configuration and its seed(s); wall-clock
// timings go to a separate timing.json.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "refprior/baselines.hpp"
#include "refprior/eval.hpp"
#include "refprior/infobound.hpp"
#include "refprior/svgd.hpp"

namespace refprior {

inline constexpr std::string_view kCommands[] = {
    "train-info", "train-svgd", "baseline-berger", "baseline-mcmc",
    "eval-ks",    "exp-jeffreys", "exp-stability"};

/// Defaults for `command` (model-dependent fields follow the user's model),
/// with the user's document merged on top. `seed` overrides "seed" for single
/// runs and "seeds" for the experiments. Throws ConfigError on unknown keys
/// or malformed values.
nlohmann::json effective_config(std::string_view command, const nlohmann::json& user,
                                std::optional<std::uint64_t> seed = std::nullopt);

LikelihoodModel config_model(const nlohmann::json& cfg);
Interval config_bounds(const nlohmann::json& cfg);
InfoBoundConfig info_config(const nlohmann::json& section);
SvgdConfig svgd_config(const nlohmann::json& section);
BergerConfig berger_config(const nlohmann::json& section, const Interval& bounds);
McmcConfig mcmc_config(const nlohmann::json& section, const Interval& bounds);
/// Initial prior described by a "prior" section.
PriorApprox config_prior(const nlohmann::json& section, const LikelihoodModel& model, Rng& rng);

/// Number of cells run concurrently: REFPRIOR_THREADS if set, else all cores.
std::size_t thread_cap();

struct JeffreysCell {
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::vector<double>>> samples;
  KsdCurve curve;
  nlohmann::json summary;
  nlohmann::json timing;
};

/// One seed of the recovery experiment: three learned approximations and
/// three baselines, each drawing eval.draws samples, plus the KSD curve.
JeffreysCell run_jeffreys_cell(const nlohmann::json& cfg, std::uint64_t seed);

struct StabilityCell {
  std::string sweep;  // "samples" or "dims"
  std::size_t dims = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  TrainTrace trace;
  double tail_std = 0.0;
};

std::vector<StabilityCell> run_stability_cells(const nlohmann::json& cfg);
/// Per-setting medians over seeds and the two trend flags.
nlohmann::json stability_summary(const std::vector<StabilityCell>& cells,
                                 const nlohmann::json& cfg);

/// Sample standard deviation of the last `tail` values (fewer if shorter).
double tail_std(const std::vector<double>& values, std::size_t tail);

/// Runs one command end to end and writes its artifacts under out_dir.
void run_command(std::string_view command, const std::filesystem::path& config_path,
                 std::optional<std::uint64_t> seed, const std::filesystem::path& out_dir);

}  // namespace refprior
