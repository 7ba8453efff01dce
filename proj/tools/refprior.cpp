#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <omp.h>

#include <CLI11.hpp>

#include "refprior/experiments.hpp"

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kNumeric = 3 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn and evaluate reference-prior approximations"};
  app.require_subcommand(1, 1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  for (auto name : refprior::kCommands) {
    auto* sub = app.add_subcommand(std::string(name));
    sub->add_option("--config", config, "JSON configuration file")->required();
    sub->add_option("--seed", seed, "override the configured seed(s)");
    sub->add_option("--out", out, "output directory")->capture_default_str();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  omp_set_num_threads(static_cast<int>(refprior::thread_cap()));
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    refprior::run_command(command, config, seed, out);
  } catch (const refprior::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const refprior::ArgumentError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const refprior::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const refprior::DomainError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}
