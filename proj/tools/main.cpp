#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "config.hpp"
#include "experiments.hpp"

namespace {

using namespace hlgse;
using namespace hlgse::cli;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
};

void add_common(CLI::App* sub, CommonFlags& flags) {
  sub->add_option("config", flags.config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
  sub->add_option("--seed", flags.seed, "override the config seed");
  sub->add_option("--out-dir", flags.out_dir, "override output.directory");
  sub->add_option("--threads", flags.threads, "override the worker count")->check(CLI::Range(1, 1024));
}

ExperimentConfig load(const CommonFlags& flags) {
  ExperimentConfig c = load_config(flags.config_path);
  if (flags.seed) c.seed = *flags.seed;
  if (flags.out_dir) c.output.directory = *flags.out_dir;
  if (flags.threads) c.threads = *flags.threads;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ground-state energy estimation with a smoothed spectral CDF"};
  app.require_subcommand(1);
  CommonFlags flags;

  auto* acdf = app.add_subcommand("acdf", "sample G-bar and write the ACDF / CDF trace");
  auto* estimate = app.add_subcommand("estimate", "run the certified estimator end to end");
  auto* sweep = app.add_subcommand("sweep", "precision sweep with evolution-time slope fits");
  auto* qpe = app.add_subcommand("qpe-compare", "failure rates against textbook phase estimation");
  auto* inspect = app.add_subcommand("filter-inspect", "build or load a filter and check its properties");
  auto* cost = app.add_subcommand("cost-model", "asymptotic cost of each method at the configured precision");
  for (auto* sub : {acdf, estimate, sweep, qpe, inspect, cost}) add_common(sub, flags);

  FilterInspectOptions inspect_options;
  inspect->add_option("--degree", inspect_options.degree, "filter degree d")->check(CLI::PositiveNumber);
  inspect->add_option("--delta", inspect_options.delta, "smearing width")->check(CLI::PositiveNumber);
  inspect->add_option("--filter", inspect_options.filter_file, "inspect an existing coefficient file")
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig config = load(flags);
    if (acdf->parsed()) return cmd_acdf(config, std::cout);
    if (estimate->parsed()) return cmd_estimate(config, std::cout);
    if (sweep->parsed()) return cmd_sweep(config, std::cout);
    if (qpe->parsed()) return cmd_qpe_compare(config, std::cout);
    if (inspect->parsed()) return cmd_filter_inspect(config, inspect_options, std::cout);
    if (cost->parsed()) return cmd_cost_model(config, std::cout);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InternalError& e) {
    std::cerr << "internal guard: " << e.what() << '\n';
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}
