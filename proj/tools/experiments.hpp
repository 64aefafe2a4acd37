#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "hlgse/acdf.hpp"
#include "hlgse/baselines.hpp"
#include "hlgse/search.hpp"

namespace hlgse::cli {

/// Everything derived from the model and state sections.
struct Problem {
  SparseHermitian h;
  std::vector<SparseHermitian> terms;
  StateVector state;
  SpectralDecomposition decomp;  // restricted to the components the state touches
  SpectralMeasure measure;
  Real norm_bound = 0.0;
  Real tau = 0.0;
  Real lambda0 = 0.0;  // lowest eigenvalue with non-zero overlap
  Real p0 = 0.0;
  std::optional<ControlFreeReference> reference;  // only when control_free is set
};

Problem build_problem(const ExperimentConfig& config);

/// eta from the config, or the measured ground overlap.
Real effective_eta(const ExperimentConfig& config, const Problem& problem);
/// delta from the config, or tau * epsilon.  Throws ConfigError if neither is set.
Real effective_delta(const ExperimentConfig& config, const Problem& problem);

// --- acdf ---------------------------------------------------------------------------

struct AcdfResult {
  int d = 0;
  Real delta = 0.0;
  long samples = 0;
  Real eta = 0.0;
  std::optional<Real> crossing;  // first x with Re G-bar >= eta/2
  std::vector<AcdfTraceRow> rows;
};

AcdfResult run_acdf(const ExperimentConfig& config, const Problem& problem);

// --- Heisenberg-scaling sweep ---------------------------------------------------------

inline constexpr long kDefaultSweepSamples = 1800;

struct SweepRun {
  Real delta = 0.0;
  std::uint64_t seed = 0;
  bool crossed = false;
  Real estimate = 0.0;  // NaN without a crossing
  Real error = 0.0;     // |estimate - lambda0|; (2 pi / 3) / tau without a crossing
  Real total_time = 0.0;
  Real max_time = 0.0;
};

struct SweepPoint {
  Real delta = 0.0;
  Real epsilon = 0.0;
  int d = 0;
  long samples = 0;
  Real mean_error = 0.0;
  Real within_fraction = 0.0;  // seeds with error <= epsilon
  Real mean_total_time = 0.0;
  Real mean_max_time = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::vector<SweepRun> runs;  // point-major, then seed order
  std::optional<Real> slope_total;
  std::optional<Real> slope_max;
  Real seed_pass_fraction = 0.0;  // seeds with error <= epsilon at every point
};

SweepResult run_sweep(const ExperimentConfig& config, const Problem& problem);

/// Least-squares slope of log y against log x.
Real loglog_slope(const std::vector<Real>& x, const std::vector<Real>& y);

// --- fixed-depth QPE comparison -------------------------------------------------------

struct QpeCompareRow {
  Real p0 = 0.0;
  MethodStats stats;
};

std::vector<QpeCompareRow> run_qpe_compare(const ExperimentConfig& config, const Problem& problem);

// --- subcommands ------------------------------------------------------------------------

/// Exit codes shared by the subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitCheckFailed = 2;
inline constexpr int kExitInternal = 3;

struct FilterInspectOptions {
  std::optional<int> degree;
  std::optional<Real> delta;
  std::optional<std::string> filter_file;  // inspect an existing file instead of building
};

int cmd_acdf(const ExperimentConfig& config, std::ostream& log);
int cmd_estimate(const ExperimentConfig& config, std::ostream& log);
int cmd_sweep(const ExperimentConfig& config, std::ostream& log);
int cmd_qpe_compare(const ExperimentConfig& config, std::ostream& log);
int cmd_filter_inspect(const ExperimentConfig& config, const FilterInspectOptions& options, std::ostream& log);
int cmd_cost_model(const ExperimentConfig& config, std::ostream& log);

/// "# key=value" lines for the flattened resolved config plus `extra`.
void write_csv_header(std::ostream& out, const ExperimentConfig& config,
                      const std::vector<std::pair<std::string, std::string>>& extra = {});

std::string format_number(Real value);

}  // namespace hlgse::cli
