#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hlgse/hamiltonian.hpp"
#include "hlgse/sampler.hpp"

namespace hlgse {

/// Outcome law of T-step textbook phase estimation on the rescaled spectrum:
/// Pr[m] = sum_k p_k |(1/T) sum_t e^{it(phi_m - x_k)}|^2, phi_m = -pi + 2 pi m / T.
struct QpeOutcomeDistribution {
  long steps = 0;
  std::vector<Real> probabilities;

  Real phase(long m) const { return -kPi + 2.0 * kPi * static_cast<Real>(m) / static_cast<Real>(steps); }
};

/// |(1/T) sum_{t<T} e^{it delta}|^2
Real fejer_kernel(long steps, Real delta);

QpeOutcomeDistribution qpe_distribution(const SpectralMeasure& measure, long steps);

/// Minimum phase over `repeats` independent outcomes, divided by tau.
Real qpe_min_estimate(const QpeOutcomeDistribution& dist, long repeats, Real tau, Rng& rng);

/// Exact probability that the minimum of `repeats` outcomes lands farther
/// than `tolerance` from `target_phase` (both in rescaled units).
Real qpe_failure_probability(const QpeOutcomeDistribution& dist, long repeats, Real target_phase, Real tolerance);

enum class CostMethod { kThisWork, kQpeSemiclassical, kQeea, kThisWorkTrotter, kQpeTrotter };

CostMethod parse_cost_method(const std::string& name);
std::string to_string(CostMethod method);

struct CostExtras {
  int order = 2;          ///< Trotter order p
  Real c_trotter = 1.0;   ///< Trotter prefactor
};

/// Order-of-magnitude cost with unit hidden constants and polylog factors
/// dropped.  Not a certified bound.
struct CostReport {
  CostMethod method = CostMethod::kThisWork;
  Real epsilon = 0.0;
  Real eta = 0.0;
  Real tau = 0.0;
  Real max_evolution_time = 0.0;
  Real repetitions = 0.0;
  Real total_evolution_time = 0.0;
  bool has_trotter = false;
  Real circuit_depth = 0.0;
  Real total_runtime = 0.0;
};

CostReport cost_model(CostMethod method, Real epsilon, Real eta, Real tau, const CostExtras& extras = {});

/// key=value block in the same layout as the search report.
void write_cost_report(std::ostream& out, const CostReport& report);

// --- fixed-depth comparison ---------------------------------------------------------

struct QpeComparisonOptions {
  long fixed_steps = 300;     ///< T for fixed-depth QPE and d for this work
  Real scaled_reference_p0 = 0.4;  ///< T_scaled = ceil(fixed_steps * ref / p0)
  Real repeat_factor = 4.0;   ///< QPE repeats = ceil(factor / p0)
  Real tolerance = 0.04;      ///< on tau * |estimate - lambda_0|
  long trials = 200;
  Real sample_constant = 128.0;  ///< this work: ceil(c l1^2 / p0^2) samples
  int threads = 1;
};

struct MethodStats {
  std::string method;
  Real mean_error = 0.0;  ///< mean tau * |estimate - lambda_0|
  Real failure_rate = 0.0;
};

/// Runs fixed-depth QPE, QPE with depth proportional to 1/p0, and the
/// heuristic ACDF estimator at the same maximal depth on one state.
std::vector<MethodStats> compare_with_qpe(const SparseHermitian& h, const StateVector& state, Real tau,
                                          Real lambda0, Real p0, const QpeComparisonOptions& options,
                                          std::uint64_t seed);

}  // namespace hlgse
