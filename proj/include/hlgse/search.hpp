#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "hlgse/acdf.hpp"

namespace hlgse {

enum class DegreePolicy { kCertified, kHeuristic };

struct EstimationConfig {
  Real epsilon = 0.0;
  Real eta = 0.0;
  Real vartheta = 0.0;
  Real tau = 0.0;
  DegreePolicy policy = DegreePolicy::kCertified;

  // Derived.
  Real delta = 0.0;  ///< tau * epsilon
  int d = 0;
  long n_s = 0;
  long n_b = 0;
  long m = 0;  ///< n_s * n_b
  int iterations = 0;  ///< L
  Real nu = 0.0;       ///< vartheta / L
};

struct EstimationPlan {
  EstimationConfig config;
  FourierFilter filter;  ///< smearing (2/3) delta
};

struct PlanOptions {
  Real sample_constant = kDefaultSampleConstant;  ///< N_s = ceil(c l1^2 / eta^2)
  Real vote_constant = 8.0;                       ///< N_b = ceil(c ln(1/nu))
  std::optional<int> degree;                      ///< overrides the policy
};

/// L = ceil(log2((pi - 2 delta) / delta)).
int search_iterations(Real delta);

EstimationPlan derive_parameters(Real epsilon, Real eta, Real vartheta, Real tau, DegreePolicy policy,
                                 const PlanOptions& options = {});

struct CertifyResult {
  int bit = 1;
  long votes = 0;  ///< c = #{r : Re G-bar_r(x) > (3/4) eta}
};

/// Majority vote over n_b consecutive sub-batches of n_s records: returns
/// bit 0 when more than half exceed (3/4) eta, else 1.
CertifyResult certify(Real x, Real eta, const SampleBatch& batch, const FourierFilter& filter, long n_s,
                      long n_b);

struct SearchStep {
  Real x0;
  Real x1;
  Real x;
  int bit;
  long votes;
};

struct SearchTrace {
  std::vector<SearchStep> steps;
};

/// Decision rule used by the binary search at a midpoint; returns {bit, votes}.
using CertifyFn = std::function<CertifyResult(Real x)>;

/// Padded binary search from (-pi/3, pi/3) until the bracket is at most 2 delta;
/// on bit 0 the right end moves to x + (2/3) delta, on bit 1 the left end to
/// x - (2/3) delta.  Returns the bracket midpoint.
Real invert_cdf(Real delta, const CertifyFn& decide, SearchTrace* trace = nullptr);

/// invert_cdf driven by sampled certify calls.
Real invert_cdf(const EstimationConfig& config, const SampleBatch& batch, const FourierFilter& filter,
                SearchTrace* trace = nullptr);

/// Error-free decision: bit 0 iff the exact ACDF exceeds (3/4) eta.
CertifyFn oracle_certify(const AcdfOracle& acdf, Real eta);

struct EstimateReport {
  Real lambda_tilde = 0.0;
  Real x_star = 0.0;
  EstimationConfig config;
  long max_abs_j = 0;
  Real total_evolution_time = 0.0;  ///< tau * sum |J_k|
  Real max_evolution_time = 0.0;    ///< tau * max |J_k|
  std::uint64_t seed = 0;
  Real wall_seconds = 0.0;
  SearchTrace trace;
};

struct EstimateOptions {
  std::optional<Real> tau;         ///< defaults to select_tau(spectral radius)
  std::optional<Real> norm_bound;  ///< user-supplied bound on ||H||
  DegreePolicy policy = DegreePolicy::kCertified;
  PlanOptions plan;
  int threads = 1;
  const std::vector<SparseHermitian>* terms = nullptr;  ///< required for Trotter
};

EstimateReport estimate_ground_energy(const SparseHermitian& h, const StateVector& state, Real epsilon, Real eta,
                                      Real vartheta, const EvolutionBackend& backend, std::uint64_t seed,
                                      const EstimateOptions& options = {});

/// First point of a uniform grid on [-pi/3, pi/3] where Re G-bar >= eta/2,
/// divided by tau.  grid_points = 0 means 4d.  Throws NoCrossing.
Real heuristic_estimate(const SampleBatch& batch, const FourierFilter& filter, Real eta, Real tau,
                        Index grid_points = 0);

/// Flat "key=value" lines: lambda_tilde, tau, d, M, N_s, N_b, L,
/// total_evolution_time, max_evolution_time, seed.
void write_report(std::ostream& out, const EstimateReport& report);

}  // namespace hlgse
