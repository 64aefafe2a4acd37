#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "hlgse/filter.hpp"
#include "hlgse/hamiltonian.hpp"
#include "hlgse/sampler.hpp"

namespace hlgse {

/// Pr[J = j] = |c_j| / l1, drawn by Walker/Vose alias table.
class JDistribution {
 public:
  explicit JDistribution(const FourierFilter& filter);

  long sample(Rng& rng) const;
  Real probability(long j) const { return prob_[j + d_]; }
  int degree() const { return d_; }
  /// E|J| = sum |c_j| |j| / l1.
  Real mean_abs() const { return mean_abs_; }

 private:
  int d_ = 0;
  std::vector<Real> prob_;
  std::vector<Real> accept_;
  std::vector<std::uint32_t> alias_;
  Real mean_abs_ = 0.0;
};

struct SampleBatch {
  std::vector<CircuitSample> records;
  Real tau = 0.0;
  int d = 0;
  std::uint64_t seed = 0;

  std::size_t size() const { return records.size(); }
  bool operator==(const SampleBatch&) const = default;
};

bool operator==(const CircuitSample& a, const CircuitSample& b);

/// Records per RNG stream; stream k covers records [k * kChunk, (k + 1) * kChunk).
inline constexpr std::size_t kBatchChunk = 4096;

/// Draws `count` (J, Z) records.  Each chunk of kBatchChunk records has its own
/// stream keyed by (seed, chunk index), so the batch does not depend on `threads`.
/// With `reference`, Z is the control-free estimator instead of the Hadamard test.
SampleBatch generate_batch(const PhaseOracle& oracle, const FourierFilter& filter, std::size_t count,
                           std::uint64_t seed, int threads = 1,
                           const ControlFreeReference* reference = nullptr);

/// l1 * z * e^{i(theta_j + jx)}.  Throws if c_j = 0.
Complex g_term(Real x, long j, Complex z, const FourierFilter& filter);

/// Mean of g_term over records [begin, end) of the batch.
Complex g_bar(Real x, const SampleBatch& batch, const FourierFilter& filter, std::size_t begin,
              std::size_t end);
inline Complex g_bar(Real x, const SampleBatch& batch, const FourierFilter& filter) {
  return g_bar(x, batch, filter, 0, batch.size());
}

/// Aggregates a batch slice into per-j coefficients so that G-bar is a
/// degree-d trigonometric polynomial; cheap to evaluate at many points.
class GBarPolynomial {
 public:
  GBarPolynomial(const SampleBatch& batch, const FourierFilter& filter, std::size_t begin, std::size_t end);
  GBarPolynomial(const SampleBatch& batch, const FourierFilter& filter)
      : GBarPolynomial(batch, filter, 0, batch.size()) {}
  Complex operator()(Real x) const;

 private:
  int d_ = 0;
  VectorXc coeffs_;  // index j + d
};

/// C(x) = sum of weights at atoms <= x.
Real exact_cdf(const SpectralMeasure& measure, Real x);

/// sum_j c_j e^{ijx} sum_k p_k e^{-ij x_k}, evaluated as the direct double sum.
/// Throws InternalError if the imaginary residue exceeds 1e-6.
Real exact_acdf(const SpectralMeasure& measure, const FourierFilter& filter, Real x);

/// Precomputed form of exact_acdf for repeated evaluation.
class AcdfOracle {
 public:
  AcdfOracle(const SpectralMeasure& measure, const FourierFilter& filter);
  Real operator()(Real x) const;

 private:
  int d_ = 0;
  VectorXc a_;  // c_j * chi(j), j = 0..d
};

inline constexpr Real kDefaultSampleConstant = 512.0;

/// ceil(constant * l1^2 / eta^2).
long required_samples(Real eta, const FourierFilter& filter, Real constant = kDefaultSampleConstant);

struct AcdfTraceRow {
  Real x;
  Complex gbar;
  Real acdf;
  Real cdf;
};

/// Evaluates G-bar, the exact ACDF and the exact CDF at every x.
std::vector<AcdfTraceRow> acdf_trace(const std::vector<Real>& xs, const SampleBatch& batch,
                                     const FourierFilter& filter, const SpectralMeasure& measure);

// Text format: header "tau=<real> d=<int> seed=<int>", then one "j re im" line per record.
void write_batch(std::ostream& out, const SampleBatch& batch);
SampleBatch read_batch(std::istream& in);

}  // namespace hlgse
