#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <shared_mutex>
#include <vector>

#include "hlgse/hamiltonian.hpp"

namespace hlgse {

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline Real uniform01(Rng& rng) { return static_cast<Real>(rng() >> 11) * 0x1.0p-53; }

/// Independent stream for (master_seed, stream index).
Rng make_stream(std::uint64_t master_seed, std::uint64_t stream);

struct EvolutionBackend {
  enum class Kind { kExact, kTrotter };
  Kind kind = Kind::kExact;
  int order = 2;  ///< Suzuki order p (even)
  int steps = 1;  ///< r

  static EvolutionBackend exact() { return {}; }
  static EvolutionBackend trotter(int order, int steps) { return {Kind::kTrotter, order, steps}; }
  void validate() const;
};

/// Symmetric Suzuki product S_p(t/r)^r over a term split H = sum_g H_g.
class TrotterPropagator {
 public:
  /// With `restrict_to`, each term is diagonalized only on the components the
  /// state touches; the propagator is then valid on that invariant subspace.
  TrotterPropagator(const std::vector<SparseHermitian>& terms, int order, int steps,
                    const StateVector* restrict_to = nullptr);

  Index dim() const { return dim_; }
  /// S_p(t/r)^r v.  Negative t gives the inverse (the formula is symmetric).
  VectorXc apply(const VectorXc& v, Real t) const;
  /// Dense matrix of S_p(t/r)^r (small dims only).
  MatrixXc unitary(Real t) const;

 private:
  struct Factor {
    std::size_t term;
    Real weight;  ///< fraction of the step time
  };
  void apply_term(VectorXc& v, std::size_t term, Real t) const;

  Index dim_ = 0;
  int steps_ = 1;
  std::vector<SpectralDecomposition> terms_;
  std::vector<Eigen::VectorXd> diagonals_;  ///< non-empty when the term is diagonal
  std::vector<Factor> sequence_;
};

/// e^{-itH} v through the spectral decomposition.
VectorXc evolve_exact(const SpectralDecomposition& decomp, const VectorXc& v, Real t);

/// Evolves `state` for time t.  The Trotter backend requires the term split.
VectorXc evolve(const StateVector& state, const SparseHermitian& h, Real t,
                const EvolutionBackend& backend,
                const std::vector<SparseHermitian>* terms = nullptr);

/// Amplitudes a_j = <phi|U^j|phi> for the one-step evolution U over time tau,
/// cached per j.  Thread-safe: concurrent reads, one insertion per key.
class PhaseOracle {
 public:
  PhaseOracle(const SparseHermitian& h, const StateVector& state, Real tau,
              EvolutionBackend backend, const std::vector<SparseHermitian>* terms = nullptr);
  /// Reuses an existing decomposition of h for the exact backend.  It must
  /// cover the support of `state`.
  PhaseOracle(const SparseHermitian& h, const SpectralDecomposition& decomp, const StateVector& state, Real tau,
              EvolutionBackend backend, const std::vector<SparseHermitian>* terms = nullptr);

  Real tau() const { return tau_; }
  const EvolutionBackend& backend() const { return backend_; }
  const StateVector& state() const { return state_; }

  Complex amplitude(long j) const;
  /// Fills the cache for |j| <= max_j.
  void prepare(long max_j) const;

 private:
  PhaseOracle(const SparseHermitian& h, const SpectralDecomposition* decomp, const StateVector& state, Real tau,
              EvolutionBackend backend, const std::vector<SparseHermitian>* terms);
  Complex compute(long j) const;  // j >= 0
  void extend_to(long j) const;   // caller holds the unique lock

  StateVector state_;
  Real tau_ = 0.0;
  EvolutionBackend backend_;

  // Exact backend: eigen-expansion weights of the state.
  std::vector<Real> values_;
  std::vector<Real> weights_;

  // Trotter backend: propagator and the running vector U^k phi.
  std::unique_ptr<TrotterPropagator> trotter_;
  mutable VectorXc trotter_head_;

  mutable std::shared_mutex mutex_;
  mutable std::vector<Complex> cache_;  // a_0, a_1, ...
};

/// <phi|U^j|phi> from the oracle.
inline Complex expectation_phase(const PhaseOracle& oracle, long j) { return oracle.amplitude(j); }

enum class Part { kRe, kIm };

struct CircuitSample {
  long j = 0;
  Complex z;
};

/// One Hadamard-test outcome: +1 with probability (1 + v)/2, v the real or
/// imaginary part of the amplitude.
int sample_xy(const PhaseOracle& oracle, long j, Part part, Rng& rng);

/// Z = X + iY from two independent outcomes.
CircuitSample sample_z(const PhaseOracle& oracle, long j, Rng& rng);

/// Reference eigenpair for the control-free circuit, validated against H and
/// the initial state.
struct ControlFreeReference {
  StateVector psi;
  Real lambda = 0.0;
};

/// Throws unless psi is an eigenvector of h with eigenvalue lambda and
/// |<psi|phi>| <= 1e-10.
ControlFreeReference make_control_free_reference(const SparseHermitian& h, const StateVector& phi,
                                                 StateVector psi, Real lambda);

struct ControlFreeSample {
  long j = 0;
  Complex z_tilde;
};

/// Outcome probabilities of the two-ancilla circuit given
/// alpha = <phi|e^{-it(H - lambda_R)}|phi>: cell (k, b1, b2) at index 4k + 2b1 + b2,
/// k = 0 for K = I and k = 1 for K = S.  The remaining mass is the
/// "third register not all zero" outcome.
std::array<Real, 8> control_free_cells(Complex alpha);

ControlFreeSample sample_z_control_free(const PhaseOracle& oracle, long j,
                                        const ControlFreeReference& ref, Rng& rng);

/// max{1, ceil(kappa d^{1/p} eta^{-1/p} C^{1/p} tau^{1 + 1/p})}.
long trotter_steps_required(long d, Real eta, Real c_trotter, Real tau, int order,
                            Real kappa = 1.0);

}  // namespace hlgse
