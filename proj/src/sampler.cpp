#include "hlgse/sampler.hpp"

#include <cmath>
#include <mutex>
#include <optional>
#include <string>

#include "text_format.hpp"

namespace hlgse {

Rng make_stream(std::uint64_t master_seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

void EvolutionBackend::validate() const {
  if (kind == Kind::kExact) return;
  if (order < 2 || order % 2 != 0) {
    throw InvalidArgument("Trotter order must be a positive even integer, got " + std::to_string(order));
  }
  if (steps < 1) throw InvalidArgument("Trotter steps must be >= 1, got " + std::to_string(steps));
}

// --- evolution ------------------------------------------------------------------

namespace {

void evolve_blocks(const SpectralDecomposition& decomp, VectorXc& v, Real t) {
  for (const auto& blk : decomp.blocks()) {
    const auto n = static_cast<Index>(blk.support.size());
    VectorXc local(n);
    for (Index a = 0; a < n; ++a) local[a] = v[blk.support[a]];
    VectorXc coeff = blk.vectors.adjoint() * local;
    for (Index c = 0; c < n; ++c) coeff[c] *= std::polar(1.0, -t * blk.values[c]);
    local.noalias() = blk.vectors * coeff;
    for (Index a = 0; a < n; ++a) v[blk.support[a]] = local[a];
  }
}

using Sequence = std::vector<std::pair<std::size_t, Real>>;

Sequence suzuki_sequence(std::size_t terms, int order, Real w) {
  Sequence out;
  if (order == 2) {
    for (std::size_t g = 0; g < terms; ++g) out.emplace_back(g, 0.5 * w);
    for (std::size_t g = terms; g-- > 0;) out.emplace_back(g, 0.5 * w);
    return out;
  }
  const int k = order / 2;
  const Real u = 1.0 / (4.0 - std::pow(4.0, 1.0 / (2.0 * k - 1.0)));
  const Sequence outer = suzuki_sequence(terms, order - 2, u * w);
  const Sequence middle = suzuki_sequence(terms, order - 2, (1.0 - 4.0 * u) * w);
  for (int rep = 0; rep < 2; ++rep) out.insert(out.end(), outer.begin(), outer.end());
  out.insert(out.end(), middle.begin(), middle.end());
  for (int rep = 0; rep < 2; ++rep) out.insert(out.end(), outer.begin(), outer.end());
  return out;
}

}  // namespace

TrotterPropagator::TrotterPropagator(const std::vector<SparseHermitian>& terms, int order, int steps,
                                     const StateVector* restrict_to)
    : steps_(steps) {
  EvolutionBackend::trotter(order, steps).validate();
  if (terms.empty()) throw InvalidArgument("Trotter backend requires a term decomposition");
  dim_ = terms.front().dim();
  std::optional<StateVector> closure;
  if (restrict_to != nullptr) closure = support_closure(terms, *restrict_to);
  for (const auto& term : terms) {
    if (term.dim() != dim_) throw InvalidArgument("Trotter terms have mismatched dimensions");
    if (term.is_diagonal()) {
      Eigen::VectorXd diag = Eigen::VectorXd::Zero(dim_);
      const auto& m = term.matrix();
      for (Index r = 0; r < m.outerSize(); ++r) {
        for (SparseHermitian::Storage::InnerIterator it(m, r); it; ++it) diag[r] = it.value().real();
      }
      diagonals_.push_back(std::move(diag));
      terms_.emplace_back();
    } else {
      diagonals_.emplace_back();
      terms_.push_back(spectral_decompose(term, 0.0, closure ? &*closure : nullptr));
    }
  }
  for (const auto& [g, w] : suzuki_sequence(terms.size(), order, 1.0)) {
    if (!sequence_.empty() && sequence_.back().term == g) {
      sequence_.back().weight += w;
    } else {
      sequence_.push_back({g, w});
    }
  }
}

void TrotterPropagator::apply_term(VectorXc& v, std::size_t term, Real t) const {
  if (diagonals_[term].size() > 0) {
    const auto& diag = diagonals_[term];
    for (Index i = 0; i < dim_; ++i) v[i] *= std::polar(1.0, -t * diag[i]);
  } else {
    evolve_blocks(terms_[term], v, t);
  }
}

VectorXc TrotterPropagator::apply(const VectorXc& v, Real t) const {
  if (v.size() != dim_) throw InvalidArgument("vector and propagator dimensions differ");
  VectorXc out = v;
  const Real dt = t / static_cast<Real>(steps_);
  for (int s = 0; s < steps_; ++s) {
    for (const auto& f : sequence_) apply_term(out, f.term, f.weight * dt);
  }
  return out;
}

MatrixXc TrotterPropagator::unitary(Real t) const {
  MatrixXc u(dim_, dim_);
  for (Index c = 0; c < dim_; ++c) u.col(c) = apply(VectorXc::Unit(dim_, c), t);
  return u;
}

VectorXc evolve_exact(const SpectralDecomposition& decomp, const VectorXc& v, Real t) {
  if (v.size() != decomp.dim()) throw InvalidArgument("vector and decomposition dimensions differ");
  VectorXc out = v;
  evolve_blocks(decomp, out, t);
  return out;
}

VectorXc evolve(const StateVector& state, const SparseHermitian& h, Real t, const EvolutionBackend& backend,
                const std::vector<SparseHermitian>* terms) {
  backend.validate();
  if (state.dim() != h.dim()) throw InvalidArgument("state and operator dimensions differ");
  if (backend.kind == EvolutionBackend::Kind::kExact) {
    const auto decomp = spectral_decompose(h, default_degeneracy_tol(h), &state);
    return decomp.evolve(state, t);
  }
  if (terms == nullptr) throw InvalidArgument("Trotter backend requires a term decomposition");
  return TrotterPropagator(*terms, backend.order, backend.steps, &state).apply(state.amplitudes(), t);
}

// --- amplitude oracle -----------------------------------------------------------

PhaseOracle::PhaseOracle(const SparseHermitian& h, const StateVector& state, Real tau, EvolutionBackend backend,
                         const std::vector<SparseHermitian>* terms)
    : PhaseOracle(h, nullptr, state, tau, backend, terms) {}

PhaseOracle::PhaseOracle(const SparseHermitian& h, const SpectralDecomposition& decomp, const StateVector& state,
                         Real tau, EvolutionBackend backend, const std::vector<SparseHermitian>* terms)
    : PhaseOracle(h, &decomp, state, tau, backend, terms) {}

PhaseOracle::PhaseOracle(const SparseHermitian& h, const SpectralDecomposition* decomp, const StateVector& state,
                         Real tau, EvolutionBackend backend, const std::vector<SparseHermitian>* terms)
    : state_(state), tau_(tau), backend_(backend) {
  backend_.validate();
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
  if (state.dim() != h.dim()) throw InvalidArgument("state and operator dimensions differ");
  if (backend_.kind == EvolutionBackend::Kind::kExact) {
    if (decomp != nullptr && decomp->dim() != h.dim()) throw InvalidArgument("decomposition dimension differs");
    const auto ex = decomp != nullptr ? decomp->expand(state) : spectral_decompose(h, 0.0, &state).expand(state);
    for (std::size_t n = 0; n < ex.values.size(); ++n) {
      const Real w = std::norm(ex.coefficients[n]);
      if (w == 0.0) continue;
      values_.push_back(ex.values[n]);
      weights_.push_back(w);
    }
  } else {
    if (terms == nullptr) throw InvalidArgument("Trotter backend requires a term decomposition");
    trotter_ = std::make_unique<TrotterPropagator>(*terms, backend_.order, backend_.steps, &state);
    trotter_head_ = state.amplitudes();
  }
  cache_.push_back(1.0);
}

Complex PhaseOracle::compute(long j) const {
  Complex s = 0.0;
  const Real t = tau_ * static_cast<Real>(j);
  for (std::size_t n = 0; n < values_.size(); ++n) s += weights_[n] * std::polar(1.0, -t * values_[n]);
  return s;
}

void PhaseOracle::extend_to(long j) const {
  while (static_cast<long>(cache_.size()) <= j) {
    const auto k = static_cast<long>(cache_.size());
    if (trotter_) {
      trotter_head_ = trotter_->apply(trotter_head_, tau_);
      cache_.push_back(state_.amplitudes().dot(trotter_head_));
    } else {
      cache_.push_back(compute(k));
    }
  }
}

Complex PhaseOracle::amplitude(long j) const {
  const long k = j < 0 ? -j : j;
  {
    std::shared_lock lock(mutex_);
    if (k < static_cast<long>(cache_.size())) return j < 0 ? std::conj(cache_[k]) : cache_[k];
  }
  std::unique_lock lock(mutex_);
  extend_to(k);
  return j < 0 ? std::conj(cache_[k]) : cache_[k];
}

void PhaseOracle::prepare(long max_j) const {
  std::unique_lock lock(mutex_);
  extend_to(max_j < 0 ? -max_j : max_j);
}

// --- Hadamard test ----------------------------------------------------------------

int sample_xy(const PhaseOracle& oracle, long j, Part part, Rng& rng) {
  const Complex a = oracle.amplitude(j);
  const Real v = part == Part::kRe ? a.real() : a.imag();
  if (std::abs(v) > 1.0 + 1e-9) {
    throw InternalError("outcome expectation " + detail::format_real(v) + " exceeds 1 in magnitude");
  }
  return uniform01(rng) < 0.5 * (1.0 + v) ? 1 : -1;
}

CircuitSample sample_z(const PhaseOracle& oracle, long j, Rng& rng) {
  const int x = sample_xy(oracle, j, Part::kRe, rng);
  const int y = sample_xy(oracle, j, Part::kIm, rng);
  return {j, Complex(x, y)};
}

// --- control-free circuit -----------------------------------------------------------

ControlFreeReference make_control_free_reference(const SparseHermitian& h, const StateVector& phi,
                                                 StateVector psi, Real lambda) {
  if (psi.dim() != h.dim() || phi.dim() != h.dim()) throw InvalidArgument("reference dimension mismatch");
  const Real overlap = std::abs(psi.amplitudes().dot(phi.amplitudes()));
  if (overlap > 1e-10) {
    throw InvalidArgument("reference state overlaps the initial state: |<psi_R|phi>| = " +
                          detail::format_real(overlap));
  }
  const Real residual = (h.apply(psi.amplitudes()) - lambda * psi.amplitudes()).norm();
  if (residual > 1e-9 * std::max(1.0, std::abs(lambda))) {
    throw InvalidArgument("reference state is not an eigenvector with the given eigenvalue (residual " +
                          detail::format_real(residual) + ")");
  }
  return {std::move(psi), lambda};
}

std::array<Real, 8> control_free_cells(Complex alpha) {
  const Real base = 1.0 + std::norm(alpha);
  std::array<Real, 8> p{};
  for (int b1 = 0; b1 < 2; ++b1) {
    for (int b2 = 0; b2 < 2; ++b2) {
      const Real sign = (b1 + b2) % 2 == 0 ? 1.0 : -1.0;
      p[2 * b1 + b2] = (base + 2.0 * sign * alpha.real()) / 16.0;
      p[4 + 2 * b1 + b2] = (base - 2.0 * sign * alpha.imag()) / 16.0;
    }
  }
  return p;
}

namespace {

// Runs one K setting: returns (-1)^{b1+b2} for an all-zero third register, else 0.
int draw_cell(const std::array<Real, 8>& cells, int k, Rng& rng) {
  Real u = uniform01(rng);
  for (int b = 0; b < 4; ++b) {
    u -= cells[4 * k + b];
    if (u < 0.0) return (b == 0 || b == 3) ? 1 : -1;
  }
  return 0;
}

}  // namespace

ControlFreeSample sample_z_control_free(const PhaseOracle& oracle, long j, const ControlFreeReference& ref,
                                        Rng& rng) {
  const Real t = oracle.tau() * static_cast<Real>(j);
  const Complex alpha = std::polar(1.0, ref.lambda * t) * oracle.amplitude(j);
  if (std::abs(alpha) > 1.0 + 1e-9) throw InternalError("control-free amplitude exceeds 1 in magnitude");
  const auto cells = control_free_cells(alpha);
  const int x = draw_cell(cells, 0, rng);
  const int y = draw_cell(cells, 1, rng);
  return {j, 2.0 * std::polar(1.0, -ref.lambda * t) * Complex(x, -y)};
}

long trotter_steps_required(long d, Real eta, Real c_trotter, Real tau, int order, Real kappa) {
  if (d < 1 || !(eta > 0.0) || !(tau > 0.0) || !(kappa > 0.0) || !(c_trotter >= 0.0)) {
    throw InvalidArgument("trotter_steps_required needs positive inputs");
  }
  if (order < 2 || order % 2 != 0) throw InvalidArgument("Trotter order must be a positive even integer");
  const Real ip = 1.0 / order;
  const Real arg = kappa * std::pow(static_cast<Real>(d), ip) * std::pow(eta, -ip) * std::pow(c_trotter, ip) *
                   std::pow(tau, 1.0 + ip);
  return std::max(1L, static_cast<long>(std::ceil(arg)));
}

}  // namespace hlgse
