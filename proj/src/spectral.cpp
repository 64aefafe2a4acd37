#include "hlgse/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "text_format.hpp"

namespace hlgse {

namespace {

// Union-find over the sparsity graph.
class Components {
 public:
  explicit Components(Index n) : parent_(static_cast<std::size_t>(n)) {
    std::iota(parent_.begin(), parent_.end(), Index{0});
  }
  Index find(Index i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }
  void unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<Index> parent_;
};

std::vector<std::vector<Index>> connected_components(const SparseHermitian& h) {
  const auto& m = h.matrix();
  Components uf(h.dim());
  for (Index r = 0; r < m.outerSize(); ++r) {
    for (SparseHermitian::Storage::InnerIterator it(m, r); it; ++it) uf.unite(r, it.col());
  }
  std::vector<Index> slot(static_cast<std::size_t>(h.dim()), -1);
  std::vector<std::vector<Index>> out;
  for (Index i = 0; i < h.dim(); ++i) {
    const Index root = uf.find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<Index>(out.size());
      out.emplace_back();
    }
    out[slot[root]].push_back(i);
  }
  return out;
}

EigenBlock solve_block(const SparseHermitian& h, std::vector<Index> support,
                       const std::vector<Index>& local_of) {
  const auto n = static_cast<Index>(support.size());
  const auto& m = h.matrix();
  EigenBlock block;
  if (h.is_real()) {
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
    for (Index a = 0; a < n; ++a) {
      for (SparseHermitian::Storage::InnerIterator it(m, support[a]); it; ++it) {
        dense(a, local_of[it.col()]) = it.value().real();
      }
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
    if (solver.info() != Eigen::Success) throw InternalError("dense eigensolve failed");
    block.values = solver.eigenvalues();
    block.vectors = solver.eigenvectors().cast<Complex>();
  } else {
    MatrixXc dense = MatrixXc::Zero(n, n);
    for (Index a = 0; a < n; ++a) {
      for (SparseHermitian::Storage::InnerIterator it(m, support[a]); it; ++it) {
        dense(a, local_of[it.col()]) = it.value();
      }
    }
    const Eigen::SelfAdjointEigenSolver<MatrixXc> solver(dense);
    if (solver.info() != Eigen::Success) throw InternalError("dense eigensolve failed");
    block.values = solver.eigenvalues();
    block.vectors = solver.eigenvectors();
  }
  block.support = std::move(support);
  return block;
}

}  // namespace

SpectralDecomposition spectral_decompose(const SparseHermitian& h, Real degeneracy_tol,
                                         const StateVector* restrict_to) {
  if (static_cast<Real>(h.dim()) > kMaxDecomposeDim) {
    throw InvalidArgument("operator of dimension " + std::to_string(h.dim()) +
                          " exceeds the dense-decomposition guard");
  }
  if (!(degeneracy_tol >= 0.0)) throw InvalidArgument("degeneracy tolerance must be >= 0");
  if (restrict_to != nullptr && restrict_to->dim() != h.dim()) {
    throw InvalidArgument("state and operator dimensions differ");
  }

  SpectralDecomposition out;
  out.dim_ = h.dim();
  out.block_of_.assign(static_cast<std::size_t>(h.dim()), -1);
  out.local_of_.assign(static_cast<std::size_t>(h.dim()), -1);

  for (auto& comp : connected_components(h)) {
    if (restrict_to != nullptr) {
      const bool touched = std::any_of(comp.begin(), comp.end(), [&](Index i) {
        return (*restrict_to)[i] != Complex(0.0, 0.0);
      });
      if (!touched) {
        out.complete_ = false;
        continue;
      }
    }
    const auto block_id = static_cast<Index>(out.blocks_.size());
    for (std::size_t a = 0; a < comp.size(); ++a) {
      out.block_of_[comp[a]] = block_id;
      out.local_of_[comp[a]] = static_cast<Index>(a);
    }
    out.blocks_.push_back(solve_block(h, std::move(comp), out.local_of_));
  }

  struct Level {
    Real value;
    SpectralDecomposition::Member member;
  };
  std::vector<Level> levels;
  for (std::size_t b = 0; b < out.blocks_.size(); ++b) {
    const auto& blk = out.blocks_[b];
    for (Index c = 0; c < blk.values.size(); ++c) {
      levels.push_back({blk.values[c], {static_cast<int>(b), c}});
    }
  }
  std::stable_sort(levels.begin(), levels.end(),
                   [](const Level& a, const Level& b) { return a.value < b.value; });

  std::vector<Real> sums;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i == 0 || levels[i].value - levels[i - 1].value >= degeneracy_tol) {
      out.groups_.emplace_back();
      sums.push_back(0.0);
    }
    out.groups_.back().push_back(levels[i].member);
    sums.back() += levels[i].value;
  }
  for (std::size_t k = 0; k < sums.size(); ++k) {
    out.eigenvalues_.push_back(sums[k] / static_cast<Real>(out.groups_[k].size()));
  }
  return out;
}

StateVector support_closure(const std::vector<SparseHermitian>& ops, const StateVector& state) {
  const Index n = state.dim();
  Components uf(n);
  for (const auto& op : ops) {
    if (op.dim() != n) throw InvalidArgument("operator and state dimensions differ");
    const auto& m = op.matrix();
    for (Index r = 0; r < m.outerSize(); ++r) {
      for (SparseHermitian::Storage::InnerIterator it(m, r); it; ++it) uf.unite(r, it.col());
    }
  }
  std::vector<bool> touched(static_cast<std::size_t>(n), false);
  for (Index i = 0; i < n; ++i) {
    if (state[i] != Complex(0.0, 0.0)) touched[uf.find(i)] = true;
  }
  VectorXc out = VectorXc::Zero(n);
  for (Index i = 0; i < n; ++i) {
    if (touched[uf.find(i)]) out[i] = 1.0;
  }
  return StateVector::normalized(out);
}

Real default_degeneracy_tol(const SparseHermitian& h) { return 1e-9 * spectral_radius(h); }

MatrixXc SpectralDecomposition::group_basis(std::size_t k) const {
  MatrixXc basis = MatrixXc::Zero(dim_, multiplicity(k));
  Index col = 0;
  for (const auto& mem : groups_[k]) {
    const auto& blk = blocks_[mem.block];
    for (std::size_t a = 0; a < blk.support.size(); ++a) {
      basis(blk.support[a], col) = blk.vectors(static_cast<Index>(a), mem.column);
    }
    ++col;
  }
  return basis;
}

MatrixXc SpectralDecomposition::reconstruct() const {
  MatrixXc out = MatrixXc::Zero(dim_, dim_);
  for (std::size_t k = 0; k < groups_.size(); ++k) {
    const MatrixXc v = group_basis(k);
    out += eigenvalues_[k] * (v * v.adjoint());
  }
  return out;
}

Real SpectralDecomposition::spectral_radius() const {
  Real r = 0.0;
  for (const Real v : eigenvalues_) r = std::max(r, std::abs(v));
  return r;
}

SpectralDecomposition::Expansion SpectralDecomposition::expand(const StateVector& state) const {
  if (state.dim() != dim_) throw InvalidArgument("state and decomposition dimensions differ");
  Real outside = 0.0;
  std::vector<bool> touched(blocks_.size(), false);
  for (Index i = 0; i < dim_; ++i) {
    if (state[i] == Complex(0.0, 0.0)) continue;
    if (block_of_[i] < 0) {
      outside += std::norm(state[i]);
    } else {
      touched[block_of_[i]] = true;
    }
  }
  if (outside > 0.0) {
    throw InvalidArgument("state has weight " + detail::format_real(outside) +
                          " outside the decomposed subspace");
  }
  Expansion ex;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (!touched[b]) continue;
    const auto& blk = blocks_[b];
    VectorXc local(static_cast<Index>(blk.support.size()));
    for (std::size_t a = 0; a < blk.support.size(); ++a) local[static_cast<Index>(a)] = state[blk.support[a]];
    const VectorXc coeff = blk.vectors.adjoint() * local;
    for (Index c = 0; c < coeff.size(); ++c) {
      ex.values.push_back(blk.values[c]);
      ex.coefficients.push_back(coeff[c]);
      ex.members.push_back({static_cast<int>(b), c});
    }
  }
  return ex;
}

std::vector<Real> SpectralDecomposition::overlaps(const StateVector& state) const {
  const Expansion ex = expand(state);
  // member -> group lookup
  std::vector<std::vector<Index>> group_of(blocks_.size());
  for (std::size_t b = 0; b < blocks_.size(); ++b) group_of[b].assign(static_cast<std::size_t>(blocks_[b].values.size()), -1);
  for (std::size_t k = 0; k < groups_.size(); ++k) {
    for (const auto& mem : groups_[k]) group_of[mem.block][mem.column] = static_cast<Index>(k);
  }
  std::vector<Real> p(groups_.size(), 0.0);
  for (std::size_t n = 0; n < ex.members.size(); ++n) {
    p[group_of[ex.members[n].block][ex.members[n].column]] += std::norm(ex.coefficients[n]);
  }
  return p;
}

VectorXc SpectralDecomposition::evolve(const StateVector& state, Real t) const {
  const Expansion ex = expand(state);
  VectorXc out = VectorXc::Zero(dim_);
  for (std::size_t n = 0; n < ex.members.size(); ++n) {
    const auto& blk = blocks_[ex.members[n].block];
    const Complex c = ex.coefficients[n] * std::exp(Complex(0.0, -t * ex.values[n]));
    for (std::size_t a = 0; a < blk.support.size(); ++a) {
      out[blk.support[a]] += c * blk.vectors(static_cast<Index>(a), ex.members[n].column);
    }
  }
  return out;
}

// --- spectral radius ---------------------------------------------------------

Real spectral_radius(const SparseHermitian& h, Index exact_limit) {
  if (h.dim() <= exact_limit) {
    return spectral_decompose(h, 0.0).spectral_radius();
  }
  // Lanczos with full reorthogonalization from a fixed pseudo-random start.
  const Index n = h.dim();
  const Index steps = std::min<Index>(n, 160);
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<Real> gauss;
  VectorXc q(n);
  for (Index i = 0; i < n; ++i) q[i] = Complex(gauss(rng), gauss(rng));
  q.normalize();
  MatrixXc basis(n, steps);
  std::vector<Real> alpha, beta;
  for (Index k = 0; k < steps; ++k) {
    basis.col(k) = q;
    VectorXc w = h.apply(q);
    alpha.push_back(q.dot(w).real());
    for (int pass = 0; pass < 2; ++pass) {
      w -= basis.leftCols(k + 1) * (basis.leftCols(k + 1).adjoint() * w);
    }
    const Real b = w.norm();
    if (b < 1e-12 || k + 1 == steps) break;
    beta.push_back(b);
    q = w / b;
  }
  const auto m = static_cast<Index>(alpha.size());
  Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
  for (Index k = 0; k < m; ++k) {
    tri(k, k) = alpha[k];
    if (k + 1 < m) tri(k, k + 1) = tri(k + 1, k) = beta[k];
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(tri, Eigen::EigenvaluesOnly);
  return std::max(std::abs(solver.eigenvalues()[0]), std::abs(solver.eigenvalues()[m - 1]));
}

// --- measures ------------------------------------------------------------------

SpectralMeasure::SpectralMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw InvalidArgument("spectral measure needs at least one atom");
  Real total = 0.0;
  for (std::size_t k = 0; k < atoms_.size(); ++k) {
    const auto& a = atoms_[k];
    if (!(a.p >= 0.0)) throw InvalidArgument("negative spectral weight");
    if (!(std::abs(a.x) < kPi / 3.0)) {
      throw InvalidArgument("atom at " + detail::format_real(a.x) + " lies outside (-pi/3, pi/3)");
    }
    if (k > 0 && !(a.x > atoms_[k - 1].x)) throw InvalidArgument("atom positions must strictly ascend");
    total += a.p;
  }
  if (std::abs(total - 1.0) > 1e-10) {
    throw InvalidArgument("spectral weights sum to " + detail::format_real(total));
  }
}

Complex SpectralMeasure::characteristic(Real j) const {
  Complex s = 0.0;
  for (const auto& a : atoms_) s += a.p * std::exp(Complex(0.0, -j * a.x));
  return s;
}

SpectralMeasure overlap_distribution(const SpectralDecomposition& decomp, const StateVector& state,
                                     Real tau) {
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
  const auto p = decomp.overlaps(state);
  std::vector<SpectralMeasure::Atom> atoms;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] < 1e-14) continue;
    const Real x = tau * decomp.eigenvalues()[k];
    if (std::abs(x) >= kPi / 3.0) {
      throw InvalidArgument("rescaling violated: tau*lambda = " + detail::format_real(x) +
                            " carries weight " + detail::format_real(p[k]));
    }
    atoms.push_back({x, p[k]});
  }
  return SpectralMeasure(std::move(atoms));
}

StateVector tune_ground_overlap(const SpectralDecomposition& decomp, const StateVector& state,
                                Real p0) {
  if (!(p0 > 0.0 && p0 <= 1.0)) throw InvalidArgument("target overlap must lie in (0, 1]");
  const auto p = decomp.overlaps(state);
  std::size_t k0 = 0;
  while (k0 < p.size() && p[k0] < 1e-14) ++k0;
  if (k0 == p.size()) throw InvalidArgument("state has no spectral weight");
  const MatrixXc basis = decomp.group_basis(k0);
  const VectorXc& phi = state.amplitudes();
  const VectorXc ground = basis * (basis.adjoint() * phi);
  const VectorXc rest = phi - ground;
  if (rest.norm() < 1e-12) {
    if (p0 < 1.0) throw InvalidArgument("state lies in the ground space; cannot lower its overlap");
    return state;
  }
  const VectorXc mixed = std::sqrt(p0) * ground.normalized() + std::sqrt(1.0 - p0) * rest.normalized();
  return StateVector::normalized(mixed);
}

}  // namespace hlgse
