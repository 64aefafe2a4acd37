#pragma once

#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "hlgse/types.hpp"

namespace hlgse {

enum class Boundary { kOpen, kPeriodic };

/// One-dimensional Fermi-Hubbard chain,
///   H = -t sum_<j,j'>,s c+_{j,s} c_{j',s} + U sum_j (n_{j,up} - 1/2)(n_{j,dn} - 1/2).
struct HubbardSpec {
  int sites = 2;
  Real hopping = 1.0;
  Real interaction = 0.0;
  Boundary boundary = Boundary::kOpen;
  int n_up = 1;
  int n_down = 1;

  void validate() const;
  int qubits() const { return 2 * sites; }
};

/// Jordan-Wigner qubit index of spin-orbital (site, spin); spin 0 is up.
constexpr int spin_orbital(int site, int spin) { return 2 * site + spin; }

/// Hermitian operator on n qubits, stored as a full sparse matrix.
///
/// Only the upper triangle is ever supplied by callers; the lower triangle is
/// filled with exact conjugates, so the stored matrix equals its adjoint
/// bit-for-bit.
class SparseHermitian {
 public:
  using Storage = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;
  struct Entry {
    Index row;
    Index col;
    Complex value;
  };

  SparseHermitian() = default;

  /// Builds from (row <= col) entries; duplicates are summed.  Diagonal
  /// entries must be real.
  static SparseHermitian from_upper(Index dim, const std::vector<Entry>& entries);

  Index dim() const { return matrix_.rows(); }
  int qubits() const;
  const Storage& matrix() const { return matrix_; }
  bool is_real() const { return real_; }
  bool is_diagonal() const;

  /// Row-major upper-triangle entries (row <= col), zeros dropped.
  std::vector<Entry> upper_entries() const;

  VectorXc apply(const VectorXc& v) const { return matrix_ * v; }
  MatrixXc dense() const { return MatrixXc(matrix_); }

  SparseHermitian operator+(const SparseHermitian& other) const;
  bool operator==(const SparseHermitian& other) const;

 private:
  explicit SparseHermitian(Storage m);
  Storage matrix_;
  bool real_ = true;
};

/// Unit-norm pure state.
class StateVector {
 public:
  StateVector() = default;
  /// Throws unless the norm is 1 within 1e-12.
  explicit StateVector(VectorXc amplitudes);
  static StateVector normalized(const VectorXc& amplitudes);
  static StateVector basis(Index dim, Index index);

  Index dim() const { return amps_.size(); }
  const VectorXc& amplitudes() const { return amps_; }
  Complex operator[](Index i) const { return amps_[i]; }

 private:
  VectorXc amps_;
};

/// One eigenspace block produced by the block-wise dense eigensolve.
struct EigenBlock {
  std::vector<Index> support;  ///< global basis indices, ascending
  Eigen::VectorXd values;      ///< ascending
  MatrixXc vectors;            ///< columns, in local coordinates of support
};

/// Eigen-decomposition H = sum_k lambda_k Pi_k with degenerate eigenvalues
/// grouped.  H is split into connected components of its sparsity graph and
/// each component is diagonalized densely; eigenvectors are kept in
/// block-local coordinates so no dim x dim matrix is ever formed.
class SpectralDecomposition {
 public:
  struct Member {
    int block;
    Index column;
  };

  Index dim() const { return dim_; }
  /// True when the blocks cover the whole Hilbert space.
  bool complete() const { return complete_; }
  std::size_t size() const { return eigenvalues_.size(); }
  const std::vector<Real>& eigenvalues() const { return eigenvalues_; }
  const std::vector<std::vector<Member>>& groups() const { return groups_; }
  const std::vector<EigenBlock>& blocks() const { return blocks_; }
  Index multiplicity(std::size_t k) const { return static_cast<Index>(groups_[k].size()); }

  /// Orthonormal basis of the k-th eigenspace as dense columns.
  MatrixXc group_basis(std::size_t k) const;
  /// sum_k lambda_k Pi_k as a dense matrix (small dims only).
  MatrixXc reconstruct() const;
  /// Largest |lambda| over the decomposed blocks.
  Real spectral_radius() const;

  /// Per-group overlaps sum_{v in group} |<v|phi>|^2.  Throws if the state
  /// has weight outside the decomposed blocks.
  std::vector<Real> overlaps(const StateVector& state) const;

  /// Eigen-expansion of a state: returns (lambda_n, c_n = <v_n|phi>) for every
  /// eigenvector touching the state's support.
  struct Expansion {
    std::vector<Real> values;
    std::vector<Complex> coefficients;
    std::vector<Member> members;
  };
  Expansion expand(const StateVector& state) const;
  /// e^{-i t H} phi evaluated through the eigenbasis.
  VectorXc evolve(const StateVector& state, Real t) const;

 private:
  friend SpectralDecomposition spectral_decompose(const SparseHermitian&, Real,
                                                  const StateVector*);
  Index dim_ = 0;
  bool complete_ = true;
  std::vector<Index> block_of_;   // global index -> block (or -1)
  std::vector<Index> local_of_;   // global index -> local position
  std::vector<EigenBlock> blocks_;
  std::vector<Real> eigenvalues_;
  std::vector<std::vector<Member>> groups_;
};

/// Atomic spectral measure {(x_k, p_k)} of tau*H with respect to a state.
class SpectralMeasure {
 public:
  struct Atom {
    Real x;
    Real p;
  };
  SpectralMeasure() = default;
  /// Validates: weights non-negative and summing to 1 (1e-10), positions
  /// strictly ascending inside (-pi/3, pi/3).
  explicit SpectralMeasure(std::vector<Atom> atoms);

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  const Atom& ground() const { return atoms_.front(); }

  /// sum_k p_k e^{-i j x_k}
  Complex characteristic(Real j) const;

 private:
  std::vector<Atom> atoms_;
};

// ---------------------------------------------------------------------------

inline constexpr int kDefaultMaxQubits = 20;

SparseHermitian build_hubbard(const HubbardSpec& spec, int max_qubits = kDefaultMaxQubits);

/// Hopping and interaction groups; their sum equals build_hubbard(spec).
std::vector<SparseHermitian> hubbard_terms(const HubbardSpec& spec,
                                           int max_qubits = kDefaultMaxQubits);

/// Total number operator N = sum_q n_q on n qubits.
SparseHermitian number_operator(int qubits);

/// Single-particle hopping matrix of the chain (L x L).
Eigen::MatrixXd hopping_matrix(const HubbardSpec& spec);

/// Slater determinant of the lowest n_up / n_down orbitals of the hopping
/// matrix.  Throws InvalidArgument when the Fermi level is degenerate.
StateVector hartree_fock_state(const HubbardSpec& spec);

/// |0...0>, the fermionic vacuum.
StateVector vacuum_state(int qubits);

inline constexpr Real kMaxDecomposeDim = static_cast<Real>(1 << 20);

/// Exact block-wise dense eigensolve.  Eigenvalues closer than degeneracy_tol
/// are merged into one group.  When `restrict_to` is given only the components
/// of H touched by that state's support are diagonalized.
SpectralDecomposition spectral_decompose(const SparseHermitian& h, Real degeneracy_tol,
                                         const StateVector* restrict_to = nullptr);

/// Uniform state on every basis index connected to the support of `state`
/// through the union of the operators' sparsity graphs: the smallest
/// coordinate subspace that all of them leave invariant.
StateVector support_closure(const std::vector<SparseHermitian>& ops, const StateVector& state);

/// Default grouping tolerance 1e-9 * ||H||.
Real default_degeneracy_tol(const SparseHermitian& h);

/// Exact spectral radius for small operators; Lanczos extremal Ritz values
/// (full reorthogonalization) above `exact_limit`.
Real spectral_radius(const SparseHermitian& h, Index exact_limit = 4096);

/// tau = target / norm_bound; default target pi/4.  Any returned tau obeys
/// tau * norm_bound < pi/3.
Real select_tau(Real norm_bound, Real target = kPi / 4.0);

/// Weights p_k = <phi|Pi_k|phi> placed at tau*lambda_k.  Atoms below 1e-14
/// are dropped; throws if a retained atom violates |tau*lambda| < pi/3.
SpectralMeasure overlap_distribution(const SpectralDecomposition& decomp,
                                     const StateVector& state, Real tau);

/// sqrt(p0)|psi_0> + sqrt(1-p0)|phi_perp>, where phi_perp is the normalized
/// part of `state` orthogonal to the lowest eigenspace it touches.
StateVector tune_ground_overlap(const SpectralDecomposition& decomp, const StateVector& state,
                                Real p0);

// Text format: header "dim=<2^n>", then one "row col re im" line per upper
// triangle entry.
void write_triplets(std::ostream& out, const SparseHermitian& h);
SparseHermitian read_triplets(std::istream& in);

}  // namespace hlgse
