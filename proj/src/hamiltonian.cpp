#include "hlgse/hamiltonian.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "text_format.hpp"

namespace hlgse {

namespace {

using Basis = std::uint64_t;

int parity_below(Basis n, int q) {
  const Basis mask = (Basis{1} << q) - 1;
  return std::popcount(n & mask) & 1;
}

// c+_a c_b |n>; returns false when the result vanishes.
bool apply_hop(Basis n, int a, int b, Basis& out, Real& sign) {
  if (((n >> b) & 1) == 0) return false;
  const Basis m = n ^ (Basis{1} << b);
  if (((m >> a) & 1) != 0) return false;
  const int parity = parity_below(n, b) + parity_below(m, a);
  out = m | (Basis{1} << a);
  sign = (parity & 1) ? -1.0 : 1.0;
  return true;
}

std::vector<std::pair<int, int>> bonds(const HubbardSpec& spec) {
  std::set<std::pair<int, int>> out;
  for (int j = 0; j + 1 < spec.sites; ++j) out.insert({j, j + 1});
  if (spec.boundary == Boundary::kPeriodic) {
    out.insert({0, spec.sites - 1});
  }
  return {out.begin(), out.end()};
}

void check_size(const HubbardSpec& spec, int max_qubits) {
  spec.validate();
  if (spec.qubits() > max_qubits) {
    throw InvalidArgument("Hubbard chain of " + std::to_string(spec.sites) + " sites needs " +
                          std::to_string(spec.qubits()) + " qubits, above the limit of " +
                          std::to_string(max_qubits));
  }
}

SparseHermitian hopping_part(const HubbardSpec& spec) {
  const int nq = spec.qubits();
  const Index dim = Index{1} << nq;
  std::vector<SparseHermitian::Entry> entries;
  const auto bond_list = bonds(spec);
  for (Basis n = 0; n < static_cast<Basis>(dim); ++n) {
    for (const auto& [i, k] : bond_list) {
      for (int s = 0; s < 2; ++s) {
        const int qa = spin_orbital(i, s);
        const int qb = spin_orbital(k, s);
        for (const auto& [a, b] : {std::pair{qa, qb}, std::pair{qb, qa}}) {
          Basis m = 0;
          Real sign = 0.0;
          // Only row < col entries; the reverse hop supplies the conjugate.
          if (apply_hop(n, a, b, m, sign) && m < n) {
            entries.push_back({static_cast<Index>(m), static_cast<Index>(n),
                               Complex(-spec.hopping * sign, 0.0)});
          }
        }
      }
    }
  }
  return SparseHermitian::from_upper(dim, entries);
}

SparseHermitian interaction_part(const HubbardSpec& spec) {
  const int nq = spec.qubits();
  const Index dim = Index{1} << nq;
  std::vector<SparseHermitian::Entry> entries;
  entries.reserve(static_cast<std::size_t>(dim));
  for (Basis n = 0; n < static_cast<Basis>(dim); ++n) {
    Real e = 0.0;
    for (int j = 0; j < spec.sites; ++j) {
      const Real up = static_cast<Real>((n >> spin_orbital(j, 0)) & 1) - 0.5;
      const Real dn = static_cast<Real>((n >> spin_orbital(j, 1)) & 1) - 0.5;
      e += up * dn;
    }
    entries.push_back({static_cast<Index>(n), static_cast<Index>(n), Complex(spec.interaction * e, 0.0)});
  }
  return SparseHermitian::from_upper(dim, entries);
}

}  // namespace

void HubbardSpec::validate() const {
  if (sites < 2) throw InvalidArgument("Hubbard chain needs at least 2 sites");
  if (n_up < 0 || n_down < 0 || n_up > sites || n_down > sites) {
    throw InvalidArgument("filling (" + std::to_string(n_up) + "," + std::to_string(n_down) +
                          ") does not fit " + std::to_string(sites) + " sites");
  }
  if (!std::isfinite(hopping) || !std::isfinite(interaction)) {
    throw InvalidArgument("Hubbard parameters must be finite");
  }
}

// --- SparseHermitian --------------------------------------------------------

SparseHermitian::SparseHermitian(Storage m) : matrix_(std::move(m)) {
  matrix_.makeCompressed();
  real_ = true;
  for (Index k = 0; k < matrix_.nonZeros(); ++k) {
    if (matrix_.valuePtr()[k].imag() != 0.0) {
      real_ = false;
      break;
    }
  }
}

SparseHermitian SparseHermitian::from_upper(Index dim, const std::vector<Entry>& entries) {
  if (dim < 1 || !std::has_single_bit(static_cast<std::uint64_t>(dim))) {
    throw InvalidArgument("operator dimension " + std::to_string(dim) + " is not a power of two");
  }
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.row < 0 || e.col >= dim || e.row > e.col) {
      throw InvalidArgument("entry (" + std::to_string(e.row) + "," + std::to_string(e.col) +
                            ") is not in the upper triangle of a " + std::to_string(dim) +
                            "-dim operator");
    }
    if (e.row == e.col && e.value.imag() != 0.0) {
      throw InvalidArgument("diagonal entry " + std::to_string(e.row) + " is not real");
    }
    trips.emplace_back(e.row, e.col, e.value);
  }
  Storage upper(dim, dim);
  upper.setFromTriplets(trips.begin(), trips.end());
  Storage strict = upper.triangularView<Eigen::StrictlyUpper>();
  Storage full = upper + Storage(strict.adjoint());
  full.prune(Complex(0.0, 0.0));
  return SparseHermitian(std::move(full));
}

int SparseHermitian::qubits() const {
  return std::countr_zero(static_cast<std::uint64_t>(dim()));
}

bool SparseHermitian::is_diagonal() const {
  for (Index r = 0; r < matrix_.outerSize(); ++r) {
    for (Storage::InnerIterator it(matrix_, r); it; ++it) {
      if (it.col() != r) return false;
    }
  }
  return true;
}

std::vector<SparseHermitian::Entry> SparseHermitian::upper_entries() const {
  std::vector<Entry> out;
  for (Index r = 0; r < matrix_.outerSize(); ++r) {
    for (Storage::InnerIterator it(matrix_, r); it; ++it) {
      if (it.col() >= r && it.value() != Complex(0.0, 0.0)) out.push_back({r, it.col(), it.value()});
    }
  }
  return out;
}

SparseHermitian SparseHermitian::operator+(const SparseHermitian& other) const {
  if (dim() != other.dim()) throw InvalidArgument("operator dimensions differ");
  auto a = upper_entries();
  const auto b = other.upper_entries();
  a.insert(a.end(), b.begin(), b.end());
  return from_upper(dim(), a);
}

bool SparseHermitian::operator==(const SparseHermitian& other) const {
  if (dim() != other.dim()) return false;
  const auto a = upper_entries();
  const auto b = other.upper_entries();
  return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](const Entry& x, const Entry& y) {
    return x.row == y.row && x.col == y.col && x.value == y.value;
  });
}

// --- states -----------------------------------------------------------------

StateVector::StateVector(VectorXc amplitudes) : amps_(std::move(amplitudes)) {
  const Real norm = amps_.norm();
  if (std::abs(norm - 1.0) > 1e-12) {
    throw InvalidArgument("state norm " + detail::format_real(norm) + " differs from 1");
  }
}

StateVector StateVector::normalized(const VectorXc& amplitudes) {
  const Real norm = amplitudes.norm();
  if (!(norm > 0.0)) throw InvalidArgument("cannot normalize a zero vector");
  return StateVector(amplitudes / norm);
}

StateVector StateVector::basis(Index dim, Index index) {
  VectorXc v = VectorXc::Zero(dim);
  v[index] = 1.0;
  return StateVector(std::move(v));
}

StateVector vacuum_state(int qubits) { return StateVector::basis(Index{1} << qubits, 0); }

// --- Hubbard ------------------------------------------------------------------

SparseHermitian build_hubbard(const HubbardSpec& spec, int max_qubits) {
  check_size(spec, max_qubits);
  return hopping_part(spec) + interaction_part(spec);
}

std::vector<SparseHermitian> hubbard_terms(const HubbardSpec& spec, int max_qubits) {
  check_size(spec, max_qubits);
  return {hopping_part(spec), interaction_part(spec)};
}

SparseHermitian number_operator(int qubits) {
  const Index dim = Index{1} << qubits;
  std::vector<SparseHermitian::Entry> entries;
  for (Index n = 0; n < dim; ++n) {
    entries.push_back({n, n, Complex(std::popcount(static_cast<Basis>(n)), 0.0)});
  }
  return SparseHermitian::from_upper(dim, entries);
}

Eigen::MatrixXd hopping_matrix(const HubbardSpec& spec) {
  spec.validate();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(spec.sites, spec.sites);
  for (const auto& [i, k] : bonds(spec)) {
    h(i, k) = -spec.hopping;
    h(k, i) = -spec.hopping;
  }
  return h;
}

StateVector hartree_fock_state(const HubbardSpec& spec) {
  spec.validate();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hopping_matrix(spec));
  const Eigen::VectorXd& energies = solver.eigenvalues();
  const Eigen::MatrixXd& orbitals = solver.eigenvectors();
  const Real scale = std::max(1.0, std::abs(spec.hopping));

  for (const int count : {spec.n_up, spec.n_down}) {
    if (count > 0 && count < spec.sites && energies[count] - energies[count - 1] < 1e-10 * scale) {
      throw InvalidArgument("degenerate Fermi level: orbitals " + std::to_string(count - 1) +
                            " and " + std::to_string(count) + " share energy " +
                            detail::format_real(energies[count]) +
                            "; perturb the hopping or choose another filling");
    }
  }

  const int nq = spec.qubits();
  const Index dim = Index{1} << nq;
  VectorXc state = VectorXc::Zero(dim);
  state[0] = 1.0;
  for (int spin = 0; spin < 2; ++spin) {
    const int count = spin == 0 ? spec.n_up : spec.n_down;
    for (int a = 0; a < count; ++a) {
      VectorXc next = VectorXc::Zero(dim);
      for (Index n = 0; n < dim; ++n) {
        if (state[n] == Complex(0.0, 0.0)) continue;
        for (int j = 0; j < spec.sites; ++j) {
          const int q = spin_orbital(j, spin);
          const auto basis = static_cast<Basis>(n);
          if ((basis >> q) & 1) continue;
          const Real sign = parity_below(basis, q) ? -1.0 : 1.0;
          next[static_cast<Index>(basis | (Basis{1} << q))] += sign * orbitals(j, a) * state[n];
        }
      }
      state = std::move(next);
    }
  }
  return StateVector::normalized(state);
}

// --- tau ------------------------------------------------------------------

Real select_tau(Real norm_bound, Real target) {
  if (!(norm_bound > 0.0) || !std::isfinite(norm_bound)) {
    throw InvalidArgument("norm bound must be positive, got " + detail::format_real(norm_bound));
  }
  if (!(target > 0.0) || !(target < kPi / 3.0)) {
    throw InvalidArgument("tau target must lie in (0, pi/3)");
  }
  return target / norm_bound;
}

// --- text format ------------------------------------------------------------

void write_triplets(std::ostream& out, const SparseHermitian& h) {
  out << "dim=" << h.dim() << '\n';
  for (const auto& e : h.upper_entries()) {
    out << e.row << ' ' << e.col << ' ' << detail::format_real(e.value.real()) << ' '
        << detail::format_real(e.value.imag()) << '\n';
  }
}

SparseHermitian read_triplets(std::istream& in) {
  std::string line;
  if (!detail::next_data_line(in, line)) throw InvalidArgument("empty operator file");
  const auto header = detail::parse_header(line);
  const Index dim = detail::parse_int(detail::require_key(header, "dim"), "dim");
  std::vector<SparseHermitian::Entry> entries;
  while (detail::next_data_line(in, line)) {
    std::istringstream row(line);
    std::string r, c, re, im;
    if (!(row >> r >> c >> re >> im)) throw InvalidArgument("malformed triplet line '" + line + "'");
    entries.push_back({detail::parse_int(r, "row"), detail::parse_int(c, "col"),
                       Complex(detail::parse_real(re, "re"), detail::parse_real(im, "im"))});
  }
  return SparseHermitian::from_upper(dim, entries);
}

}  // namespace hlgse
