#pragma once

#include <iosfwd>

#include "hlgse/types.hpp"

namespace hlgse {

/// Chebyshev mollifier M(x) = T_d(1 + 2(cos x - cos delta)/(1 + cos delta)) / N
/// on the circle, normalized to unit mass.
struct Mollifier {
  int d = 0;
  Real delta = 0.0;
  /// N; may be +inf for extreme d*delta (values stay finite, see log_normalization).
  Real normalization = 0.0;
  Real log_normalization = 0.0;

  // T_d(y(x)) is stored relative to its peak value T_d(y(0)) = exp(log_peak).
  Real log_peak = 0.0;
  Real mass_over_peak = 0.0;  ///< integral of T_d(y(x)) / T_d(y(0))
};

/// Largest smearing for which the mollifier is defined: tan(delta/2) <= 1 - 1/sqrt(2).
Real max_mollifier_delta();

Mollifier make_mollifier(int d, Real delta);
Real mollifier_value(const Mollifier& m, Real x);

/// m_k = integral of M(x) e^{-ikx} over one period, k = -d..d (index k + d),
/// by trapezoid quadrature on `grid` points.  grid = 0 picks the smallest
/// power of two >= 4d + 4.  The unitary-normalized coefficient is m_k / sqrt(2 pi).
VectorXc mollifier_moments(int d, Real delta, Index grid = 0);
/// Unitary-normalized coefficients (1/sqrt(2pi)) integral M e^{-ikx}.
VectorXc mollifier_fourier_coeffs(int d, Real delta, Index grid = 0);

/// Fourier coefficient of the 2pi-periodic step H (1 on (0, pi), 0 on (-pi, 0))
/// in the (1/sqrt(2pi)) integral convention.
Complex heaviside_fourier_coeff(long k);

/// Smoothed step F = M * H with F(x) = sum_{|j|<=d} c_j e^{ijx}.
class FourierFilter {
 public:
  FourierFilter() = default;
  /// Assembles a filter from raw coefficients c_{-d..d}; derives the phases
  /// and the l1 norm.  Throws if the coefficients are not conjugate symmetric.
  FourierFilter(int d, Real delta, VectorXc coeffs, Real eps_achieved, Real decay_constant);

  int degree() const { return d_; }
  Real delta() const { return delta_; }
  const VectorXc& coeffs() const { return coeffs_; }
  Complex coeff(long j) const { return coeffs_[j + d_]; }
  Real theta(long j) const { return theta_[j + d_]; }
  Real l1_norm() const { return l1_; }
  /// Measured sup |F - H| on [delta, pi - delta] and its mirror image.
  Real eps_achieved() const { return eps_; }
  /// C with |c_j| * pi * |j| <= C for every odd j (from the mollifier's L1 mass).
  Real decay_constant() const { return decay_; }
  /// Largest violation of the decay bound, max_j (|c_j| pi |j| - C); <= 0 when it holds.
  Real decay_violation() const;
  bool has_even_harmonics() const { return even_harmonics_; }

  bool operator==(const FourierFilter& other) const;

 private:
  int d_ = 0;
  Real delta_ = 0.0;
  VectorXc coeffs_;
  Eigen::VectorXd theta_;
  Real l1_ = 0.0;
  Real eps_ = 0.0;
  Real decay_ = 0.0;
  bool even_harmonics_ = false;
};

inline constexpr int kEpsGridPoints = 8192;

FourierFilter build_filter(int d, Real delta);

/// Re sum c_j e^{ijx}, by Horner's rule in e^{ix}.
Real filter_value(const FourierFilter& f, Real x);

/// sup |F - H| on kEpsGridPoints uniform points of [delta, pi - delta] and of
/// [-pi + delta, -delta].
Real measure_band_error(const FourierFilter& f);
/// max(max_x F(x) - 1, -min_x F(x), 0) on a uniform grid of the whole circle.
Real measure_excursion(const FourierFilter& f, Index points);

/// Refined sup over the circle of the filter's deviation from its two
/// guarantees: |F - H| on the certified band, and the excursion of F outside
/// [0, 1] everywhere.  Grid extrema are polished by golden-section search.
Real sup_filter_error(const FourierFilter& f);

inline constexpr int kMaxCertifiedDegree = 10'000'000;

/// Smallest degree found by doubling then bisection whose filter has
/// eps_achieved <= eps.
int certified_degree(Real delta, Real eps);
/// ceil(4 / delta), the experimental rule of thumb.
int heuristic_degree(Real delta);

// Text format: header "d=<int> delta=<real> eps_achieved=<real> decay_constant=<real>",
// then one "j re im" line for j = -d..d.
void write_filter(std::ostream& out, const FourierFilter& f);
FourierFilter read_filter(std::istream& in);

}  // namespace hlgse
