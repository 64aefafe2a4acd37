#include "hlgse/filter.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <unsupported/Eigen/FFT>

#include "text_format.hpp"

namespace hlgse {

namespace {

void check_validity(int d, Real delta) {
  if (d < 1) throw InvalidArgument("filter degree must be >= 1, got " + std::to_string(d));
  if (!(delta > 0.0 && delta < kPi / 6.0)) {
    throw InvalidArgument("smearing delta must lie in (0, pi/6), got " + detail::format_real(delta));
  }
  if (!(delta <= max_mollifier_delta())) {
    throw InvalidArgument("smearing delta outside the mollifier validity range");
  }
}

// T_d(y(x)) / T_d(y(0)), evaluated without forming y directly.
Real scaled_chebyshev(int d, Real delta, Real s0, Real x) {
  const Real c2 = std::cos(0.5 * delta) * std::cos(0.5 * delta);
  const Real half_one_minus_y = std::sin(0.5 * (x - delta)) * std::sin(0.5 * (x + delta)) / c2;
  const Real e0 = std::exp(-2.0 * d * s0);
  if (half_one_minus_y >= 0.0) {
    const Real ch = std::cos(0.5 * x);
    const Real half_one_plus_y = ch * ch / c2;
    const Real theta = 2.0 * std::atan2(std::sqrt(half_one_minus_y), std::sqrt(half_one_plus_y));
    return std::cos(d * theta) * 2.0 * std::exp(-d * s0) / (1.0 + e0);
  }
  const Real s = 2.0 * std::asinh(std::sqrt(-half_one_minus_y));
  return std::exp(d * (s - s0)) * (1.0 + std::exp(-2.0 * d * s)) / (1.0 + e0);
}

Index default_grid(int d) { return static_cast<Index>(std::bit_ceil(static_cast<unsigned long>(4 * d + 4))); }

}  // namespace

Real max_mollifier_delta() { return 2.0 * std::atan(1.0 - 1.0 / std::sqrt(2.0)); }

Mollifier make_mollifier(int d, Real delta) {
  if (d < 1) throw InvalidArgument("mollifier degree must be >= 1");
  if (!(delta > 0.0 && delta <= max_mollifier_delta())) {
    throw InvalidArgument("mollifier smearing outside (0, 2 atan(1 - 1/sqrt 2)]");
  }
  Mollifier m;
  m.d = d;
  m.delta = delta;
  const Real s0 = 2.0 * std::asinh(std::tan(0.5 * delta));
  m.log_peak = d * s0 + std::log1p(std::exp(-2.0 * d * s0)) - std::log(2.0);
  // Trapezoid on 2d + 2 points integrates a degree-d trigonometric polynomial exactly.
  const Index grid = 2 * static_cast<Index>(d) + 2;
  Real sum = 0.0;
  for (Index n = 0; n < grid; ++n) {
    sum += scaled_chebyshev(d, delta, s0, -kPi + 2.0 * kPi * static_cast<Real>(n) / static_cast<Real>(grid));
  }
  m.mass_over_peak = 2.0 * kPi * sum / static_cast<Real>(grid);
  if (!(m.mass_over_peak > 0.0)) throw InternalError("mollifier mass is not positive");
  m.log_normalization = m.log_peak + std::log(m.mass_over_peak);
  m.normalization = std::exp(m.log_normalization);
  return m;
}

Real mollifier_value(const Mollifier& m, Real x) {
  const Real s0 = 2.0 * std::asinh(std::tan(0.5 * m.delta));
  return scaled_chebyshev(m.d, m.delta, s0, x) / m.mass_over_peak;
}

VectorXc mollifier_moments(int d, Real delta, Index grid) {
  const Mollifier m = make_mollifier(d, delta);
  if (grid == 0) grid = default_grid(d);
  if (grid < 2 * static_cast<Index>(d) + 1) throw InvalidArgument("quadrature grid too coarse for degree");
  const Real s0 = 2.0 * std::asinh(std::tan(0.5 * delta));
  std::vector<Real> samples(static_cast<std::size_t>(grid));
  for (Index n = 0; n < grid; ++n) {
    samples[n] = scaled_chebyshev(d, delta, s0, 2.0 * kPi * static_cast<Real>(n) / static_cast<Real>(grid)) /
                 m.mass_over_peak;
  }
  Eigen::FFT<Real> fft;
  std::vector<Complex> spectrum;
  fft.fwd(spectrum, samples);
  VectorXc out(2 * d + 1);
  const Real w = 2.0 * kPi / static_cast<Real>(grid);
  out[d] = 1.0;
  for (int k = 1; k <= d; ++k) {
    // M is even, so its moments are real.
    const Real v = w * spectrum[k].real();
    out[d + k] = v;
    out[d - k] = v;
  }
  return out;
}

VectorXc mollifier_fourier_coeffs(int d, Real delta, Index grid) {
  return mollifier_moments(d, delta, grid) / std::sqrt(2.0 * kPi);
}

Complex heaviside_fourier_coeff(long k) {
  if (k == 0) return std::sqrt(kPi / 2.0);
  if (k % 2 == 0) return 0.0;
  return Complex(0.0, -2.0 / (std::sqrt(2.0 * kPi) * static_cast<Real>(k)));
}

// --- FourierFilter -------------------------------------------------------------

FourierFilter::FourierFilter(int d, Real delta, VectorXc coeffs, Real eps_achieved, Real decay_constant)
    : d_(d), delta_(delta), coeffs_(std::move(coeffs)), eps_(eps_achieved), decay_(decay_constant) {
  if (d < 0 || coeffs_.size() != 2 * static_cast<Index>(d) + 1) {
    throw InvalidArgument("filter needs 2d + 1 coefficients");
  }
  if (coeffs_[d].imag() != 0.0) throw InvalidArgument("constant filter coefficient must be real");
  for (int j = 1; j <= d; ++j) {
    if (coeffs_[d - j] != std::conj(coeffs_[d + j])) {
      throw InvalidArgument("filter coefficients are not conjugate symmetric at j = " + std::to_string(j));
    }
  }
  for (int j = 2; j <= d && !even_harmonics_; j += 2) even_harmonics_ = coeffs_[d + j] != Complex(0.0, 0.0);
  theta_.resize(coeffs_.size());
  l1_ = 0.0;
  for (Index i = 0; i < coeffs_.size(); ++i) {
    theta_[i] = coeffs_[i] == Complex(0.0, 0.0) ? 0.0 : std::arg(coeffs_[i]);
    l1_ += std::abs(coeffs_[i]);
  }
  if (!(l1_ > 0.0)) throw InvalidArgument("filter has zero l1 norm");
}

Real FourierFilter::decay_violation() const {
  Real worst = -decay_;
  for (int j = 1; j <= d_; ++j) {
    const Real scaled = kPi * j * std::max(std::abs(coeff(j)), std::abs(coeff(-j)));
    worst = std::max(worst, scaled - decay_);
  }
  return worst;
}

bool FourierFilter::operator==(const FourierFilter& other) const {
  return d_ == other.d_ && delta_ == other.delta_ && eps_ == other.eps_ && decay_ == other.decay_ &&
         coeffs_ == other.coeffs_ && theta_ == other.theta_ && l1_ == other.l1_;
}

FourierFilter build_filter(int d, Real delta) {
  check_validity(d, delta);
  const Mollifier m = make_mollifier(d, delta);
  const VectorXc moments = mollifier_moments(d, delta);
  VectorXc c = VectorXc::Zero(2 * d + 1);
  c[d] = 0.5;
  for (int j = 1; j <= d; j += 2) {
    const Complex cj(0.0, -moments[d + j].real() / (kPi * j));
    c[d + j] = cj;
    c[d - j] = std::conj(cj);
  }
  const Real decay = 1.0 + 4.0 * kPi * std::exp(-m.log_normalization);
  FourierFilter draft(d, delta, c, 0.0, decay);
  const Real eps = measure_band_error(draft);
  return FourierFilter(d, delta, std::move(c), eps, decay);
}

Real filter_value(const FourierFilter& f, Real x) {
  const int d = f.degree();
  const Complex z = std::polar(1.0, x);
  const Complex z2 = z * z;
  // Only odd harmonics are non-zero: sum c_j z^j = z * sum_m c_{2m+1} (z^2)^m.
  const int top = d % 2 == 1 ? d : d - 1;
  Complex acc = 0.0;
  for (int j = top; j >= 1; j -= 2) acc = acc * z2 + f.coeff(j);
  acc *= z;
  Real value = f.coeff(0).real() + 2.0 * acc.real();
  // Even coefficients are zero for built filters but may be non-zero in loaded ones.
  if (f.has_even_harmonics()) {
    Complex even = 0.0;
    for (int j = d - d % 2; j >= 2; j -= 2) even = even * z2 + f.coeff(j);
    value += 2.0 * (even * z2).real();
  }
  return value;
}

Real measure_band_error(const FourierFilter& f) {
  const Real delta = f.delta();
  const Real span = kPi - 2.0 * delta;
  Real worst = 0.0;
  for (int n = 0; n < kEpsGridPoints; ++n) {
    const Real x = delta + span * static_cast<Real>(n) / static_cast<Real>(kEpsGridPoints - 1);
    worst = std::max(worst, std::abs(filter_value(f, x) - 1.0));
    worst = std::max(worst, std::abs(filter_value(f, -x)));
  }
  return worst;
}

Real measure_excursion(const FourierFilter& f, Index points) {
  Real worst = 0.0;
  for (Index n = 0; n < points; ++n) {
    const Real v = filter_value(f, -kPi + 2.0 * kPi * static_cast<Real>(n) / static_cast<Real>(points));
    worst = std::max({worst, v - 1.0, -v});
  }
  return worst;
}

namespace {

Real deviation(const FourierFilter& f, Real x) {
  const Real v = filter_value(f, x);
  const Real ax = std::abs(x);
  Real e = std::max({v - 1.0, -v, 0.0});
  if (ax >= f.delta() && ax <= kPi - f.delta()) e = std::max(e, std::abs(v - (x > 0.0 ? 1.0 : 0.0)));
  return e;
}

Real golden_max(const FourierFilter& f, Real a, Real b) {
  const Real g = 0.5 * (std::sqrt(5.0) - 1.0);
  Real c = b - g * (b - a);
  Real d = a + g * (b - a);
  Real fc = deviation(f, c);
  Real fd = deviation(f, d);
  for (int it = 0; it < 60 && b - a > 1e-15; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = deviation(f, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = deviation(f, d);
    }
  }
  return std::max({fc, fd, deviation(f, a), deviation(f, b)});
}

}  // namespace

Real sup_filter_error(const FourierFilter& f) {
  const Index n = 32 * (2 * static_cast<Index>(f.degree()) + 1);
  const Real h = 2.0 * kPi / static_cast<Real>(n);
  std::vector<Real> e(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) e[i] = deviation(f, -kPi + h * static_cast<Real>(i));
  // Polish the largest local maxima; band edges are included as explicit points.
  std::vector<std::pair<Real, Index>> peaks;
  for (Index i = 0; i < n; ++i) {
    const Real l = e[(i + n - 1) % n];
    const Real r = e[(i + 1) % n];
    if (e[i] >= l && e[i] >= r && e[i] > 0.0) peaks.emplace_back(e[i], i);
  }
  std::sort(peaks.begin(), peaks.end(), std::greater<>());
  Real best = 0.0;
  for (const Real x : {f.delta(), -f.delta(), kPi - f.delta(), -kPi + f.delta()}) best = std::max(best, deviation(f, x));
  for (std::size_t k = 0; k < std::min<std::size_t>(peaks.size(), 32); ++k) {
    const Real x = -kPi + h * static_cast<Real>(peaks[k].second);
    best = std::max(best, golden_max(f, x - h, x + h));
  }
  return best;
}

int certified_degree(Real delta, Real eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("target error must lie in (0, 1)");
  check_validity(1, delta);
  const auto passes = [&](int d) { return build_filter(d, delta).eps_achieved() <= eps; };
  int lo = 0;
  int hi = 1;
  while (!passes(hi)) {
    lo = hi;
    if (hi > kMaxCertifiedDegree / 2) throw InvalidArgument("certified degree search exceeded its cap");
    hi *= 2;
  }
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (passes(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

int heuristic_degree(Real delta) {
  if (!(delta > 0.0)) throw InvalidArgument("smearing must be positive");
  return static_cast<int>(std::ceil(4.0 / delta - 1e-9));
}

void write_filter(std::ostream& out, const FourierFilter& f) {
  out << "d=" << f.degree() << " delta=" << detail::format_real(f.delta())
      << " eps_achieved=" << detail::format_real(f.eps_achieved())
      << " decay_constant=" << detail::format_real(f.decay_constant()) << '\n';
  for (int j = -f.degree(); j <= f.degree(); ++j) {
    out << j << ' ' << detail::format_real(f.coeff(j).real()) << ' '
        << detail::format_real(f.coeff(j).imag()) << '\n';
  }
}

FourierFilter read_filter(std::istream& in) {
  std::string line;
  if (!detail::next_data_line(in, line)) throw InvalidArgument("empty filter file");
  const auto header = detail::parse_header(line);
  const auto d = static_cast<int>(detail::parse_int(detail::require_key(header, "d"), "d"));
  const Real delta = detail::parse_real(detail::require_key(header, "delta"), "delta");
  const Real eps = detail::parse_real(detail::require_key(header, "eps_achieved"), "eps_achieved");
  const auto it = header.find("decay_constant");
  const Real decay = it == header.end() ? 0.0 : detail::parse_real(it->second, "decay_constant");
  if (d < 1) throw InvalidArgument("filter degree must be >= 1");
  VectorXc c(2 * d + 1);
  for (int j = -d; j <= d; ++j) {
    if (!detail::next_data_line(in, line)) throw InvalidArgument("filter file truncated at j = " + std::to_string(j));
    std::istringstream row(line);
    std::string sj, sre, sim, extra;
    if (!(row >> sj >> sre >> sim) || (row >> extra)) throw InvalidArgument("malformed filter line '" + line + "'");
    if (detail::parse_int(sj, "j") != j) throw InvalidArgument("filter lines must list j = -d..d in order");
    c[j + d] = Complex(detail::parse_real(sre, "re"), detail::parse_real(sim, "im"));
  }
  if (detail::next_data_line(in, line)) throw InvalidArgument("trailing data after filter coefficients");
  return FourierFilter(d, delta, std::move(c), eps, decay);
}

}  // namespace hlgse
