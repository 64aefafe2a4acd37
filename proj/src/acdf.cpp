#include "hlgse/acdf.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>

#include "text_format.hpp"

namespace hlgse {

JDistribution::JDistribution(const FourierFilter& filter) : d_(filter.degree()) {
  const std::size_t n = 2 * static_cast<std::size_t>(d_) + 1;
  prob_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    prob_[i] = std::abs(filter.coeffs()[static_cast<Index>(i)]) / filter.l1_norm();
    mean_abs_ += prob_[i] * std::abs(static_cast<Real>(i) - d_);
  }

  // Vose's alias construction.
  accept_.assign(n, 1.0);
  alias_.resize(n);
  std::vector<Real> scaled(n);
  std::vector<std::uint32_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = prob_[i] * static_cast<Real>(n);
    alias_[i] = static_cast<std::uint32_t>(i);
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const auto s = small.back();
    small.pop_back();
    const auto l = large.back();
    accept_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are 1 up to rounding; zero-probability slots must never be kept.
  for (const auto i : small) accept_[i] = prob_[i] > 0.0 ? 1.0 : 0.0;
  for (const auto i : large) accept_[i] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (prob_[i] == 0.0) accept_[i] = 0.0;
    if (accept_[i] < 1.0 && prob_[alias_[i]] == 0.0) throw InternalError("alias table points at a null slot");
  }
}

long JDistribution::sample(Rng& rng) const {
  const std::size_t n = prob_.size();
  const Real u = uniform01(rng) * static_cast<Real>(n);
  auto slot = static_cast<std::size_t>(u);
  if (slot >= n) slot = n - 1;
  const Real frac = u - static_cast<Real>(slot);
  const std::size_t pick = frac < accept_[slot] ? slot : alias_[slot];
  return static_cast<long>(pick) - d_;
}

bool operator==(const CircuitSample& a, const CircuitSample& b) { return a.j == b.j && a.z == b.z; }

SampleBatch generate_batch(const PhaseOracle& oracle, const FourierFilter& filter, std::size_t count,
                           std::uint64_t seed, int threads, const ControlFreeReference* reference) {
  if (threads < 1) throw InvalidArgument("thread count must be >= 1");
  const JDistribution dist(filter);
  SampleBatch batch;
  batch.tau = oracle.tau();
  batch.d = filter.degree();
  batch.seed = seed;
  batch.records.resize(count);
  oracle.prepare(filter.degree());

  const std::size_t chunks = (count + kBatchChunk - 1) / kBatchChunk;
  const auto fill = [&](std::size_t first_chunk, std::size_t stride) {
    for (std::size_t c = first_chunk; c < chunks; c += stride) {
      Rng rng = make_stream(seed, c);
      const std::size_t end = std::min(count, (c + 1) * kBatchChunk);
      for (std::size_t i = c * kBatchChunk; i < end; ++i) {
        const long j = dist.sample(rng);
        if (reference != nullptr) {
          batch.records[i] = {j, sample_z_control_free(oracle, j, *reference, rng).z_tilde};
        } else {
          batch.records[i] = sample_z(oracle, j, rng);
        }
      }
    }
  };
  const auto workers = static_cast<std::size_t>(std::min<std::size_t>(threads, std::max<std::size_t>(chunks, 1)));
  if (workers <= 1) {
    fill(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(fill, w, workers);
  }
  return batch;
}

Complex g_term(Real x, long j, Complex z, const FourierFilter& filter) {
  if (j < -filter.degree() || j > filter.degree()) throw InvalidArgument("|j| exceeds the filter degree");
  if (filter.coeff(j) == Complex(0.0, 0.0)) {
    throw InvalidArgument("filter coefficient at j = " + std::to_string(j) + " is zero");
  }
  return filter.l1_norm() * z * std::polar(1.0, filter.theta(j) + static_cast<Real>(j) * x);
}

Complex g_bar(Real x, const SampleBatch& batch, const FourierFilter& filter, std::size_t begin, std::size_t end) {
  if (end > batch.size() || begin >= end) throw InvalidArgument("empty or out-of-range batch slice");
  Complex s = 0.0;
  for (std::size_t k = begin; k < end; ++k) {
    const auto& r = batch.records[k];
    s += r.z * std::polar(1.0, filter.theta(r.j) + static_cast<Real>(r.j) * x);
  }
  return filter.l1_norm() * s / static_cast<Real>(end - begin);
}

GBarPolynomial::GBarPolynomial(const SampleBatch& batch, const FourierFilter& filter, std::size_t begin,
                               std::size_t end)
    : d_(filter.degree()), coeffs_(VectorXc::Zero(2 * filter.degree() + 1)) {
  if (end > batch.size() || begin >= end) throw InvalidArgument("empty or out-of-range batch slice");
  for (std::size_t k = begin; k < end; ++k) {
    const auto& r = batch.records[k];
    if (r.j < -d_ || r.j > d_) throw InvalidArgument("record j exceeds the filter degree");
    coeffs_[r.j + d_] += r.z;
  }
  const Real scale = filter.l1_norm() / static_cast<Real>(end - begin);
  for (long j = -d_; j <= d_; ++j) coeffs_[j + d_] *= scale * std::polar(1.0, filter.theta(j));
}

Complex GBarPolynomial::operator()(Real x) const {
  const Complex z = std::polar(1.0, x);
  Complex acc = 0.0;
  for (Index m = coeffs_.size() - 1; m >= 0; --m) acc = acc * z + coeffs_[m];
  return acc * std::polar(1.0, -static_cast<Real>(d_) * x);
}

Real exact_cdf(const SpectralMeasure& measure, Real x) {
  Real c = 0.0;
  for (const auto& a : measure.atoms()) {
    if (a.x <= x) c += a.p;
  }
  return c;
}

Real exact_acdf(const SpectralMeasure& measure, const FourierFilter& filter, Real x) {
  Complex s = 0.0;
  for (long j = -filter.degree(); j <= filter.degree(); ++j) {
    const Complex c = filter.coeff(j);
    if (c == Complex(0.0, 0.0)) continue;
    s += c * std::polar(1.0, static_cast<Real>(j) * x) * measure.characteristic(static_cast<Real>(j));
  }
  if (std::abs(s.imag()) > 1e-6) {
    throw InternalError("ACDF has imaginary residue " + detail::format_real(s.imag()));
  }
  return s.real();
}

AcdfOracle::AcdfOracle(const SpectralMeasure& measure, const FourierFilter& filter)
    : d_(filter.degree()), a_(filter.degree() + 1) {
  for (int j = 0; j <= d_; ++j) {
    const Complex c = filter.coeff(j);
    a_[j] = c == Complex(0.0, 0.0) ? Complex(0.0) : c * measure.characteristic(static_cast<Real>(j));
  }
}

Real AcdfOracle::operator()(Real x) const {
  const Complex z = std::polar(1.0, x);
  Complex acc = 0.0;
  for (int j = d_; j >= 1; --j) acc = (acc + a_[j]) * z;
  return a_[0].real() + 2.0 * acc.real();
}

long required_samples(Real eta, const FourierFilter& filter, Real constant) {
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidArgument("eta must lie in (0, 1]");
  if (!(constant > 0.0)) throw InvalidArgument("sample constant must be positive");
  const Real l1 = filter.l1_norm();
  return static_cast<long>(std::ceil(constant * l1 * l1 / (eta * eta)));
}

std::vector<AcdfTraceRow> acdf_trace(const std::vector<Real>& xs, const SampleBatch& batch,
                                     const FourierFilter& filter, const SpectralMeasure& measure) {
  const GBarPolynomial gbar(batch, filter);
  const AcdfOracle acdf(measure, filter);
  std::vector<AcdfTraceRow> rows;
  rows.reserve(xs.size());
  for (const Real x : xs) rows.push_back({x, gbar(x), acdf(x), exact_cdf(measure, x)});
  return rows;
}

void write_batch(std::ostream& out, const SampleBatch& batch) {
  out << "tau=" << detail::format_real(batch.tau) << " d=" << batch.d << " seed=" << batch.seed << '\n';
  for (const auto& r : batch.records) {
    out << r.j << ' ' << detail::format_real(r.z.real()) << ' ' << detail::format_real(r.z.imag()) << '\n';
  }
}

SampleBatch read_batch(std::istream& in) {
  std::string line;
  if (!detail::next_data_line(in, line)) throw InvalidArgument("empty batch file");
  const auto header = detail::parse_header(line);
  SampleBatch batch;
  batch.tau = detail::parse_real(detail::require_key(header, "tau"), "tau");
  batch.d = static_cast<int>(detail::parse_int(detail::require_key(header, "d"), "d"));
  const auto seed = detail::parse_int(detail::require_key(header, "seed"), "seed");
  if (seed < 0) throw InvalidArgument("seed must be non-negative");
  batch.seed = static_cast<std::uint64_t>(seed);
  while (detail::next_data_line(in, line)) {
    std::istringstream row(line);
    std::string sj, sre, sim, extra;
    if (!(row >> sj >> sre >> sim) || (row >> extra)) throw InvalidArgument("malformed batch line '" + line + "'");
    const long j = static_cast<long>(detail::parse_int(sj, "j"));
    if (j < -batch.d || j > batch.d) throw InvalidArgument("batch record j exceeds d");
    batch.records.push_back({j, Complex(detail::parse_real(sre, "re"), detail::parse_real(sim, "im"))});
  }
  return batch;
}

}  // namespace hlgse
