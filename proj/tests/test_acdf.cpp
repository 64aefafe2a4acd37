#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hlgse/acdf.hpp"

using namespace hlgse;

namespace {

// Diagonal toy model whose spectral measure at tau = 1 is exactly `atoms`.
struct Toy {
  SparseHermitian h;
  StateVector state;
  SpectralMeasure measure;

  explicit Toy(const std::vector<SpectralMeasure::Atom>& atoms) : measure(atoms) {
    const Index dim = 8;
    std::vector<SparseHermitian::Entry> e;
    VectorXc amp = VectorXc::Zero(dim);
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      e.push_back({static_cast<Index>(k), static_cast<Index>(k), Complex(atoms[k].x, 0.0)});
      amp[static_cast<Index>(k)] = std::sqrt(atoms[k].p);
    }
    h = SparseHermitian::from_upper(dim, e);
    state = StateVector::normalized(amp);
  }
};

SpectralMeasure random_measure(Rng& rng, int atoms) {
  std::vector<Real> xs, ps;
  Real total = 0.0;
  for (int k = 0; k < atoms; ++k) {
    xs.push_back(-1.0 + 2.0 * uniform01(rng));
    ps.push_back(0.05 + uniform01(rng));
    total += ps.back();
  }
  std::sort(xs.begin(), xs.end());
  std::vector<SpectralMeasure::Atom> a;
  for (int k = 0; k < atoms; ++k) a.push_back({xs[k], ps[k] / total});
  return SpectralMeasure(a);
}

}  // namespace

TEST_CASE("J distribution") {
  const FourierFilter f = build_filter(25, 0.1);
  const JDistribution dist(f);
  CHECK(dist.degree() == 25);
  Real total = 0.0, mean_abs = 0.0;
  for (long j = -25; j <= 25; ++j) {
    CHECK(dist.probability(j) == doctest::Approx(std::abs(f.coeff(j)) / f.l1_norm()));
    total += dist.probability(j);
    mean_abs += std::abs(j) * dist.probability(j);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(dist.mean_abs() == doctest::Approx(mean_abs));

  Rng rng = make_stream(3, 0);
  const int n = 400000;
  std::vector<int> counts(51, 0);
  for (int i = 0; i < n; ++i) {
    const long j = dist.sample(rng);
    REQUIRE(std::abs(j) <= 25);
    REQUIRE((j == 0 || j % 2 != 0));
    ++counts[j + 25];
  }
  for (long j = -25; j <= 25; ++j) {
    const Real p = dist.probability(j);
    const Real sigma = std::sqrt(n * p * (1.0 - p));
    CHECK(std::abs(counts[j + 25] - n * p) <= 5.0 * sigma + 1e-9);
  }
}

TEST_CASE("exact ACDF equals the filter convolved with the measure") {
  Rng rng = make_stream(42, 0);
  const FourierFilter f = build_filter(48, 0.09);
  for (int trial = 0; trial < 5; ++trial) {
    const SpectralMeasure m = random_measure(rng, 1 + trial % 4);
    const AcdfOracle fast(m, f);
    for (Real x = -1.0; x <= 1.0; x += 0.137) {
      Real ref = 0.0;
      for (const auto& a : m.atoms()) ref += a.p * filter_value(f, x - a.x);
      CHECK(exact_acdf(m, f, x) == doctest::Approx(ref).epsilon(1e-12));
      CHECK(fast(x) == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("exhaustive expectation of G equals the ACDF") {
  Rng rng = make_stream(7, 1);
  for (int trial = 0; trial < 4; ++trial) {
    const SpectralMeasure m = random_measure(rng, 1 + trial);
    const Toy toy(m.atoms());
    const PhaseOracle o(toy.h, toy.state, 1.0, EvolutionBackend::exact());
    const FourierFilter f = build_filter(16 + 16 * trial, 0.2);
    const JDistribution dist(f);
    for (const Real x : {-0.8, -0.1, 0.0, 0.33, 0.9}) {
      Complex e = 0.0;
      for (long j = -f.degree(); j <= f.degree(); ++j) {
        if (dist.probability(j) == 0.0) continue;
        e += dist.probability(j) * g_term(x, j, o.amplitude(j), f);
      }
      CHECK(e.real() == doctest::Approx(exact_acdf(m, f, x)).epsilon(1e-12));
      CHECK(std::abs(e.imag()) < 1e-12);
    }
  }
}

TEST_CASE("exact CDF") {
  const SpectralMeasure m({{-0.5, 0.25}, {0.1, 0.5}, {0.4, 0.25}});
  CHECK(exact_cdf(m, -0.6) == 0.0);
  CHECK(exact_cdf(m, -0.5) == 0.25);
  CHECK(exact_cdf(m, 0.2) == 0.75);
  CHECK(exact_cdf(m, 1.0) == 1.0);
}

TEST_CASE("ACDF is sandwiched by the shifted CDF") {
  Rng rng = make_stream(9, 9);
  for (int trial = 0; trial < 20; ++trial) {
    const Real delta = 0.05 + 0.1 * uniform01(rng);
    const FourierFilter f = build_filter(heuristic_degree(delta), delta);
    const Real eps = sup_filter_error(f);
    const SpectralMeasure m = random_measure(rng, 1 + trial % 4);
    for (int k = 0; k < 20; ++k) {
      const Real x = -1.0 + 2.0 * uniform01(rng);
      const Real c = exact_acdf(m, f, x);
      CHECK(c >= exact_cdf(m, x - delta) - eps - 1e-12);
      CHECK(c <= exact_cdf(m, x + delta) + eps + 1e-12);
    }
  }
}

TEST_CASE("batches") {
  const Toy toy({{-0.6, 0.3}, {0.2, 0.7}});
  const PhaseOracle o(toy.h, toy.state, 1.0, EvolutionBackend::exact());
  const FourierFilter f = build_filter(40, 0.1);
  const std::size_t n = 3 * kBatchChunk + 17;

  const SampleBatch a = generate_batch(o, f, n, 123, 1);
  const SampleBatch b = generate_batch(o, f, n, 123, 4);
  const SampleBatch c = generate_batch(o, f, n, 124, 1);
  CHECK(a.size() == n);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.d == 40);
  CHECK(a.tau == 1.0);
  for (const auto& r : a.records) {
    REQUIRE(std::abs(r.j) <= 40);
    REQUIRE(std::abs(r.z.real()) == 1.0);
    REQUIRE(std::abs(r.z.imag()) == 1.0);
  }

  SUBCASE("polynomial evaluation matches the direct sum") {
    const GBarPolynomial p(a, f);
    for (Real x = -1.0; x <= 1.0; x += 0.21) CHECK(std::abs(p(x) - g_bar(x, a, f)) < 1e-11);
    const GBarPolynomial part(a, f, 100, 900);
    CHECK(std::abs(part(0.3) - g_bar(0.3, a, f, 100, 900)) < 1e-11);
  }
  SUBCASE("text round trip is bit-identical") {
    std::stringstream io;
    write_batch(io, a);
    CHECK(read_batch(io) == a);
    std::stringstream bad("tau=1 d=2 seed=0\n3 1 1\n");
    CHECK_THROWS_AS(read_batch(bad), InvalidArgument);
  }
  SUBCASE("trace rows") {
    const auto rows = acdf_trace({-0.7, 0.0, 0.5}, a, f, toy.measure);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].cdf == 0.0);
    CHECK(rows[1].cdf == doctest::Approx(0.3));
    CHECK(rows[2].cdf == doctest::Approx(1.0));
    CHECK(rows[2].acdf == doctest::Approx(exact_acdf(toy.measure, f, 0.5)));
  }
}

TEST_CASE("sample mean of G concentrates on the ACDF") {
  const Toy toy({{-0.4, 0.6}, {0.3, 0.4}});
  const PhaseOracle o(toy.h, toy.state, 1.0, EvolutionBackend::exact());
  const FourierFilter f = build_filter(60, 0.08);
  const std::size_t n = 200000;
  const SampleBatch batch = generate_batch(o, f, n, 77, 2);
  const GBarPolynomial gbar(batch, f);
  for (const Real x : {-0.6, -0.3, 0.0, 0.35}) {
    // |G|^2 = 2 l1^2 bounds each part's variance.
    const Real sigma = std::sqrt(2.0) * f.l1_norm() / std::sqrt(static_cast<Real>(n));
    CHECK(std::abs(gbar(x).real() - exact_acdf(toy.measure, f, x)) < 5.0 * sigma);
  }
}

TEST_CASE("sample counts and argument checks") {
  const FourierFilter f = build_filter(30, 0.1);
  CHECK(required_samples(0.5, f) ==
        static_cast<long>(std::ceil(512.0 * f.l1_norm() * f.l1_norm() / 0.25)));
  CHECK(required_samples(0.5, f, 1.0) == static_cast<long>(std::ceil(4.0 * f.l1_norm() * f.l1_norm())));
  CHECK_THROWS_AS(required_samples(0.0, f), InvalidArgument);
  CHECK_THROWS_AS(g_term(0.0, 2, Complex(1, 1), f), InvalidArgument);
  CHECK_THROWS_AS(g_term(0.0, 31, Complex(1, 1), f), InvalidArgument);
  const SampleBatch empty;
  CHECK_THROWS_AS(g_bar(0.0, empty, f), InvalidArgument);
}
