#include <doctest.h>

#include <cmath>
#include <set>
#include <thread>

#include <unsupported/Eigen/MatrixFunctions>

#include "hlgse/hamiltonian.hpp"
#include "hlgse/sampler.hpp"

using namespace hlgse;

namespace {

HubbardSpec chain(int sites, Real u) {
  HubbardSpec s;
  s.sites = sites;
  s.interaction = u;
  s.n_up = sites / 2;
  s.n_down = sites - sites / 2;
  return s;
}

struct Fixture {
  HubbardSpec spec;
  SparseHermitian h;
  std::vector<SparseHermitian> terms;
  StateVector hf;
  Real tau;
  explicit Fixture(int sites, Real u = 4.0)
      : spec(chain(sites, u)),
        h(build_hubbard(spec)),
        terms(hubbard_terms(spec)),
        hf(hartree_fock_state(spec)),
        tau(select_tau(spectral_radius(h))) {}
};

Real slope(const std::vector<Real>& x, const std::vector<Real>& y) {
  Real mx = 0, my = 0, sxy = 0, sxx = 0;
  const auto n = static_cast<Real>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace

TEST_CASE("random streams") {
  Rng a = make_stream(7, 0), b = make_stream(7, 0), c = make_stream(7, 1), d = make_stream(8, 0);
  const auto xa = a(), xb = b(), xc = c(), xd = d();
  CHECK(xa == xb);
  CHECK(xa != xc);
  CHECK(xa != xd);
  Rng r = make_stream(1, 2);
  for (int i = 0; i < 10000; ++i) {
    const Real u = uniform01(r);
    CHECK((u >= 0.0 && u < 1.0));
  }
}

TEST_CASE("amplitude reference values") {
  SUBCASE("two sites") {
    const Fixture f(2);
    const PhaseOracle o(f.h, f.hf, f.tau, EvolutionBackend::exact());
    CHECK(o.amplitude(0) == Complex(1.0, 0.0));
    CHECK(o.amplitude(5).real() == doctest::Approx(-0.707106781186548).epsilon(1e-12));
    CHECK(o.amplitude(5).imag() == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(o.amplitude(3).real() == doctest::Approx(-0.707106781186547).epsilon(1e-12));
    CHECK(o.amplitude(3).imag() == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("four sites") {
    const Fixture f(4);
    const PhaseOracle o(f.h, f.hf, f.tau, EvolutionBackend::exact());
    CHECK(o.amplitude(5).real() == doctest::Approx(-0.395008679971842).epsilon(1e-11));
    CHECK(o.amplitude(5).imag() == doctest::Approx(-0.363396415523232).epsilon(1e-11));
    CHECK(o.amplitude(3).real() == doctest::Approx(-0.307520504878855).epsilon(1e-11));
    CHECK(o.amplitude(3).imag() == doctest::Approx(0.598179548524416).epsilon(1e-11));
  }
}

TEST_CASE("amplitudes agree with the matrix exponential and are conjugate symmetric") {
  const Fixture f(3, 2.0);
  const PhaseOracle o(f.h, f.hf, f.tau, EvolutionBackend::exact());
  const MatrixXc u = (Complex(0.0, -f.tau) * f.h.dense()).exp();
  VectorXc v = f.hf.amplitudes();
  for (long j = 0; j <= 12; ++j) {
    CHECK(std::abs(o.amplitude(j) - f.hf.amplitudes().dot(v)) < 1e-12);
    CHECK(o.amplitude(-j) == std::conj(o.amplitude(j)));
    CHECK(std::abs(o.amplitude(j)) <= 1.0 + 1e-12);
    v = u * v;
  }
  const VectorXc ev = evolve(f.hf, f.h, 2.5, EvolutionBackend::exact());
  const VectorXc ref = (Complex(0.0, -2.5) * f.h.dense()).exp() * f.hf.amplitudes();
  CHECK((ev - ref).norm() < 1e-12);
}

TEST_CASE("second-order product formula equals the symmetric split") {
  const Fixture f(2);
  const Real t = 0.37;
  const TrotterPropagator p(f.terms, 2, 1);
  const MatrixXc a = f.terms[0].dense(), b = f.terms[1].dense();
  const MatrixXc half_a = (Complex(0.0, -t / 2) * a).exp();
  const MatrixXc ref = half_a * (Complex(0.0, -t) * b).exp() * half_a;
  CHECK((p.unitary(t) - ref).cwiseAbs().maxCoeff() < 1e-12);

  const MatrixXc u = TrotterPropagator(f.terms, 4, 3).unitary(0.9);
  CHECK((u.adjoint() * u - MatrixXc::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() < 1e-12);
  // Symmetric formula: S(-t) = S(t)^{-1}.
  CHECK((p.unitary(-t) * p.unitary(t) - MatrixXc::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("restricted Trotter propagation matches the unrestricted one") {
  const Fixture f(3, 3.0);
  const TrotterPropagator full(f.terms, 2, 4);
  const TrotterPropagator part(f.terms, 2, 4, &f.hf);
  CHECK((full.apply(f.hf.amplitudes(), 1.3) - part.apply(f.hf.amplitudes(), 1.3)).norm() < 1e-12);
}

TEST_CASE("Trotter error scales as r^-p") {
  const Fixture f(4);
  const PhaseOracle exact(f.h, f.hf, f.tau, EvolutionBackend::exact());
  const long j = 8;
  for (const int order : {2, 4}) {
    std::vector<Real> rs, errs;
    for (const int r : {2, 4, 8, 16}) {
      const PhaseOracle o(f.h, f.hf, f.tau, EvolutionBackend::trotter(order, r), &f.terms);
      rs.push_back(r);
      errs.push_back(std::abs(o.amplitude(j) - exact.amplitude(j)));
    }
    CHECK(slope(rs, errs) == doctest::Approx(-order).epsilon(0.15));
  }
}

TEST_CASE("Hadamard-test statistics") {
  const Fixture f(2);
  const PhaseOracle o(f.h, f.hf, f.tau, EvolutionBackend::exact());
  Rng rng = make_stream(11, 0);
  const long j = 3;
  const int n = 200000;
  Complex mean = 0.0;
  for (int i = 0; i < n; ++i) mean += sample_z(o, j, rng).z;
  mean /= n;
  const Complex a = o.amplitude(j);
  const Real sx = std::sqrt((1.0 - a.real() * a.real()) / n);
  const Real sy = std::sqrt((1.0 - a.imag() * a.imag()) / n);
  CHECK(std::abs(mean.real() - a.real()) < 4.0 * sx);
  CHECK(std::abs(mean.imag() - a.imag()) < 4.0 * sy);

  std::set<int> seen;
  for (int i = 0; i < 100; ++i) seen.insert(sample_xy(o, j, Part::kRe, rng));
  CHECK(seen == std::set<int>{-1, 1});
}

TEST_CASE("control-free outcome table") {
  const Complex alpha(0.3, -0.45);
  const auto p = control_free_cells(alpha);
  Real mass_i = 0.0, mass_s = 0.0, ex = 0.0, ey = 0.0;
  for (int b = 0; b < 4; ++b) {
    CHECK(p[b] >= 0.0);
    CHECK(p[4 + b] >= 0.0);
    const Real s = (b == 0 || b == 3) ? 1.0 : -1.0;
    mass_i += p[b];
    mass_s += p[4 + b];
    ex += s * p[b];
    ey += s * p[4 + b];
  }
  CHECK(mass_i == doctest::Approx((1.0 + std::norm(alpha)) / 4.0));
  CHECK(mass_s == doctest::Approx(mass_i));
  CHECK(ex == doctest::Approx(alpha.real() / 2.0));
  CHECK(ey == doctest::Approx(-alpha.imag() / 2.0));
  // |alpha| = 1 fills the all-zero third register completely.
  const auto q = control_free_cells(std::polar(1.0, 0.7));
  CHECK(q[0] + q[1] + q[2] + q[3] == doctest::Approx(0.5));
}

TEST_CASE("control-free estimator is unbiased") {
  const Fixture f(2);
  const PhaseOracle o(f.h, f.hf, f.tau, EvolutionBackend::exact());
  const auto ref = make_control_free_reference(f.h, f.hf, vacuum_state(4), f.h.matrix().coeff(0, 0).real());
  CHECK(ref.lambda == doctest::Approx(2.0));
  Rng rng = make_stream(5, 9);
  const long j = -4;
  const int n = 200000;
  Complex mean = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const Complex z = sample_z_control_free(o, j, ref, rng).z_tilde;
    mean += z;
    sq += Complex(z.real() * z.real(), z.imag() * z.imag());
  }
  mean /= n;
  sq /= n;
  const Complex a = o.amplitude(j);
  CHECK(std::abs(mean.real() - a.real()) < 4.0 * std::sqrt(sq.real() / n));
  CHECK(std::abs(mean.imag() - a.imag()) < 4.0 * std::sqrt(sq.imag() / n));
}

TEST_CASE("control-free reference validation") {
  const Fixture f(2);
  // The initial state itself overlaps.
  const auto d = spectral_decompose(f.h, default_degeneracy_tol(f.h), &f.hf);
  const StateVector ground = StateVector::normalized(d.group_basis(0).col(0));
  CHECK_THROWS_AS(make_control_free_reference(f.h, f.hf, ground, d.eigenvalues()[0]), InvalidArgument);
  // Wrong eigenvalue.
  CHECK_THROWS_AS(make_control_free_reference(f.h, f.hf, vacuum_state(4), 1.0), InvalidArgument);
  // Not an eigenvector.
  CHECK_THROWS_AS(make_control_free_reference(f.h, vacuum_state(4), StateVector::basis(16, 1), 0.0),
                  InvalidArgument);
}

TEST_CASE("oracle cache is safe under concurrent readers") {
  const Fixture f(4);
  const PhaseOracle shared(f.h, f.hf, f.tau, EvolutionBackend::trotter(2, 3), &f.terms);
  const PhaseOracle serial(f.h, f.hf, f.tau, EvolutionBackend::trotter(2, 3), &f.terms);
  std::vector<std::vector<Complex>> got(4);
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < 4; ++w) {
      pool.emplace_back([&, w] {
        for (long j = 60; j >= -60; --j) got[w].push_back(shared.amplitude((j * (w + 1)) % 61));
      });
    }
  }
  for (int w = 0; w < 4; ++w) {
    std::size_t i = 0;
    for (long j = 60; j >= -60; --j) CHECK(got[w][i++] == serial.amplitude((j * (w + 1)) % 61));
  }
}

TEST_CASE("Trotter step count") {
  CHECK(trotter_steps_required(100, 0.5, 0.0, 0.1, 2) == 1);
  const long r = trotter_steps_required(1000, 0.1, 4.0, 0.5, 2, 3.0);
  CHECK(r == static_cast<long>(std::ceil(3.0 * std::sqrt(1000.0 / 0.1 * 4.0) * std::pow(0.5, 1.5))));
  CHECK_THROWS_AS(trotter_steps_required(10, 0.1, 1.0, 0.1, 3), InvalidArgument);
}

TEST_CASE("backend validation") {
  const Fixture f(2);
  CHECK_THROWS_AS(EvolutionBackend::trotter(3, 1).validate(), InvalidArgument);
  CHECK_THROWS_AS(EvolutionBackend::trotter(2, 0).validate(), InvalidArgument);
  CHECK_THROWS_AS(PhaseOracle(f.h, f.hf, f.tau, EvolutionBackend::trotter(2, 1)), InvalidArgument);
  CHECK_THROWS_AS(PhaseOracle(f.h, f.hf, 0.0, EvolutionBackend::exact()), InvalidArgument);
  CHECK_THROWS_AS(evolve(f.hf, f.h, 1.0, EvolutionBackend::trotter(2, 1)), InvalidArgument);
}

TEST_CASE("oracle built from a shared decomposition") {
  const Fixture f(3, 3.0);
  const auto d = spectral_decompose(f.h, default_degeneracy_tol(f.h), &f.hf);
  const PhaseOracle own(f.h, f.hf, f.tau, EvolutionBackend::exact());
  const PhaseOracle shared(f.h, d, f.hf, f.tau, EvolutionBackend::exact());
  for (const long j : {0L, 1L, -5L, 40L}) CHECK(std::abs(own.amplitude(j) - shared.amplitude(j)) < 1e-12);
  const Fixture other(2);
  CHECK_THROWS_AS(PhaseOracle(other.h, d, other.hf, other.tau, EvolutionBackend::exact()), InvalidArgument);
}
