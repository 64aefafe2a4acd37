#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hlgse/baselines.hpp"

using namespace hlgse;

namespace {

Real fejer_direct(long steps, Real delta) {
  Complex s = 0.0;
  for (long t = 0; t < steps; ++t) s += std::polar(1.0, static_cast<Real>(t) * delta);
  return std::norm(s / static_cast<Real>(steps));
}

HubbardSpec chain(int sites, Real u) {
  HubbardSpec s;
  s.sites = sites;
  s.interaction = u;
  s.n_up = sites / 2;
  s.n_down = sites - sites / 2;
  return s;
}

}  // namespace

TEST_CASE("Fejer kernel") {
  CHECK(fejer_kernel(50, 0.0) == 1.0);
  for (const long t : {2L, 7L, 300L}) {
    for (const Real d : {1e-7, 0.01, 0.3, 2.9, -1.4}) {
      CHECK(fejer_kernel(t, d) == doctest::Approx(fejer_direct(t, d)).epsilon(1e-9));
    }
  }
  CHECK(fejer_kernel(10, 2.0 * kPi / 10.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("QPE outcome law") {
  const SpectralMeasure m({{-0.7, 0.3}, {0.123, 0.7}});
  const auto dist = qpe_distribution(m, 64);
  Real total = 0.0;
  for (const Real p : dist.probabilities) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(dist.phase(0) == doctest::Approx(-kPi));
  CHECK(dist.phase(32) == doctest::Approx(0.0));

  // An atom on the grid is measured exactly.
  const SpectralMeasure on_grid({{2.0 * kPi * 9.0 / 20.0 - kPi, 1.0}});
  const auto exact = qpe_distribution(on_grid, 20);
  CHECK(exact.probabilities[9] == doctest::Approx(1.0));
  Rng rng = make_stream(1, 1);
  CHECK(qpe_min_estimate(exact, 5, 0.5, rng) == doctest::Approx(exact.phase(9) / 0.5));
  CHECK(qpe_failure_probability(exact, 5, exact.phase(9), 0.01) == doctest::Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(qpe_distribution(m, 1), InvalidArgument);
  CHECK_THROWS_AS(qpe_min_estimate(dist, 0, 1.0, rng), InvalidArgument);
}

TEST_CASE("exact QPE failure probability agrees with simulation") {
  const SpectralMeasure m({{-0.785, 0.2}, {-0.4, 0.5}, {0.3, 0.3}});
  const auto dist = qpe_distribution(m, 300);
  const long repeats = 20;
  const Real p = qpe_failure_probability(dist, repeats, -0.785, 0.04);
  Rng rng = make_stream(8, 0);
  const int trials = 20000;
  int fails = 0;
  for (int t = 0; t < trials; ++t) fails += std::abs(qpe_min_estimate(dist, repeats, 1.0, rng) + 0.785) > 0.04;
  const Real sigma = std::sqrt(p * (1.0 - p) / trials);
  CHECK(std::abs(static_cast<Real>(fails) / trials - p) < 4.0 * sigma);
}

TEST_CASE("cost model scalings") {
  for (const auto method : {CostMethod::kThisWork, CostMethod::kQpeSemiclassical, CostMethod::kQeea,
                            CostMethod::kThisWorkTrotter, CostMethod::kQpeTrotter}) {
    CHECK(parse_cost_method(to_string(method)) == method);
  }
  CHECK_THROWS_AS(parse_cost_method("nope"), InvalidArgument);

  const Real e = 1e-3, n = 0.1, tau = 0.2;
  const auto tw = cost_model(CostMethod::kThisWork, e, n, tau);
  const auto qpe = cost_model(CostMethod::kQpeSemiclassical, e, n, tau);
  const auto qeea = cost_model(CostMethod::kQeea, e, n, tau);
  CHECK(tw.max_evolution_time == doctest::Approx(1e3));
  CHECK(tw.total_evolution_time == doctest::Approx(1e5));
  CHECK(qpe.max_evolution_time == doctest::Approx(1e4));
  CHECK(qpe.total_evolution_time == doctest::Approx(tw.total_evolution_time));
  CHECK(qeea.total_evolution_time == doctest::Approx(1e14));
  CHECK_FALSE(tw.has_trotter);

  // Halving epsilon doubles this method's times; halving eta quadruples its total time only.
  const auto tw_e = cost_model(CostMethod::kThisWork, e / 2, n, tau);
  const auto tw_n = cost_model(CostMethod::kThisWork, e, n / 2, tau);
  CHECK(tw_e.max_evolution_time / tw.max_evolution_time == doctest::Approx(2.0));
  CHECK(tw_n.max_evolution_time == tw.max_evolution_time);
  CHECK(tw_n.total_evolution_time / tw.total_evolution_time == doctest::Approx(4.0));
  const auto qpe_n = cost_model(CostMethod::kQpeSemiclassical, e, n / 2, tau);
  CHECK(qpe_n.max_evolution_time / qpe.max_evolution_time == doctest::Approx(2.0));

  CostExtras x;
  x.order = 2;
  x.c_trotter = 9.0;
  const auto twt = cost_model(CostMethod::kThisWorkTrotter, e, n, tau, x);
  const auto qpt = cost_model(CostMethod::kQpeTrotter, e, n, tau, x);
  CHECK(twt.has_trotter);
  CHECK(twt.circuit_depth == doctest::Approx(std::max(1e3 / tau, std::pow(e, -1.5) * std::pow(n, -0.5) * 3.0)));
  CHECK(twt.total_runtime == doctest::Approx(std::max(1e5 / tau, std::pow(e, -1.5) * std::pow(n, -2.5) * 3.0)));
  CHECK(qpt.circuit_depth == doctest::Approx(std::max(1e4 / tau, std::pow(e, -1.5) * std::pow(n, -2.0) * 3.0)));
  CHECK(qpt.total_runtime == doctest::Approx(std::max(1e5 / tau, std::pow(e, -1.5) * std::pow(n, -3.0) * 3.0)));
  // In the Trotter-dominated regime the depth ratio is eta^{-1-1/p}.
  CostExtras big = x;
  big.c_trotter = 1e12;
  const auto a = cost_model(CostMethod::kThisWorkTrotter, e, n, tau, big);
  const auto b = cost_model(CostMethod::kQpeTrotter, e, n, tau, big);
  CHECK(b.circuit_depth / a.circuit_depth == doctest::Approx(std::pow(n, -1.5)));

  std::ostringstream out;
  write_cost_report(out, twt);
  CHECK(out.str().find("method=this-work-trotter") != std::string::npos);
  CHECK(out.str().find("circuit_depth=") != std::string::npos);
  CHECK(out.str().find("certified=false") != std::string::npos);

  CHECK_THROWS_AS(cost_model(CostMethod::kThisWork, 0.0, n, tau), InvalidArgument);
  CostExtras odd;
  odd.order = 3;
  CHECK_THROWS_AS(cost_model(CostMethod::kQpeTrotter, e, n, tau, odd), InvalidArgument);
}

TEST_CASE("fixed-depth comparison") {
  const auto spec = chain(2, 4.0);
  const auto h = build_hubbard(spec);
  const auto hf = hartree_fock_state(spec);
  const Real tau = select_tau(spectral_radius(h));
  QpeComparisonOptions opt;
  opt.trials = 10;
  opt.fixed_steps = 60;
  const auto d = spectral_decompose(h, default_degeneracy_tol(h), &hf);
  const auto rows = compare_with_qpe(h, tune_ground_overlap(d, hf, 0.4), tau, -std::sqrt(8.0), 0.4, opt, 5);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].method == "qpe-fixed");
  CHECK(rows[1].method == "qpe-scaled");
  CHECK(rows[2].method == "this-work");
  // At the reference overlap both QPE variants run the same depth on the same stream.
  CHECK(rows[0].failure_rate == rows[1].failure_rate);
  CHECK(rows[0].mean_error == rows[1].mean_error);
  for (const auto& r : rows) {
    CHECK(r.failure_rate >= 0.0);
    CHECK(r.failure_rate <= 1.0);
  }
  CHECK_THROWS_AS(compare_with_qpe(h, hf, tau, 0.0, 0.0, opt, 1), InvalidArgument);
}
