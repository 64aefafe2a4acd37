#include "hlgse/search.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <string>

#include "text_format.hpp"

namespace hlgse {

int search_iterations(Real delta) {
  if (!(delta > 0.0 && delta < kPi / 6.0)) throw InvalidArgument("delta must lie in (0, pi/6)");
  return static_cast<int>(std::ceil(std::log2((kPi - 2.0 * delta) / delta)));
}

EstimationPlan derive_parameters(Real epsilon, Real eta, Real vartheta, Real tau, DegreePolicy policy,
                                 const PlanOptions& options) {
  if (!(epsilon > 0.0) || !(tau > 0.0)) throw InvalidArgument("epsilon and tau must be positive");
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidArgument("eta must lie in (0, 1]");
  if (!(vartheta > 0.0 && vartheta < 1.0)) throw InvalidArgument("vartheta must lie in (0, 1)");
  if (!(options.vote_constant > 0.0)) throw InvalidArgument("vote constant must be positive");
  EstimationConfig c;
  c.epsilon = epsilon;
  c.eta = eta;
  c.vartheta = vartheta;
  c.tau = tau;
  c.policy = policy;
  c.delta = tau * epsilon;
  if (!(c.delta < kPi / 6.0)) {
    throw InvalidArgument("delta = tau * epsilon = " + detail::format_real(c.delta) + " must be below pi/6");
  }
  const Real smearing = 2.0 * c.delta / 3.0;
  if (options.degree) {
    c.d = *options.degree;
  } else if (policy == DegreePolicy::kCertified) {
    c.d = certified_degree(smearing, eta / 8.0);
  } else {
    c.d = heuristic_degree(smearing);
  }
  FourierFilter filter = build_filter(c.d, smearing);
  c.n_s = required_samples(eta, filter, options.sample_constant);
  c.iterations = search_iterations(c.delta);
  c.nu = vartheta / c.iterations;
  c.n_b = static_cast<long>(std::ceil(options.vote_constant * std::log(1.0 / c.nu)));
  c.m = c.n_s * c.n_b;
  return {c, std::move(filter)};
}

CertifyResult certify(Real x, Real eta, const SampleBatch& batch, const FourierFilter& filter, long n_s,
                      long n_b) {
  if (n_s < 1 || n_b < 1) throw InvalidArgument("certify needs n_s, n_b >= 1");
  const auto need = static_cast<std::size_t>(n_s) * static_cast<std::size_t>(n_b);
  if (batch.size() < need) {
    throw InvalidArgument("batch has " + std::to_string(batch.size()) + " records, certify needs " +
                          std::to_string(need));
  }
  CertifyResult out;
  for (long r = 0; r < n_b; ++r) {
    const auto begin = static_cast<std::size_t>(r * n_s);
    if (g_bar(x, batch, filter, begin, begin + static_cast<std::size_t>(n_s)).real() > 0.75 * eta) ++out.votes;
  }
  // c > n_b/2 without rounding: 2c > n_b.
  out.bit = 2 * out.votes > n_b ? 0 : 1;
  return out;
}

Real invert_cdf(Real delta, const CertifyFn& decide, SearchTrace* trace) {
  if (!(delta > 0.0 && delta < kPi / 6.0)) throw InvalidArgument("delta must lie in (0, pi/6)");
  const int max_iterations = search_iterations(delta) + 2;
  Real x0 = -kPi / 3.0;
  Real x1 = kPi / 3.0;
  int iterations = 0;
  while (x1 - x0 > 2.0 * delta) {
    if (++iterations > max_iterations) throw InternalError("binary search exceeded its iteration bound");
    const Real x = 0.5 * (x0 + x1);
    const CertifyResult r = decide(x);
    if (trace != nullptr) trace->steps.push_back({x0, x1, x, r.bit, r.votes});
    if (r.bit == 0) {
      x1 = x + 2.0 * delta / 3.0;
    } else {
      x0 = x - 2.0 * delta / 3.0;
    }
  }
  return 0.5 * (x0 + x1);
}

Real invert_cdf(const EstimationConfig& config, const SampleBatch& batch, const FourierFilter& filter,
                SearchTrace* trace) {
  return invert_cdf(
      config.delta,
      [&](Real x) { return certify(x, config.eta, batch, filter, config.n_s, config.n_b); }, trace);
}

CertifyFn oracle_certify(const AcdfOracle& acdf, Real eta) {
  return [&acdf, eta](Real x) {
    CertifyResult r;
    r.bit = acdf(x) > 0.75 * eta ? 0 : 1;
    return r;
  };
}

EstimateReport estimate_ground_energy(const SparseHermitian& h, const StateVector& state, Real epsilon, Real eta,
                                      Real vartheta, const EvolutionBackend& backend, std::uint64_t seed,
                                      const EstimateOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  Real tau = 0.0;
  if (options.tau) {
    tau = *options.tau;
  } else {
    tau = select_tau(options.norm_bound ? *options.norm_bound : spectral_radius(h));
  }
  const EstimationPlan plan = derive_parameters(epsilon, eta, vartheta, tau, options.policy, options.plan);
  const PhaseOracle oracle(h, state, tau, backend, options.terms);
  const SampleBatch batch =
      generate_batch(oracle, plan.filter, static_cast<std::size_t>(plan.config.m), seed, options.threads);

  EstimateReport report;
  report.config = plan.config;
  report.seed = seed;
  report.x_star = invert_cdf(plan.config, batch, plan.filter, &report.trace);
  report.lambda_tilde = report.x_star / tau;
  long sum_abs = 0;
  for (const auto& r : batch.records) {
    const long a = r.j < 0 ? -r.j : r.j;
    sum_abs += a;
    report.max_abs_j = std::max(report.max_abs_j, a);
  }
  report.total_evolution_time = tau * static_cast<Real>(sum_abs);
  report.max_evolution_time = tau * static_cast<Real>(report.max_abs_j);
  report.wall_seconds = std::chrono::duration<Real>(std::chrono::steady_clock::now() - start).count();
  return report;
}

Real heuristic_estimate(const SampleBatch& batch, const FourierFilter& filter, Real eta, Real tau,
                        Index grid_points) {
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
  if (grid_points == 0) grid_points = 4 * static_cast<Index>(filter.degree());
  if (grid_points < 2) throw InvalidArgument("heuristic grid needs at least two points");
  const GBarPolynomial gbar(batch, filter);
  const Real lo = -kPi / 3.0;
  const Real step = (2.0 * kPi / 3.0) / static_cast<Real>(grid_points - 1);
  for (Index n = 0; n < grid_points; ++n) {
    const Real x = lo + step * static_cast<Real>(n);
    if (gbar(x).real() >= 0.5 * eta) return x / tau;
  }
  throw NoCrossing("G-bar never reaches eta/2 = " + detail::format_real(0.5 * eta) +
                   " on [-pi/3, pi/3]; eta is too large or the batch too small");
}

void write_report(std::ostream& out, const EstimateReport& report) {
  const auto& c = report.config;
  out << "lambda_tilde=" << detail::format_real(report.lambda_tilde) << '\n'
      << "tau=" << detail::format_real(c.tau) << '\n'
      << "d=" << c.d << '\n'
      << "M=" << c.m << '\n'
      << "N_s=" << c.n_s << '\n'
      << "N_b=" << c.n_b << '\n'
      << "L=" << c.iterations << '\n'
      << "total_evolution_time=" << detail::format_real(report.total_evolution_time) << '\n'
      << "max_evolution_time=" << detail::format_real(report.max_evolution_time) << '\n'
      << "seed=" << report.seed << '\n';
}

}  // namespace hlgse
