#include "experiments.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

namespace hlgse::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(Real value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

SparseHermitian diagonal_model(const std::vector<Real>& energies) {
  const Index dim = static_cast<Index>(std::bit_ceil(std::max<std::size_t>(energies.size(), 2)));
  std::vector<SparseHermitian::Entry> entries;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    entries.push_back({static_cast<Index>(i), static_cast<Index>(i), Complex(energies[i], 0.0)});
  }
  return SparseHermitian::from_upper(dim, entries);
}

void flatten(const json& node, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (node.is_object()) {
    for (const auto& [key, value] : node.items()) flatten(value, prefix.empty() ? key : prefix + "." + key, out);
  } else if (node.is_string()) {
    out.emplace_back(prefix, node.get<std::string>());
  } else if (node.is_number_float()) {
    out.emplace_back(prefix, format_number(node.get<Real>()));
  } else {
    out.emplace_back(prefix, node.dump());
  }
}

fs::path prepare_out_dir(const ExperimentConfig& config) {
  fs::path dir(config.output.directory);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  return out;
}

std::vector<std::pair<std::string, std::string>> problem_keys(const Problem& p) {
  return {{"derived.norm_bound", format_number(p.norm_bound)},
          {"derived.tau", format_number(p.tau)},
          {"derived.lambda0", format_number(p.lambda0)},
          {"derived.p0", format_number(p.p0)},
          {"derived.dim", std::to_string(p.h.dim())}};
}

/// Runs task(i) for i in [0, n) on up to `threads` workers.  Each task writes
/// only its own output slot.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& task) {
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n && !failed; i = next++) {
          try {
            task(i);
          } catch (...) {
            if (!failed.exchange(true)) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

const char* kAcdfPlot = R"py(import numpy as np
import matplotlib.pyplot as plt

data = np.genfromtxt("acdf.csv", delimiter=",", names=True, comments="#")
plt.plot(data["x"], data["gbar_re"], lw=0.6, label="G-bar (sampled)")
plt.plot(data["x"], data["acdf"], label="ACDF")
plt.step(data["x"], data["cdf"], where="post", label="CDF")
plt.xlabel("x")
plt.legend()
plt.savefig("acdf.png", dpi=150)
)py";

const char* kSweepPlot = R"py(import numpy as np
import matplotlib.pyplot as plt

data = np.genfromtxt("sweep.csv", delimiter=",", names=True, comments="#")
eps = data["epsilon"]
fig, ax = plt.subplots(1, 2, figsize=(9, 4))
ax[0].loglog(eps, data["mean_total_time"], "o-", label="total evolution time")
ax[0].loglog(eps, data["mean_max_time"], "s-", label="max evolution time")
ax[0].loglog(eps, data["mean_max_time"][0] * eps[0] / eps, "--", color="grey", label="slope -1")
ax[0].set_xlabel("epsilon")
ax[0].legend()
ax[1].loglog(eps, data["mean_error"], "o-", label="mean error")
ax[1].loglog(eps, eps, "--", color="grey", label="epsilon")
ax[1].set_xlabel("epsilon")
ax[1].legend()
fig.tight_layout()
fig.savefig("sweep.png", dpi=150)
)py";

const char* kQpePlot = R"py(import csv
import matplotlib.pyplot as plt

rows = [r for r in csv.DictReader(l for l in open("qpe_compare.csv") if not l.startswith("#"))]
for method in dict.fromkeys(r["method"] for r in rows):
    sel = [r for r in rows if r["method"] == method]
    plt.plot([1 / float(r["p0"]) for r in sel], [float(r["failure_rate"]) for r in sel], "o-", label=method)
plt.xlabel("1 / p0")
plt.ylabel("failure rate")
plt.legend()
plt.savefig("qpe_compare.png", dpi=150)
)py";

void write_text(const fs::path& path, const char* text) {
  auto out = open_output(path);
  out << text;
}

}  // namespace

void write_csv_header(std::ostream& out, const ExperimentConfig& config,
                      const std::vector<std::pair<std::string, std::string>>& extra) {
  std::vector<std::pair<std::string, std::string>> keys;
  flatten(resolved(config), "", keys);
  keys.insert(keys.end(), extra.begin(), extra.end());
  for (const auto& [k, v] : keys) out << "# " << k << '=' << v << '\n';
}

// --- problem setup -------------------------------------------------------------------

Problem build_problem(const ExperimentConfig& config) {
  Problem p;
  StateVector base;
  if (config.model.kind == ModelKind::kHubbard) {
    p.h = build_hubbard(config.model.hubbard);
    p.terms = hubbard_terms(config.model.hubbard);
    base = hartree_fock_state(config.model.hubbard);
  } else {
    p.h = diagonal_model(config.model.energies);
    p.terms = {p.h};
    VectorXc amps = VectorXc::Zero(p.h.dim());
    for (std::size_t i = 0; i < config.state.weights.size(); ++i) {
      amps[static_cast<Index>(i)] = std::sqrt(config.state.weights[i]);
    }
    base = StateVector::normalized(amps);
  }

  p.decomp = spectral_decompose(p.h, default_degeneracy_tol(p.h), &base);
  switch (config.state.kind) {
    case StateKind::kHartreeFock:
    case StateKind::kWeights:
      p.state = base;
      break;
    case StateKind::kGround: {
      const auto w = p.decomp.overlaps(base);
      std::size_t k = 0;
      while (k < w.size() && w[k] < 1e-14) ++k;
      if (k == w.size()) throw InvalidArgument("state has no spectral weight");
      p.state = StateVector::normalized(p.decomp.group_basis(k).col(0));
      break;
    }
    case StateKind::kTuned:
      p.state = tune_ground_overlap(p.decomp, base, config.state.p0);
      break;
  }

  p.norm_bound = config.algorithm.norm_bound ? *config.algorithm.norm_bound : spectral_radius(p.h);
  p.tau = config.algorithm.tau ? *config.algorithm.tau : select_tau(p.norm_bound);
  p.measure = overlap_distribution(p.decomp, p.state, p.tau);

  const auto w = p.decomp.overlaps(p.state);
  std::size_t k = 0;
  while (k < w.size() && w[k] < 1e-14) ++k;
  p.lambda0 = p.decomp.eigenvalues()[k];
  p.p0 = w[k];

  if (config.algorithm.control_free) {
    const StateVector vac = vacuum_state(p.h.qubits());
    const Real lambda_r = p.h.matrix().coeff(0, 0).real();
    p.reference = make_control_free_reference(p.h, p.state, vac, lambda_r);
  }
  return p;
}

Real effective_eta(const ExperimentConfig& config, const Problem& problem) {
  return config.algorithm.eta ? *config.algorithm.eta : problem.p0;
}

Real effective_delta(const ExperimentConfig& config, const Problem& problem) {
  const auto& a = config.algorithm;
  if (a.delta) return *a.delta;
  if (a.epsilon) return problem.tau * *a.epsilon;
  throw ConfigError("algorithm: needs 'epsilon' or 'delta'");
}

// --- acdf ----------------------------------------------------------------------------

AcdfResult run_acdf(const ExperimentConfig& config, const Problem& problem) {
  const auto& a = config.algorithm;
  AcdfResult r;
  r.delta = effective_delta(config, problem);
  r.eta = effective_eta(config, problem);
  r.d = a.degree ? *a.degree : heuristic_degree(r.delta);
  const FourierFilter filter = build_filter(r.d, r.delta);
  r.samples = a.samples ? *a.samples : required_samples(r.eta, filter, a.sample_constant);

  const PhaseOracle oracle(problem.h, problem.decomp, problem.state, problem.tau, a.backend, &problem.terms);
  const SampleBatch batch = generate_batch(oracle, filter, static_cast<std::size_t>(r.samples), config.seed,
                                           config.threads, problem.reference ? &*problem.reference : nullptr);

  const Index n = config.output.points;
  std::vector<Real> xs(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    xs[static_cast<std::size_t>(i)] = -kPi / 3.0 + (2.0 * kPi / 3.0) * static_cast<Real>(i) / static_cast<Real>(n - 1);
  }
  r.rows = acdf_trace(xs, batch, filter, problem.measure);
  try {
    r.crossing = heuristic_estimate(batch, filter, r.eta, 1.0, a.grid_points);
  } catch (const NoCrossing&) {
    r.crossing.reset();
  }
  return r;
}

int cmd_acdf(const ExperimentConfig& config, std::ostream& log) {
  const Problem problem = build_problem(config);
  const AcdfResult r = run_acdf(config, problem);
  const fs::path dir = prepare_out_dir(config);

  auto keys = problem_keys(problem);
  keys.emplace_back("derived.d", std::to_string(r.d));
  keys.emplace_back("derived.delta", format_number(r.delta));
  keys.emplace_back("derived.eta", format_number(r.eta));
  keys.emplace_back("derived.samples", std::to_string(r.samples));
  keys.emplace_back("derived.crossing", r.crossing ? format_number(*r.crossing) : "none");

  auto out = open_output(dir / "acdf.csv");
  write_csv_header(out, config, keys);
  out << "x,gbar_re,gbar_im,acdf,cdf\n";
  for (const auto& row : r.rows) {
    out << format_number(row.x) << ',' << format_number(row.gbar.real()) << ',' << format_number(row.gbar.imag())
        << ',' << format_number(row.acdf) << ',' << format_number(row.cdf) << '\n';
  }
  write_text(dir / "plot_acdf.py", kAcdfPlot);

  log << "d=" << r.d << " delta=" << format_number(r.delta) << " samples=" << r.samples << '\n'
      << "tau*lambda0=" << format_number(problem.tau * problem.lambda0) << '\n'
      << "crossing=" << (r.crossing ? format_number(*r.crossing) : "none") << '\n'
      << "wrote " << (dir / "acdf.csv").string() << '\n';
  return kExitOk;
}

// --- estimate ----------------------------------------------------------------------------

int cmd_estimate(const ExperimentConfig& config, std::ostream& log) {
  const auto& a = config.algorithm;
  if (a.control_free) throw ConfigError("algorithm.control_free: not supported by 'estimate'");
  const Problem problem = build_problem(config);
  const Real epsilon = a.epsilon ? *a.epsilon : effective_delta(config, problem) / problem.tau;

  EstimateOptions options;
  options.tau = problem.tau;
  options.policy = a.degree_policy;
  options.plan.sample_constant = a.sample_constant;
  options.plan.vote_constant = a.vote_constant;
  options.plan.degree = a.degree;
  options.threads = config.threads;
  options.terms = &problem.terms;

  const EstimateReport report = estimate_ground_energy(problem.h, problem.state, epsilon,
                                                       effective_eta(config, problem), a.vartheta, a.backend,
                                                       config.seed, options);
  const Real error = std::abs(report.lambda_tilde - problem.lambda0);

  const fs::path dir = prepare_out_dir(config);
  {
    auto out = open_output(dir / "report.txt");
    write_report(out, report);
    out << "lambda0=" << format_number(problem.lambda0) << '\n'
        << "abs_error=" << format_number(error) << '\n'
        << "within_epsilon=" << (error <= epsilon ? "true" : "false") << '\n';
  }
  {
    auto out = open_output(dir / "search.csv");
    auto keys = problem_keys(problem);
    keys.emplace_back("derived.epsilon", format_number(epsilon));
    write_csv_header(out, config, keys);
    out << "step,x0,x1,x,bit,votes\n";
    for (std::size_t i = 0; i < report.trace.steps.size(); ++i) {
      const auto& s = report.trace.steps[i];
      out << i << ',' << format_number(s.x0) << ',' << format_number(s.x1) << ',' << format_number(s.x) << ','
          << s.bit << ',' << s.votes << '\n';
    }
  }
  write_report(log, report);
  log << "lambda0=" << format_number(problem.lambda0) << '\n'
      << "abs_error=" << format_number(error) << '\n'
      << "wall_seconds=" << format_number(report.wall_seconds) << '\n';
  return kExitOk;
}

// --- sweep -------------------------------------------------------------------------------

Real loglog_slope(const std::vector<Real>& x, const std::vector<Real>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("slope fit needs at least two points");
  Real mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidArgument("log-log fit needs positive data");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<Real>(x.size());
  my /= static_cast<Real>(x.size());
  Real sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Real dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw InvalidArgument("slope fit needs distinct x values");
  return sxy / sxx;
}

SweepResult run_sweep(const ExperimentConfig& config, const Problem& problem) {
  const auto& a = config.algorithm;
  const auto& s = config.sweep;
  if (s.delta.empty()) throw ConfigError("sweep.delta: list is empty");
  const std::vector<std::uint64_t> seeds = s.seeds.empty() ? std::vector<std::uint64_t>{config.seed} : s.seeds;
  const long samples = a.samples ? *a.samples : kDefaultSweepSamples;
  const Real eta = effective_eta(config, problem);

  std::vector<FourierFilter> filters;
  int max_d = 0;
  for (const Real delta : s.delta) {
    filters.push_back(build_filter(a.degree ? *a.degree : heuristic_degree(delta), delta));
    max_d = std::max(max_d, filters.back().degree());
  }
  const PhaseOracle oracle(problem.h, problem.decomp, problem.state, problem.tau, a.backend, &problem.terms);
  oracle.prepare(max_d);

  SweepResult result;
  result.runs.resize(s.delta.size() * seeds.size());
  parallel_for(result.runs.size(), config.threads, [&](std::size_t i) {
    const std::size_t pi = i / seeds.size();
    SweepRun& run = result.runs[i];
    run.delta = s.delta[pi];
    run.seed = seeds[i % seeds.size()];
    const SampleBatch batch = generate_batch(oracle, filters[pi], static_cast<std::size_t>(samples), run.seed, 1,
                                             problem.reference ? &*problem.reference : nullptr);
    long sum_abs = 0, max_abs = 0;
    for (const auto& r : batch.records) {
      sum_abs += std::abs(r.j);
      max_abs = std::max(max_abs, std::abs(r.j));
    }
    run.total_time = problem.tau * static_cast<Real>(sum_abs);
    run.max_time = problem.tau * static_cast<Real>(max_abs);
    try {
      run.estimate = heuristic_estimate(batch, filters[pi], eta, problem.tau, a.grid_points);
      run.crossed = true;
      run.error = std::abs(run.estimate - problem.lambda0);
    } catch (const NoCrossing&) {
      run.estimate = std::numeric_limits<Real>::quiet_NaN();
      run.error = (2.0 * kPi / 3.0) / problem.tau;
    }
  });

  std::vector<bool> seed_ok(seeds.size(), true);
  for (std::size_t pi = 0; pi < s.delta.size(); ++pi) {
    SweepPoint pt;
    pt.delta = s.delta[pi];
    pt.epsilon = pt.delta / problem.tau;
    pt.d = filters[pi].degree();
    pt.samples = samples;
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      const SweepRun& run = result.runs[pi * seeds.size() + k];
      pt.mean_error += run.error;
      pt.mean_total_time += run.total_time;
      pt.mean_max_time += run.max_time;
      if (run.error <= pt.epsilon) {
        pt.within_fraction += 1.0;
      } else {
        seed_ok[k] = false;
      }
    }
    const auto n = static_cast<Real>(seeds.size());
    pt.mean_error /= n;
    pt.mean_total_time /= n;
    pt.mean_max_time /= n;
    pt.within_fraction /= n;
    result.points.push_back(pt);
  }
  result.seed_pass_fraction =
      static_cast<Real>(std::count(seed_ok.begin(), seed_ok.end(), true)) / static_cast<Real>(seeds.size());

  std::vector<Real> eps, total, maxt;
  for (const auto& pt : result.points) {
    eps.push_back(pt.epsilon);
    total.push_back(pt.mean_total_time);
    maxt.push_back(pt.mean_max_time);
  }
  const bool distinct = std::adjacent_find(eps.begin(), eps.end(), std::not_equal_to<>()) != eps.end();
  if (result.points.size() >= 2 && distinct) {
    result.slope_total = loglog_slope(eps, total);
    result.slope_max = loglog_slope(eps, maxt);
  }
  return result;
}

int cmd_sweep(const ExperimentConfig& config, std::ostream& log) {
  const Problem problem = build_problem(config);
  const SweepResult r = run_sweep(config, problem);
  const fs::path dir = prepare_out_dir(config);

  auto keys = problem_keys(problem);
  keys.emplace_back("derived.eta", format_number(effective_eta(config, problem)));
  {
    auto out = open_output(dir / "sweep.csv");
    write_csv_header(out, config, keys);
    out << "delta,epsilon,d,samples,mean_error,within_fraction,mean_total_time,mean_max_time\n";
    for (const auto& p : r.points) {
      out << format_number(p.delta) << ',' << format_number(p.epsilon) << ',' << p.d << ',' << p.samples << ','
          << format_number(p.mean_error) << ',' << format_number(p.within_fraction) << ','
          << format_number(p.mean_total_time) << ',' << format_number(p.mean_max_time) << '\n';
    }
    if (r.slope_total) {
      out << "# slope_total=" << format_number(*r.slope_total) << '\n'
          << "# slope_max=" << format_number(*r.slope_max) << '\n';
    } else {
      out << "# fit=none\n";
    }
    out << "# seed_pass_fraction=" << format_number(r.seed_pass_fraction) << '\n';
  }
  {
    auto out = open_output(dir / "sweep_runs.csv");
    write_csv_header(out, config, keys);
    out << "delta,seed,crossed,estimate,error,total_time,max_time\n";
    for (const auto& run : r.runs) {
      out << format_number(run.delta) << ',' << run.seed << ',' << (run.crossed ? 1 : 0) << ','
          << format_number(run.estimate) << ',' << format_number(run.error) << ',' << format_number(run.total_time)
          << ',' << format_number(run.max_time) << '\n';
    }
  }
  write_text(dir / "plot_sweep.py", kSweepPlot);

  for (const auto& p : r.points) {
    log << "epsilon=" << format_number(p.epsilon) << " d=" << p.d << " mean_error=" << format_number(p.mean_error)
        << " total=" << format_number(p.mean_total_time) << " max=" << format_number(p.mean_max_time) << '\n';
  }
  if (r.slope_total) {
    log << "slope_total=" << format_number(*r.slope_total) << " slope_max=" << format_number(*r.slope_max) << '\n';
  }
  log << "seed_pass_fraction=" << format_number(r.seed_pass_fraction) << '\n';
  return kExitOk;
}

// --- qpe-compare -------------------------------------------------------------------------

std::vector<QpeCompareRow> run_qpe_compare(const ExperimentConfig& config, const Problem& problem) {
  const auto& s = config.sweep;
  const std::vector<Real> p0s = s.p0.empty() ? std::vector<Real>{problem.p0} : s.p0;
  QpeComparisonOptions options;
  options.fixed_steps = s.fixed_steps;
  options.trials = s.trials;
  options.tolerance = s.tolerance;

  std::vector<std::vector<MethodStats>> per_point(p0s.size());
  parallel_for(p0s.size(), config.threads, [&](std::size_t i) {
    const StateVector state = tune_ground_overlap(problem.decomp, problem.state, p0s[i]);
    per_point[i] = compare_with_qpe(problem.h, state, problem.tau, problem.lambda0, p0s[i], options,
                                    config.seed + i);
  });
  std::vector<QpeCompareRow> rows;
  for (std::size_t i = 0; i < p0s.size(); ++i) {
    for (const auto& m : per_point[i]) rows.push_back({p0s[i], m});
  }
  return rows;
}

int cmd_qpe_compare(const ExperimentConfig& config, std::ostream& log) {
  const Problem problem = build_problem(config);
  const auto rows = run_qpe_compare(config, problem);
  const fs::path dir = prepare_out_dir(config);
  auto out = open_output(dir / "qpe_compare.csv");
  write_csv_header(out, config, problem_keys(problem));
  out << "p0,method,mean_error,failure_rate\n";
  for (const auto& r : rows) {
    out << format_number(r.p0) << ',' << r.stats.method << ',' << format_number(r.stats.mean_error) << ','
        << format_number(r.stats.failure_rate) << '\n';
    log << "p0=" << format_number(r.p0) << ' ' << r.stats.method
        << " failure_rate=" << format_number(r.stats.failure_rate) << '\n';
  }
  write_text(dir / "plot_qpe_compare.py", kQpePlot);
  return kExitOk;
}

// --- filter-inspect --------------------------------------------------------------------

int cmd_filter_inspect(const ExperimentConfig& config, const FilterInspectOptions& options, std::ostream& log) {
  FourierFilter filter;
  if (options.filter_file) {
    std::ifstream in(*options.filter_file);
    if (!in) throw InvalidArgument("cannot open filter file '" + *options.filter_file + "'");
    filter = read_filter(in);
  } else {
    const std::optional<Real> delta = options.delta ? options.delta : config.algorithm.delta;
    if (!delta) throw ConfigError("filter-inspect: needs --delta or algorithm.delta");
    const std::optional<int> degree = options.degree ? options.degree : config.algorithm.degree;
    filter = build_filter(degree ? *degree : heuristic_degree(*delta), *delta);
  }

  const fs::path dir = prepare_out_dir(config);
  const fs::path file = dir / ("filter_d" + std::to_string(filter.degree()) + ".txt");
  {
    auto out = open_output(file);
    write_filter(out, filter);
  }
  std::ifstream back(file);
  const FourierFilter reloaded = read_filter(back);
  const bool round_trip = reloaded == filter;
  const Real measured = measure_band_error(reloaded);
  const bool eps_ok = std::abs(measured - filter.eps_achieved()) <= 1e-12;
  const Real violation = filter.decay_violation();
  const bool decay_ok = violation <= 1e-12;

  {
    auto out = open_output(dir / "filter_coeffs.csv");
    write_csv_header(out, config,
                     {{"derived.d", std::to_string(filter.degree())},
                      {"derived.delta", format_number(filter.delta())},
                      {"derived.eps_achieved", format_number(filter.eps_achieved())},
                      {"derived.l1_norm", format_number(filter.l1_norm())},
                      {"derived.decay_constant", format_number(filter.decay_constant())}});
    out << "j,re,im,abs,decay_bound\n";
    for (long j = -filter.degree(); j <= filter.degree(); ++j) {
      const Complex c = filter.coeff(j);
      const Real bound = j == 0 ? 0.5 : filter.decay_constant() / (kPi * static_cast<Real>(std::abs(j)));
      out << j << ',' << format_number(c.real()) << ',' << format_number(c.imag()) << ','
          << format_number(std::abs(c)) << ',' << format_number(bound) << '\n';
    }
  }

  log << "d=" << filter.degree() << '\n'
      << "delta=" << format_number(filter.delta()) << '\n'
      << "eps_achieved=" << format_number(filter.eps_achieved()) << '\n'
      << "l1_norm=" << format_number(filter.l1_norm()) << '\n'
      << "decay_constant=" << format_number(filter.decay_constant()) << '\n'
      << "decay_violation=" << format_number(violation) << '\n'
      << "decay_check=" << (decay_ok ? "pass" : "FAIL") << '\n'
      << "reload_check=" << (round_trip && eps_ok ? "pass" : "FAIL") << '\n'
      << "wrote " << file.string() << '\n';
  return decay_ok && round_trip && eps_ok ? kExitOk : kExitCheckFailed;
}

// --- cost-model ----------------------------------------------------------------------------

int cmd_cost_model(const ExperimentConfig& config, std::ostream& log) {
  const auto& a = config.algorithm;
  const Problem problem = build_problem(config);
  const Real epsilon = a.epsilon ? *a.epsilon : effective_delta(config, problem) / problem.tau;
  const Real eta = effective_eta(config, problem);
  std::vector<CostMethod> methods = a.cost_methods;
  if (methods.empty()) {
    methods = {CostMethod::kThisWork, CostMethod::kQpeSemiclassical, CostMethod::kQeea,
               CostMethod::kThisWorkTrotter, CostMethod::kQpeTrotter};
  }
  CostExtras extras;
  extras.order = a.backend.order;
  extras.c_trotter = a.c_trotter;

  const fs::path dir = prepare_out_dir(config);
  auto out = open_output(dir / "cost_model.csv");
  write_csv_header(out, config, problem_keys(problem));
  out << "method,epsilon,eta,tau,max_evolution_time,repetitions,total_evolution_time,circuit_depth,total_runtime\n";
  for (const auto m : methods) {
    const CostReport r = cost_model(m, epsilon, eta, problem.tau, extras);
    write_cost_report(log, r);
    log << '\n';
    out << to_string(m) << ',' << format_number(epsilon) << ',' << format_number(eta) << ','
        << format_number(problem.tau) << ',' << format_number(r.max_evolution_time) << ','
        << format_number(r.repetitions) << ',' << format_number(r.total_evolution_time) << ','
        << (r.has_trotter ? format_number(r.circuit_depth) : "") << ','
        << (r.has_trotter ? format_number(r.total_runtime) : "") << '\n';
  }
  return kExitOk;
}

}  // namespace hlgse::cli
