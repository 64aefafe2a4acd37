#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "config.hpp"
#include "experiments.hpp"

using namespace hlgse;
using namespace hlgse::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hlgse_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig toy_config(const fs::path& out) {
  return parse_config(json{{"model", {{"kind", "diagonal"}, {"energies", {0.3}}}},
                           {"state", {{"weights", {1.0}}}},
                           {"algorithm", {{"delta", 0.05}, {"samples", 4000}, {"tau", 1.0}}},
                           {"output", {{"directory", out.string()}, {"points", 401}}},
                           {"seed", 17}});
}

json dimer_doc(const fs::path& out) {
  return {{"model", {{"sites", 2}, {"interaction", 4.0}}},
          {"algorithm", {{"epsilon", 0.05}, {"eta", 0.8}}},
          {"output", {{"directory", out.string()}}},
          {"seed", 3}};
}

std::vector<std::string> data_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') out.push_back(line);
  }
  return out;
}

int run_cli(const std::string& args) {
  const char* exe = std::getenv("HLGSE_CLI");
  REQUIRE_MESSAGE(exe != nullptr, "HLGSE_CLI is not set");
  const int status = std::system((std::string(exe) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config schema") {
  const json base = dimer_doc("unused");
  CHECK_NOTHROW(parse_config(base));
  const auto c = parse_config(base);
  CHECK(c.model.hubbard.n_up == 1);
  CHECK(c.model.hubbard.n_down == 1);
  CHECK(c.algorithm.eta == 0.8);
  CHECK(c.algorithm.vartheta == 0.1);

  auto with = [&](const std::string& pointer, const json& value) {
    json d = base;
    d[json::json_pointer(pointer)] = value;
    return d;
  };
  CHECK_THROWS_AS(parse_config(with("/bogus", 1)), ConfigError);
  CHECK_THROWS_AS(parse_config(with("/algorithm/epsilom", 0.1)), ConfigError);
  CHECK_THROWS_AS(parse_config(with("/algorithm/backend", json{{"kind", "trotter"}, {"order", 3}})), ConfigError);
  CHECK_THROWS_AS(parse_config(with("/algorithm/delta", 0.01)), ConfigError);  // with epsilon
  CHECK_THROWS_AS(parse_config(with("/algorithm/eta", "guess")), ConfigError);
  CHECK_THROWS_AS(parse_config(with("/model/sites", 2.5)), ConfigError);
  CHECK_THROWS_AS(parse_config(with("/model/sites", 11)), ConfigError);
  CHECK_THROWS_AS(parse_config(with("/state", json{{"kind", "tuned"}})), ConfigError);
  CHECK_THROWS_AS(parse_config(with("/state", json{{"kind", "weights"}, {"weights", {1.0}}})), ConfigError);
  CHECK_THROWS_AS(parse_config(with("/sweep/delta", json{0.01, 1.0})), ConfigError);
  CHECK_THROWS_AS(parse_config(with("/seed", -1)), ConfigError);
  CHECK_THROWS_AS(parse_config(with("/algorithm/cost_methods", json{"qpe"})), ConfigError);
  CHECK_THROWS_AS(parse_config(json::array()), ConfigError);
}

TEST_CASE("resolved config parses back to itself") {
  json doc = dimer_doc("somewhere");
  doc["algorithm"]["backend"] = {{"kind", "trotter"}, {"order", 4}, {"steps", 3}};
  doc["sweep"] = {{"delta", {0.02, 0.01}}, {"seeds", {1, 2}}};
  const json r = resolved(parse_config(doc));
  CHECK(resolved(parse_config(r)) == r);
  CHECK(r["algorithm"]["eta"] == 0.8);
  CHECK(r["algorithm"]["backend"]["order"] == 4);
  CHECK(r["state"]["kind"] == "hartree-fock");
}

TEST_CASE("acdf on a single atom is a step") {
  const fs::path out = scratch("acdf_toy");
  const ExperimentConfig config = toy_config(out);
  const Problem p = build_problem(config);
  CHECK(p.measure.size() == 1);
  CHECK(p.lambda0 == doctest::Approx(0.3));
  const AcdfResult r = run_acdf(config, p);
  CHECK(r.d == 80);
  REQUIRE(r.crossing);
  CHECK(std::abs(*r.crossing - 0.3) <= r.delta);
  for (const auto& row : r.rows) {
    if (row.x < 0.3 - r.delta) CHECK(std::abs(row.acdf) < 0.02);
    if (row.x > 0.3 + r.delta) CHECK(std::abs(row.acdf - 1.0) < 0.02);
    CHECK(row.cdf == (row.x >= 0.3 ? 1.0 : 0.0));
  }

  std::ostringstream log;
  CHECK(cmd_acdf(config, log) == kExitOk);
  const std::string csv = slurp(out / "acdf.csv");
  CHECK(csv.rfind("# ", 0) == 0);
  CHECK(csv.find("# model.kind=diagonal\n") != std::string::npos);
  CHECK(csv.find("# derived.d=80") != std::string::npos);
  CHECK(csv.find("x,gbar_re,gbar_im,acdf,cdf\n") != std::string::npos);
  CHECK(data_lines(csv).size() == 402);
  CHECK(fs::exists(out / "plot_acdf.py"));
}

TEST_CASE("outputs are byte-identical for a fixed seed") {
  const fs::path a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
  ExperimentConfig ca = toy_config(a), cb = toy_config(b), cc = toy_config(c);
  cb.threads = 3;
  cc.seed = 18;
  std::ostringstream log;
  cmd_acdf(ca, log);
  cmd_acdf(cb, log);
  cmd_acdf(cc, log);
  // Only the output directory and thread count lines of the header may differ.
  const auto la = data_lines(slurp(a / "acdf.csv"));
  CHECK(la == data_lines(slurp(b / "acdf.csv")));
  CHECK(la != data_lines(slurp(c / "acdf.csv")));

  ExperimentConfig again = toy_config(a);
  const std::string first = slurp(a / "acdf.csv");
  cmd_acdf(again, log);
  CHECK(slurp(a / "acdf.csv") == first);
}

TEST_CASE("sweep") {
  const fs::path out = scratch("sweep");
  json doc = dimer_doc(out);
  doc["algorithm"] = {{"eta", "measured"}};
  doc["sweep"] = {{"delta", {0.04, 0.02}}, {"seeds", {1, 2, 3}}};
  const ExperimentConfig config = parse_config(doc);
  const Problem p = build_problem(config);
  const SweepResult r = run_sweep(config, p);
  REQUIRE(r.points.size() == 2);
  CHECK(r.runs.size() == 6);
  CHECK(r.points[0].d == 100);
  CHECK(r.points[1].d == 200);
  CHECK(r.points[0].samples == kDefaultSweepSamples);
  CHECK(r.slope_total.has_value());
  CHECK(r.points[1].mean_max_time > r.points[0].mean_max_time);

  std::ostringstream log;
  CHECK(cmd_sweep(config, log) == kExitOk);
  const std::string csv = slurp(out / "sweep.csv");
  CHECK(csv.find("# slope_total=") != std::string::npos);
  CHECK(data_lines(csv).size() == 3);

  SUBCASE("single point has no fit") {
    json one = doc;
    one["sweep"]["delta"] = {0.03};
    const ExperimentConfig c1 = parse_config(one);
    CHECK(cmd_sweep(c1, log) == kExitOk);
    const std::string s1 = slurp(out / "sweep.csv");
    CHECK(s1.find("# fit=none") != std::string::npos);
    CHECK(data_lines(s1).size() == 2);
  }
  SUBCASE("empty sweep is an error") {
    json none = doc;
    none["sweep"]["delta"] = json::array();
    CHECK_THROWS_AS(run_sweep(parse_config(none), p), ConfigError);
  }
}

TEST_CASE("log-log slope") {
  CHECK(loglog_slope({1, 2, 4}, {8, 4, 2}) == doctest::Approx(-1.0));
  CHECK(loglog_slope({1, 10}, {1, 100}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(loglog_slope({1}, {1}), InvalidArgument);
}

TEST_CASE("estimate, cost-model and qpe-compare write their files") {
  const fs::path out = scratch("misc");
  std::ostringstream log;
  json doc = dimer_doc(out);
  CHECK(cmd_estimate(parse_config(doc), log) == kExitOk);
  const std::string report = slurp(out / "report.txt");
  CHECK(report.find("within_epsilon=true") != std::string::npos);
  CHECK(report.find("L=") != std::string::npos);
  CHECK(fs::exists(out / "search.csv"));

  CHECK(cmd_cost_model(parse_config(doc), log) == kExitOk);
  CHECK(data_lines(slurp(out / "cost_model.csv")).size() == 6);

  doc["sweep"] = {{"p0", {0.4, 0.2}}, {"trials", 4}, {"fixed_steps", 40}};
  CHECK(cmd_qpe_compare(parse_config(doc), log) == kExitOk);
  CHECK(data_lines(slurp(out / "qpe_compare.csv")).size() == 7);

  json cf = dimer_doc(out);
  cf["algorithm"]["control_free"] = true;
  CHECK_THROWS_AS(cmd_estimate(parse_config(cf), log), ConfigError);
}

TEST_CASE("filter-inspect") {
  const fs::path out = scratch("inspect");
  const ExperimentConfig config = parse_config(json{{"output", {{"directory", out.string()}}}});
  std::ostringstream log;
  FilterInspectOptions opt;
  opt.delta = 0.01;
  CHECK(cmd_filter_inspect(config, opt, log) == kExitOk);
  CHECK(log.str().find("decay_check=pass") != std::string::npos);
  CHECK(log.str().find("reload_check=pass") != std::string::npos);
  CHECK(fs::exists(out / "filter_d400.txt"));

  // Inflate one high-order symmetric pair past the decay bound.
  std::ifstream in(out / "filter_d400.txt");
  std::ostringstream tampered;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("399 ", 0) == 0) line = "399 0 -0.05";
    if (line.rfind("-399 ", 0) == 0) line = "-399 0 0.05";
    tampered << line << '\n';
  }
  const fs::path bad = out / "tampered.txt";
  std::ofstream(bad) << tampered.str();
  FilterInspectOptions load;
  load.filter_file = bad.string();
  std::ostringstream log2;
  CHECK(cmd_filter_inspect(config, load, log2) == kExitCheckFailed);
  CHECK(log2.str().find("decay_check=FAIL") != std::string::npos);

  FilterInspectOptions missing;
  CHECK_THROWS_AS(cmd_filter_inspect(config, missing, log), ConfigError);
}

TEST_CASE("command-line binary") {
  const fs::path out = scratch("binary");
  const fs::path cfg = out / "config.json";
  std::ofstream(cfg) << dimer_doc(out / "res").dump(2);
  const fs::path bad = out / "bad.json";
  std::ofstream(bad) << R"({"model": {"sites": 2, "colour": "red"}})";

  CHECK(run_cli("filter-inspect " + cfg.string() + " --delta 0.05") == kExitOk);
  CHECK(fs::exists(out / "res" / "filter_d80.txt"));
  CHECK(run_cli("cost-model " + cfg.string() + " --out-dir " + (out / "alt").string()) == kExitOk);
  CHECK(fs::exists(out / "alt" / "cost_model.csv"));
  CHECK(run_cli("estimate " + cfg.string() + " --seed 5 --threads 2") == kExitOk);
  CHECK(slurp(out / "res" / "report.txt").find("seed=5") != std::string::npos);
  CHECK(run_cli("estimate " + bad.string()) == kExitUsage);
  CHECK(run_cli("estimate") != kExitOk);
  CHECK(run_cli("frobnicate " + cfg.string()) != kExitOk);
  fs::remove_all(out.parent_path());
}
