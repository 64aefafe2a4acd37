#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>

namespace hlgse::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!known) fail(where, "unknown key '" + key + "'");
  }
}

Real as_real(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  const Real x = v.get<Real>();
  if (!std::isfinite(x)) fail(where, "must be finite");
  return x;
}

long long as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(where, "expected an integer");
  return v.get<long long>();
}

std::uint64_t as_seed(const json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
  fail(where, "expected a non-negative integer");
}

int as_small_int(const json& v, const std::string& where, long long lo, long long hi) {
  const long long x = as_int(v, where);
  if (x < lo || x > hi) fail(where, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(x);
}

Real positive(const json& v, const std::string& where) {
  const Real x = as_real(v, where);
  if (!(x > 0.0)) fail(where, "must be positive");
  return x;
}

std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

std::vector<Real> real_list(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array");
  std::vector<Real> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_real(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

ModelConfig parse_model(const json& m) {
  ModelConfig out;
  const std::string kind = m.contains("kind") ? as_string(m["kind"], "model.kind") : "hubbard";
  if (kind == "hubbard") {
    check_keys(m, "model", {"kind", "sites", "hopping", "interaction", "boundary", "n_up", "n_down"});
    auto& h = out.hubbard;
    if (m.contains("sites")) h.sites = as_small_int(m["sites"], "model.sites", 2, 10);
    h.n_up = h.sites / 2;
    h.n_down = h.sites - h.n_up;
    if (m.contains("hopping")) h.hopping = as_real(m["hopping"], "model.hopping");
    if (m.contains("interaction")) h.interaction = as_real(m["interaction"], "model.interaction");
    if (m.contains("boundary")) {
      const auto b = as_string(m["boundary"], "model.boundary");
      if (b == "open") h.boundary = Boundary::kOpen;
      else if (b == "periodic") h.boundary = Boundary::kPeriodic;
      else fail("model.boundary", "expected 'open' or 'periodic'");
    }
    if (m.contains("n_up")) h.n_up = as_small_int(m["n_up"], "model.n_up", 0, h.sites);
    if (m.contains("n_down")) h.n_down = as_small_int(m["n_down"], "model.n_down", 0, h.sites);
    try {
      h.validate();
    } catch (const InvalidArgument& e) {
      fail("model", e.what());
    }
  } else if (kind == "diagonal") {
    check_keys(m, "model", {"kind", "energies"});
    out.kind = ModelKind::kDiagonal;
    if (!m.contains("energies")) fail("model", "diagonal model needs 'energies'");
    out.energies = real_list(m["energies"], "model.energies");
    if (out.energies.empty() || out.energies.size() > (std::size_t{1} << 20)) {
      fail("model.energies", "needs between 1 and 2^20 entries");
    }
  } else {
    fail("model.kind", "expected 'hubbard' or 'diagonal'");
  }
  return out;
}

StateConfig parse_state(const json& s, const ModelConfig& model) {
  check_keys(s, "state", {"kind", "p0", "weights"});
  StateConfig out;
  const std::string kind = s.contains("kind") ? as_string(s["kind"], "state.kind")
                                              : (model.kind == ModelKind::kDiagonal ? "weights" : "hartree-fock");
  if (kind == "hartree-fock") out.kind = StateKind::kHartreeFock;
  else if (kind == "ground") out.kind = StateKind::kGround;
  else if (kind == "tuned") out.kind = StateKind::kTuned;
  else if (kind == "weights") out.kind = StateKind::kWeights;
  else fail("state.kind", "expected 'hartree-fock', 'ground', 'tuned' or 'weights'");

  if (out.kind == StateKind::kTuned) {
    if (!s.contains("p0")) fail("state", "tuned state needs 'p0'");
    out.p0 = as_real(s["p0"], "state.p0");
    if (!(out.p0 > 0.0 && out.p0 <= 1.0)) fail("state.p0", "must lie in (0, 1]");
  } else if (s.contains("p0")) {
    fail("state.p0", "only valid for the tuned state");
  }
  if (out.kind == StateKind::kWeights) {
    if (model.kind != ModelKind::kDiagonal) fail("state.kind", "'weights' needs the diagonal model");
    if (!s.contains("weights")) fail("state", "needs 'weights'");
    out.weights = real_list(s["weights"], "state.weights");
    if (out.weights.size() != model.energies.size()) fail("state.weights", "must match model.energies in length");
    Real total = 0.0;
    for (const Real w : out.weights) {
      if (w < 0.0) fail("state.weights", "must be non-negative");
      total += w;
    }
    if (!(total > 0.0)) fail("state.weights", "must not all vanish");
  } else {
    if (s.contains("weights")) fail("state.weights", "only valid for the 'weights' state");
    if (model.kind == ModelKind::kDiagonal) fail("state.kind", "the diagonal model takes a 'weights' state");
  }
  return out;
}

EvolutionBackend parse_backend(const json& b) {
  check_keys(b, "algorithm.backend", {"kind", "order", "steps"});
  EvolutionBackend out;
  const std::string kind = b.contains("kind") ? as_string(b["kind"], "algorithm.backend.kind") : "exact";
  if (kind == "exact") {
    if (b.contains("order") || b.contains("steps")) fail("algorithm.backend", "order/steps need kind 'trotter'");
    return out;
  }
  if (kind != "trotter") fail("algorithm.backend.kind", "expected 'exact' or 'trotter'");
  out.kind = EvolutionBackend::Kind::kTrotter;
  if (b.contains("order")) out.order = as_small_int(b["order"], "algorithm.backend.order", 2, 12);
  if (b.contains("steps")) out.steps = as_small_int(b["steps"], "algorithm.backend.steps", 1, 1 << 20);
  try {
    out.validate();
  } catch (const InvalidArgument& e) {
    fail("algorithm.backend", e.what());
  }
  return out;
}

AlgorithmConfig parse_algorithm(const json& a) {
  check_keys(a, "algorithm",
             {"epsilon", "delta", "eta", "vartheta", "degree_policy", "degree", "samples", "backend", "tau",
              "norm_bound", "sample_constant", "vote_constant", "control_free", "grid_points", "cost_methods",
              "c_trotter"});
  AlgorithmConfig out;
  if (a.contains("epsilon")) out.epsilon = positive(a["epsilon"], "algorithm.epsilon");
  if (a.contains("delta")) {
    out.delta = positive(a["delta"], "algorithm.delta");
    if (!(*out.delta < kPi / 6.0)) fail("algorithm.delta", "must be below pi/6");
  }
  if (out.epsilon && out.delta) fail("algorithm", "give either 'epsilon' or 'delta', not both");
  if (a.contains("eta")) {
    const auto& e = a["eta"];
    if (e.is_string()) {
      if (e.get<std::string>() != "measured") fail("algorithm.eta", "expected a number or \"measured\"");
    } else {
      out.eta = as_real(e, "algorithm.eta");
      if (!(*out.eta > 0.0 && *out.eta <= 1.0)) fail("algorithm.eta", "must lie in (0, 1]");
    }
  }
  if (a.contains("vartheta")) {
    out.vartheta = as_real(a["vartheta"], "algorithm.vartheta");
    if (!(out.vartheta > 0.0 && out.vartheta < 1.0)) fail("algorithm.vartheta", "must lie in (0, 1)");
  }
  if (a.contains("degree_policy")) {
    const auto p = as_string(a["degree_policy"], "algorithm.degree_policy");
    if (p == "certified") out.degree_policy = DegreePolicy::kCertified;
    else if (p == "heuristic") out.degree_policy = DegreePolicy::kHeuristic;
    else fail("algorithm.degree_policy", "expected 'certified' or 'heuristic'");
  }
  if (a.contains("degree")) out.degree = as_small_int(a["degree"], "algorithm.degree", 1, kMaxCertifiedDegree);
  if (a.contains("samples")) {
    const long long n = as_int(a["samples"], "algorithm.samples");
    if (n < 1) fail("algorithm.samples", "must be at least 1");
    out.samples = static_cast<long>(n);
  }
  if (a.contains("backend")) out.backend = parse_backend(a["backend"]);
  if (a.contains("tau")) {
    out.tau = positive(a["tau"], "algorithm.tau");
  }
  if (a.contains("norm_bound")) out.norm_bound = positive(a["norm_bound"], "algorithm.norm_bound");
  if (out.tau && out.norm_bound) fail("algorithm", "give either 'tau' or 'norm_bound', not both");
  if (a.contains("sample_constant")) out.sample_constant = positive(a["sample_constant"], "algorithm.sample_constant");
  if (a.contains("vote_constant")) out.vote_constant = positive(a["vote_constant"], "algorithm.vote_constant");
  if (a.contains("control_free")) {
    if (!a["control_free"].is_boolean()) fail("algorithm.control_free", "expected a boolean");
    out.control_free = a["control_free"].get<bool>();
  }
  if (a.contains("grid_points")) {
    const long long g = as_int(a["grid_points"], "algorithm.grid_points");
    if (g < 0 || g == 1) fail("algorithm.grid_points", "must be 0 (auto) or at least 2");
    out.grid_points = static_cast<Index>(g);
  }
  if (a.contains("cost_methods")) {
    const auto& list = a["cost_methods"];
    if (!list.is_array()) fail("algorithm.cost_methods", "expected an array");
    for (const auto& m : list) {
      try {
        out.cost_methods.push_back(parse_cost_method(as_string(m, "algorithm.cost_methods")));
      } catch (const InvalidArgument& e) {
        fail("algorithm.cost_methods", e.what());
      }
    }
  }
  if (a.contains("c_trotter")) {
    out.c_trotter = as_real(a["c_trotter"], "algorithm.c_trotter");
    if (out.c_trotter < 0.0) fail("algorithm.c_trotter", "must be non-negative");
  }
  return out;
}

SweepConfig parse_sweep(const json& s) {
  check_keys(s, "sweep", {"delta", "seeds", "p0", "trials", "fixed_steps", "tolerance"});
  SweepConfig out;
  if (s.contains("delta")) {
    out.delta = real_list(s["delta"], "sweep.delta");
    for (const Real d : out.delta) {
      if (!(d > 0.0 && d < kPi / 6.0)) fail("sweep.delta", "entries must lie in (0, pi/6)");
    }
  }
  if (s.contains("seeds")) {
    const auto& list = s["seeds"];
    if (!list.is_array()) fail("sweep.seeds", "expected an array");
    for (const auto& v : list) out.seeds.push_back(as_seed(v, "sweep.seeds"));
  }
  if (s.contains("p0")) {
    out.p0 = real_list(s["p0"], "sweep.p0");
    for (const Real p : out.p0) {
      if (!(p > 0.0 && p <= 1.0)) fail("sweep.p0", "entries must lie in (0, 1]");
    }
  }
  if (s.contains("trials")) out.trials = as_small_int(s["trials"], "sweep.trials", 1, 1 << 24);
  if (s.contains("fixed_steps")) out.fixed_steps = as_small_int(s["fixed_steps"], "sweep.fixed_steps", 2, 1 << 24);
  if (s.contains("tolerance")) out.tolerance = positive(s["tolerance"], "sweep.tolerance");
  return out;
}

OutputConfig parse_output(const json& o) {
  check_keys(o, "output", {"directory", "points"});
  OutputConfig out;
  if (o.contains("directory")) out.directory = as_string(o["directory"], "output.directory");
  if (o.contains("points")) out.points = as_small_int(o["points"], "output.points", 2, 1 << 24);
  return out;
}

json number_or_null(const std::optional<Real>& v) { return v ? json(*v) : json(nullptr); }

// A null value means "use the default", so resolved configs parse back.
json drop_nulls(const json& node) {
  if (!node.is_object()) return node;
  json out = json::object();
  for (const auto& [key, value] : node.items()) {
    if (!value.is_null()) out[key] = drop_nulls(value);
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(const json& input) {
  const json doc = drop_nulls(input);
  check_keys(doc, "config", {"model", "state", "algorithm", "sweep", "output", "seed", "threads"});
  ExperimentConfig c;
  if (doc.contains("model")) c.model = parse_model(doc["model"]);
  c.state = parse_state(doc.contains("state") ? doc["state"] : json::object(), c.model);
  if (doc.contains("algorithm")) c.algorithm = parse_algorithm(doc["algorithm"]);
  if (doc.contains("sweep")) c.sweep = parse_sweep(doc["sweep"]);
  if (doc.contains("output")) c.output = parse_output(doc["output"]);
  if (doc.contains("seed")) c.seed = as_seed(doc["seed"], "seed");
  if (doc.contains("threads")) c.threads = as_small_int(doc["threads"], "threads", 1, 1024);
  if (c.algorithm.control_free && c.model.kind != ModelKind::kHubbard) {
    fail("algorithm.control_free", "needs the Hubbard model (the vacuum is the reference state)");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

json resolved(const ExperimentConfig& c) {
  json model;
  if (c.model.kind == ModelKind::kHubbard) {
    const auto& h = c.model.hubbard;
    model = {{"kind", "hubbard"},
             {"sites", h.sites},
             {"hopping", h.hopping},
             {"interaction", h.interaction},
             {"boundary", h.boundary == Boundary::kOpen ? "open" : "periodic"},
             {"n_up", h.n_up},
             {"n_down", h.n_down}};
  } else {
    model = {{"kind", "diagonal"}, {"energies", c.model.energies}};
  }

  json state;
  switch (c.state.kind) {
    case StateKind::kHartreeFock: state = {{"kind", "hartree-fock"}}; break;
    case StateKind::kGround: state = {{"kind", "ground"}}; break;
    case StateKind::kTuned: state = {{"kind", "tuned"}, {"p0", c.state.p0}}; break;
    case StateKind::kWeights: state = {{"kind", "weights"}, {"weights", c.state.weights}}; break;
  }

  const auto& a = c.algorithm;
  json backend = {{"kind", a.backend.kind == EvolutionBackend::Kind::kExact ? "exact" : "trotter"}};
  if (a.backend.kind == EvolutionBackend::Kind::kTrotter) {
    backend["order"] = a.backend.order;
    backend["steps"] = a.backend.steps;
  }
  json methods = json::array();
  for (const auto m : a.cost_methods) methods.push_back(to_string(m));
  json algorithm = {{"epsilon", number_or_null(a.epsilon)},
                    {"delta", number_or_null(a.delta)},
                    {"eta", a.eta ? json(*a.eta) : json("measured")},
                    {"vartheta", a.vartheta},
                    {"degree_policy", a.degree_policy == DegreePolicy::kCertified ? "certified" : "heuristic"},
                    {"degree", a.degree ? json(*a.degree) : json(nullptr)},
                    {"samples", a.samples ? json(*a.samples) : json(nullptr)},
                    {"backend", backend},
                    {"tau", number_or_null(a.tau)},
                    {"norm_bound", number_or_null(a.norm_bound)},
                    {"sample_constant", a.sample_constant},
                    {"vote_constant", a.vote_constant},
                    {"control_free", a.control_free},
                    {"grid_points", a.grid_points},
                    {"cost_methods", methods},
                    {"c_trotter", a.c_trotter}};

  const auto& s = c.sweep;
  json sweep = {{"delta", s.delta},     {"seeds", s.seeds},           {"p0", s.p0},
                {"trials", s.trials},   {"fixed_steps", s.fixed_steps}, {"tolerance", s.tolerance}};
  json output = {{"directory", c.output.directory}, {"points", c.output.points}};
  return {{"model", model},   {"state", state},   {"algorithm", algorithm}, {"sweep", sweep},
          {"output", output}, {"seed", c.seed},   {"threads", c.threads}};
}

}  // namespace hlgse::cli
