#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hlgse/baselines.hpp"
#include "hlgse/hamiltonian.hpp"
#include "hlgse/sampler.hpp"
#include "hlgse/search.hpp"

namespace hlgse::cli {

/// Raised for any schema problem in an experiment config.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

enum class ModelKind { kHubbard, kDiagonal };

struct ModelConfig {
  ModelKind kind = ModelKind::kHubbard;
  HubbardSpec hubbard;
  std::vector<Real> energies;  // diagonal toy model
};

enum class StateKind { kHartreeFock, kGround, kTuned, kWeights };

struct StateConfig {
  StateKind kind = StateKind::kHartreeFock;
  Real p0 = 0.0;               // tuned
  std::vector<Real> weights;   // diagonal model: |amplitude|^2 per level
};

struct AlgorithmConfig {
  std::optional<Real> epsilon;
  std::optional<Real> delta;   // tau * epsilon, alternative to epsilon
  std::optional<Real> eta;     // empty: use the measured ground overlap
  Real vartheta = 0.1;
  DegreePolicy degree_policy = DegreePolicy::kCertified;
  std::optional<int> degree;
  std::optional<long> samples;
  EvolutionBackend backend;
  std::optional<Real> tau;
  std::optional<Real> norm_bound;
  Real sample_constant = kDefaultSampleConstant;
  Real vote_constant = 8.0;
  bool control_free = false;
  Index grid_points = 0;
  std::vector<CostMethod> cost_methods;
  Real c_trotter = 1.0;
};

struct SweepConfig {
  std::vector<Real> delta;
  std::vector<std::uint64_t> seeds;
  std::vector<Real> p0;
  long trials = 200;
  long fixed_steps = 300;
  Real tolerance = 0.04;
};

struct OutputConfig {
  std::string directory = "out";
  Index points = 2001;
};

struct ExperimentConfig {
  ModelConfig model;
  StateConfig state;
  AlgorithmConfig algorithm;
  SweepConfig sweep;
  OutputConfig output;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Validates the whole document before returning; unknown keys are errors.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

/// Every field with defaults filled in, in the input schema.
nlohmann::json resolved(const ExperimentConfig& config);

}  // namespace hlgse::cli
