#pragma once

#include <optional>

#include "mflab/observable.hpp"

namespace mflab {

/// Versioned experiment description. Parsing rejects unknown keys so typos in
/// physics parameters cannot pass silently.
struct ExperimentConfig {
  int schema_version = 1;

  int d = 1;
  double L = 2.0 * kPi;
  int M = 8;

  struct Spec {
    std::string kind;
    std::vector<double> params;
  };
  Spec potential{"zero", {}};
  Spec phi0{"gaussian", {0.8}};
  Spec observable{"cosine", {1.0, 1.0}};

  double t = 0.0;
  double dt = 1e-3;

  std::vector<int> n_list{2, 3};
  std::vector<double> lambda_grid{0.1, 0.2};
  std::vector<double> x_grid{0.1, 0.2};
  int dense_cap = 1200;

  int fock_modes = 3;
  int fock_n = 6;
  int fock_n_cut = 6;

  std::optional<double> ldp_beta;
  std::optional<double> ldp_lambda_max;

  std::uint64_t seed = 1;
  int threads = 0;  // 0: one worker per hardware thread
  std::string output_dir;
};

ExperimentConfig parse_config_text(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> errors;
  std::uint64_t nbody_dim = 0;
  std::uint64_t fock_dim = 0;
  double est_runtime_s = 0.0;
  double est_memory_mb = 0.0;
};

/// Dimension caps for the pipeline stages.
inline constexpr std::uint64_t kNbodyPipelineDimCap = 4000;  // MGF path needs basis rotations
inline constexpr std::uint64_t kFockDimCap = 3000;

ValidationReport validate_config(const ExperimentConfig& cfg);

// Builders shared by the pipeline and the CLI subcommands.
PairPotential make_potential(const Lattice& lat, const ExperimentConfig::Spec& spec);
WaveFunction make_phi0(const Lattice& lat, const ExperimentConfig::Spec& spec);
Observable make_observable(const Lattice& lat, const ExperimentConfig::Spec& spec);

}  // namespace mflab
