#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dnp/amplitudes.hpp"
#include "dnp/clusters.hpp"
#include "dnp/engine.hpp"
#include "dnp/model.hpp"
#include "dnp/sequences.hpp"

namespace dnp::config {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inline-system experiment grid (fig2b style): outer product of the two
/// lists; empty lists mean "use the base system as is".
struct GridSpec {
  std::vector<double> a_perp_MHz;
  std::vector<int> n_nuc;
};

struct AmplitudeScanConfig {
  amplitudes::ScanKind kind = amplitudes::ScanKind::TauPol;
  double start = 0.0;
  double stop = 0.0;
  int points = 0;
};

struct ClusterGenConfig {
  clusters::GenerationParams params;
  int count = 0;
};

struct SweepConfig {
  std::vector<double> b0_list_mT;               // empty: single field from cluster params
  std::vector<std::pair<double, int>> n_rep_per_b0;
  std::vector<engine::RunMode> modes;
  double disentangle_theta_e_rad = 3.14159265358979323846;
};

/// How tau_pol is derived when not given explicitly: f_t = f_n (larmor) or
/// f_t = f_p of the first nucleus in the hyperfine-active sector
/// (precession), with tau_pol = 3 / (2 f_t).
enum class ResonantTarget { None, Larmor, Precession };

struct ExperimentConfig {
  std::string name = "experiment";

  // system: exactly one of (inline nuclei) or (cluster generation)
  model::SpinSystem base_system;                // nuclei empty when cluster-sourced
  bool system_from_cluster = false;
  std::optional<ClusterGenConfig> cluster;

  sequences::SequenceSpec sequence;
  ResonantTarget resonant = ResonantTarget::None;

  std::vector<engine::RunMode> modes{engine::RunMode::Coherent};
  std::vector<double> disentangle_theta_e_list; // extra coherent+disentangle runs
  int n_rep = 1000;
  std::uint64_t master_seed = 0;
  int jobs = 0;                                 // 0: hardware default

  std::optional<GridSpec> grid;
  std::optional<AmplitudeScanConfig> scan;
  std::optional<SweepConfig> sweep;

  std::string out_dir = "out";
  bool write_csv = true;
  bool write_json = true;

  std::string canonical_json() const;           // sorted-key dump used for hashing
  std::uint64_t hash() const;
};

/// Parse and validate a config document; throws ConfigError with a
/// field-level message on schema violations.
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

/// Resolve --preset NAME to a committed config path.
std::string preset_path(const std::string& name, const std::string& preset_dir);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace dnp::config
