#pragma once

#include <string>
#include <vector>

#include "dnp/config.hpp"

namespace dnp::experiments {

struct CommandResult {
  std::vector<std::string> written_paths;
  std::string summary;
};

/// simulate: engine runs over the configured modes (plus any disentangle
/// theta list) and the optional inline-system grid.
CommandResult cmd_simulate(const config::ExperimentConfig& cfg);

/// amplitudes: spectrum table over the configured scan.
CommandResult cmd_amplitudes(const config::ExperimentConfig& cfg);

/// cluster-gen: archive of generated cluster configs plus a summary table.
CommandResult cmd_cluster_gen(const config::ExperimentConfig& cfg);

/// sweep: engine runs over (cluster x field x mode) points with a bounded
/// worker pool; per-point JSON results are resumable by point hash, and
/// aggregate scatter/box statistics are recomputed at the end.
CommandResult cmd_sweep(const config::ExperimentConfig& cfg);

}  // namespace dnp::experiments
