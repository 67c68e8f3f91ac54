#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "dnp/model.hpp"

namespace dnp::clusters {

// Diamond lattice generated from the bond length; the conventional cubic
// cell edge is 4 * bond / sqrt(3). A 2 nm radius holds 5850 sites.
inline constexpr double kBondLength_nm = 0.155;
extern const double kLatticeConstant_nm;

/// Default field direction: the NV symmetry axis ([111] of the cubic site
/// frame), along which B0 is assumed perfectly aligned.
std::array<double, 3> nv_axis();

struct LatticeSite {
  std::array<double, 3> position_nm{};
};

/// All diamond-lattice sites within `radius_nm` of the vacancy at the
/// origin (the origin site itself excluded), in a canonical sorted order.
std::vector<LatticeSite> build_lattice(double radius_nm);

/// Independent Bernoulli occupation of each site; returns sorted indices.
std::vector<int> sample_occupation(std::size_t n_sites, std::uint64_t seed,
                                   double abundance = 0.011);

struct Hyperfine {
  double a_par_MHz = 0.0;   // signed
  double a_perp_MHz = 0.0;  // absolute value, sign absorbed in the x-axis gauge
};

/// Point-dipole coupling at `position_nm` from the vacancy for a 13C
/// nucleus, with theta_r measured from `b0_direction`.
Hyperfine hyperfine_from_position(const std::array<double, 3>& position_nm,
                                  const std::array<double, 3>& b0_direction);

struct SelectedNucleus {
  LatticeSite site;
  double a_par_MHz = 0.0;
  double a_perp_MHz = 0.0;
};

struct ClusterConfig {
  std::uint64_t seed = 0;
  std::vector<SelectedNucleus> selected;   // sorted by descending a_perp
  std::array<double, 3> b0_direction{};
  double b0_mT = 0.0;

  double mean_a_perp() const;
};

enum class CapRule {
  RejectConfiguration,   // any occupied nucleus at/above the cap rejects the whole draw
  FilterPerNucleus,      // drop only the offending nuclei (sensitivity mode)
};

enum class SelectStatus { Accepted, CapRejected, TooFewNuclei };

struct SelectResult {
  SelectStatus status = SelectStatus::TooFewNuclei;
  std::vector<SelectedNucleus> selected;
};

/// Order the occupied nuclei by descending a_perp and keep the strongest
/// n_nuc, subject to the cap rule.
SelectResult select_cluster(const std::vector<SelectedNucleus>& occupied, int n_nuc,
                            double cap_MHz = 0.1, CapRule rule = CapRule::RejectConfiguration);

struct GenerationParams {
  int n_nuc = 6;
  double radius_nm = 2.0;
  double abundance = 0.011;
  double cap_MHz = 0.1;
  CapRule rule = CapRule::RejectConfiguration;
  double b0_mT = 40.0;
};

/// Draw occupations until one passes selection; the accepted draw's seed is
/// recorded in the config. Deterministic in (master_seed, index).
ClusterConfig generate_cluster(const std::vector<LatticeSite>& sites, std::uint64_t master_seed,
                               std::uint64_t index, const GenerationParams& params);

/// The NV-model spin system of a generated cluster.
model::SpinSystem cluster_system(const ClusterConfig& config);

}  // namespace dnp::clusters
