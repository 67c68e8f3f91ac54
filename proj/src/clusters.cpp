#include "dnp/clusters.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dnp/rng.hpp"

namespace dnp::clusters {

const double kLatticeConstant_nm = 4.0 * kBondLength_nm / std::sqrt(3.0);

std::array<double, 3> nv_axis() {
  const double s = 1.0 / std::sqrt(3.0);
  return {s, s, s};
}

std::vector<LatticeSite> build_lattice(double radius_nm) {
  if (!(radius_nm > 0.0)) throw std::invalid_argument("build_lattice: radius must be positive");
  const double a = kLatticeConstant_nm;
  static constexpr double basis[8][3] = {
      {0.00, 0.00, 0.00}, {0.00, 0.50, 0.50}, {0.50, 0.00, 0.50}, {0.50, 0.50, 0.00},
      {0.25, 0.25, 0.25}, {0.25, 0.75, 0.75}, {0.75, 0.25, 0.75}, {0.75, 0.75, 0.25}};
  const int m = static_cast<int>(std::ceil(radius_nm / a)) + 1;
  const double r2 = radius_nm * radius_nm;

  std::vector<LatticeSite> sites;
  for (int i = -m; i <= m; ++i)
    for (int j = -m; j <= m; ++j)
      for (int k = -m; k <= m; ++k)
        for (const auto& b : basis) {
          const double x = (i + b[0]) * a;
          const double y = (j + b[1]) * a;
          const double z = (k + b[2]) * a;
          const double d2 = x * x + y * y + z * z;
          if (d2 <= r2 && d2 > 1e-12) sites.push_back({{x, y, z}});
        }
  std::sort(sites.begin(), sites.end(), [](const LatticeSite& lhs, const LatticeSite& rhs) {
    return lhs.position_nm < rhs.position_nm;
  });
  return sites;
}

std::vector<int> sample_occupation(std::size_t n_sites, std::uint64_t seed, double abundance) {
  if (!(abundance >= 0.0 && abundance <= 1.0))
    throw std::invalid_argument("sample_occupation: abundance outside [0, 1]");
  rng::Engine eng(seed);
  std::vector<int> occupied;
  for (std::size_t i = 0; i < n_sites; ++i)
    if (rng::uniform01(eng) < abundance) occupied.push_back(static_cast<int>(i));
  return occupied;
}

Hyperfine hyperfine_from_position(const std::array<double, 3>& position_nm,
                                  const std::array<double, 3>& b0_direction) {
  const double r2 = position_nm[0] * position_nm[0] + position_nm[1] * position_nm[1] +
                    position_nm[2] * position_nm[2];
  if (r2 <= 0.0) throw std::invalid_argument("hyperfine_from_position: zero-length position");
  const double b2 = b0_direction[0] * b0_direction[0] + b0_direction[1] * b0_direction[1] +
                    b0_direction[2] * b0_direction[2];
  if (b2 <= 0.0) throw std::invalid_argument("hyperfine_from_position: zero field direction");
  const double r = std::sqrt(r2);
  const double ct = (position_nm[0] * b0_direction[0] + position_nm[1] * b0_direction[1] +
                     position_nm[2] * b0_direction[2]) /
                    (r * std::sqrt(b2));
  const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));

  const auto& c = model::constants();
  const double base = c.mu0_h_prefactor * c.gamma_e_MHz_per_mT * c.gamma_c13_MHz_per_mT /
                      (r * r * r);
  Hyperfine hf;
  hf.a_par_MHz = base * (3.0 * ct * ct - 1.0);
  hf.a_perp_MHz = std::abs(base * 3.0 * ct * st);
  return hf;
}

double ClusterConfig::mean_a_perp() const {
  double s = 0.0;
  for (const auto& nuc : selected) s += nuc.a_perp_MHz;
  return selected.empty() ? 0.0 : s / static_cast<double>(selected.size());
}

SelectResult select_cluster(const std::vector<SelectedNucleus>& occupied, int n_nuc,
                            double cap_MHz, CapRule rule) {
  if (n_nuc < 1) throw std::invalid_argument("select_cluster: n_nuc must be >= 1");
  SelectResult out;

  std::vector<SelectedNucleus> pool = occupied;
  if (rule == CapRule::RejectConfiguration) {
    for (const auto& nuc : pool)
      if (nuc.a_perp_MHz >= cap_MHz) {
        out.status = SelectStatus::CapRejected;
        return out;
      }
  } else {
    std::erase_if(pool, [cap_MHz](const SelectedNucleus& n) { return n.a_perp_MHz >= cap_MHz; });
  }
  if (static_cast<int>(pool.size()) < n_nuc) {
    out.status = SelectStatus::TooFewNuclei;
    return out;
  }
  std::sort(pool.begin(), pool.end(), [](const SelectedNucleus& a, const SelectedNucleus& b) {
    if (a.a_perp_MHz != b.a_perp_MHz) return a.a_perp_MHz > b.a_perp_MHz;
    return a.site.position_nm < b.site.position_nm;   // total order for reproducibility
  });
  pool.resize(n_nuc);
  out.status = SelectStatus::Accepted;
  out.selected = std::move(pool);
  return out;
}

ClusterConfig generate_cluster(const std::vector<LatticeSite>& sites, std::uint64_t master_seed,
                               std::uint64_t index, const GenerationParams& params) {
  const auto b0_dir = nv_axis();
  const std::uint64_t stream = rng::derive_seed(master_seed, index);
  for (std::uint64_t attempt = 0;; ++attempt) {
    const std::uint64_t seed = rng::splitmix64(stream + attempt);
    const std::vector<int> occupied_idx = sample_occupation(sites.size(), seed, params.abundance);

    std::vector<SelectedNucleus> occupied;
    occupied.reserve(occupied_idx.size());
    for (int idx : occupied_idx) {
      const Hyperfine hf = hyperfine_from_position(sites[idx].position_nm, b0_dir);
      occupied.push_back({sites[idx], hf.a_par_MHz, hf.a_perp_MHz});
    }
    SelectResult sel = select_cluster(occupied, params.n_nuc, params.cap_MHz, params.rule);
    if (sel.status != SelectStatus::Accepted) continue;

    ClusterConfig config;
    config.seed = seed;
    config.selected = std::move(sel.selected);
    config.b0_direction = b0_dir;
    config.b0_mT = params.b0_mT;
    return config;
  }
}

model::SpinSystem cluster_system(const ClusterConfig& config) {
  model::SpinSystem system;
  system.electron = model::ElectronModel::nv_effective();
  system.f_n_MHz = model::larmor_from_field(config.b0_mT, model::Species::C13);
  for (std::size_t l = 0; l < config.selected.size(); ++l) {
    system.nuclei.push_back(
        {config.selected[l].a_par_MHz, config.selected[l].a_perp_MHz, std::to_string(l + 1)});
  }
  return system;
}

}  // namespace dnp::clusters
