#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "dnp/complex_matrix.hpp"
#include "dnp/register_layout.hpp"

namespace dnp::model {

// Units used throughout: MHz for frequencies, us for times, mT for fields,
// nm for distances, radians for angles.

struct PhysicalConstants {
  double gamma_e_MHz_per_mT = 28.0249;       // electron
  double gamma_c13_MHz_per_mT = 0.0107084;   // 13C
  double gamma_h1_MHz_per_mT = 0.0425775;    // 1H
  // mu0 h gamma_e gamma_n / (4 pi r^3) evaluated with gammas in MHz/mT and
  // r in nm comes out as this prefactor (MHz nm^3 per (MHz/mT)^2).
  double mu0_h_prefactor = 6.62607015e-2;
};

const PhysicalConstants& constants();

enum class Species { C13, H1 };

double larmor_from_field(double b0_mT, Species species);

struct NuclearSpinParams {
  double a_par_MHz = 0.0;    // signed
  double a_perp_MHz = 0.0;   // non-negative by convention
  std::string label;
};

enum class ElectronKind { SpinHalf, NvEffective };

/// Two-level effective electron: the ordered sector pair (initial, flip).
/// SpinHalf uses m_S = (+1/2, -1/2); the NV effective model uses the
/// optically polarized m_S = 0 and the m_S = -1 level.
struct ElectronModel {
  ElectronKind kind = ElectronKind::SpinHalf;
  double initial_sector = 0.5;
  double flip_sector = -0.5;

  static ElectronModel spin_half() { return {ElectronKind::SpinHalf, 0.5, -0.5}; }
  static ElectronModel nv_effective() { return {ElectronKind::NvEffective, 0.0, -1.0}; }
};

struct SpinSystem {
  ElectronModel electron;
  std::vector<NuclearSpinParams> nuclei;
  double f_n_MHz = 0.0;   // nuclear Larmor frequency

  int n_nuc() const { return static_cast<int>(nuclei.size()); }
  spinalg::RegisterLayout joint_layout() const { return spinalg::RegisterLayout::joint(n_nuc()); }
  spinalg::RegisterLayout nuclear_layout() const {
    return spinalg::RegisterLayout::nuclear_only(n_nuc());
  }
  void validate() const;   // 1 <= N_nuc <= 12, f_n > 0, finite hyperfine
};

/// Nuclear-register Hamiltonian of one electron sector:
///   sum_l (-f_n + m_S a_par^l) Iz^l + m_S a_perp^l Ix^l   (MHz)
spinalg::ComplexMatrix sector_hamiltonian(const SpinSystem& system, double m_s);

/// f_p = sqrt((f_n - m_S a_par)^2 + (m_S a_perp)^2)
double precession_frequency(double f_n, double a_par, double a_perp, double m_s);

/// Hyperfine tilt of the precession axis away from B0.
double tilt_angle(double f_n, double a_perp, ElectronKind kind);

class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dnp::model
