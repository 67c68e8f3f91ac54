#include "dnp/model.hpp"

#include <cmath>

#include "dnp/kernels.hpp"

namespace dnp::model {

using spinalg::ComplexMatrix;
using spinalg::cxd;

const PhysicalConstants& constants() {
  static const PhysicalConstants c;
  return c;
}

double larmor_from_field(double b0_mT, Species species) {
  if (b0_mT < 0.0) throw std::invalid_argument("larmor_from_field: negative field");
  switch (species) {
    case Species::C13:
      return constants().gamma_c13_MHz_per_mT * b0_mT;
    case Species::H1:
      return constants().gamma_h1_MHz_per_mT * b0_mT;
  }
  throw std::invalid_argument("larmor_from_field: unknown species");
}

void SpinSystem::validate() const {
  if (nuclei.empty()) throw std::invalid_argument("SpinSystem: no nuclei");
  if (n_nuc() > 12) throw ResourceError("SpinSystem: N_nuc > 12 exceeds the dense-register guard");
  if (!(f_n_MHz > 0.0)) throw std::invalid_argument("SpinSystem: f_n must be positive");
  for (const auto& nuc : nuclei) {
    if (!std::isfinite(nuc.a_par_MHz) || !std::isfinite(nuc.a_perp_MHz))
      throw std::invalid_argument("SpinSystem: non-finite hyperfine parameter");
    if (nuc.a_perp_MHz < 0.0)
      throw std::invalid_argument("SpinSystem: a_perp must be non-negative");
  }
  if (electron.initial_sector == electron.flip_sector)
    throw std::invalid_argument("SpinSystem: electron sectors must differ");
}

spinalg::ComplexMatrix sector_hamiltonian(const SpinSystem& system, double m_s) {
  if (m_s != system.electron.initial_sector && m_s != system.electron.flip_sector)
    throw std::invalid_argument("sector_hamiltonian: unknown electron sector");
  const auto layout = system.nuclear_layout();
  const int d = layout.nuclear_dim();
  ComplexMatrix h(d);
  const ComplexMatrix iz = spinalg::scale(spinalg::pauli_z(), 0.5);
  const ComplexMatrix ix = spinalg::scale(spinalg::pauli_x(), 0.5);
  for (int l = 0; l < system.n_nuc(); ++l) {
    const auto& nuc = system.nuclei[l];
    const double wz = -system.f_n_MHz + m_s * nuc.a_par_MHz;
    const double wx = m_s * nuc.a_perp_MHz;
    spinalg::add_in_place(h, spinalg::scale(spinalg::embed_nuclear(iz, l, layout), wz));
    if (wx != 0.0)
      spinalg::add_in_place(h, spinalg::scale(spinalg::embed_nuclear(ix, l, layout), wx));
  }
  return h;
}

double precession_frequency(double f_n, double a_par, double a_perp, double m_s) {
  const double wz = f_n - m_s * a_par;
  const double wx = m_s * a_perp;
  return std::sqrt(wz * wz + wx * wx);
}

double tilt_angle(double f_n, double a_perp, ElectronKind kind) {
  if (!(f_n > 0.0)) throw std::invalid_argument("tilt_angle: f_n must be positive");
  switch (kind) {
    case ElectronKind::SpinHalf:
      return std::atan(a_perp / (2.0 * f_n));
    case ElectronKind::NvEffective:
      return std::atan(a_perp / f_n);
  }
  throw std::invalid_argument("tilt_angle: unknown electron kind");
}

}  // namespace dnp::model
