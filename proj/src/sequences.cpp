#include "dnp/sequences.hpp"

#include <cmath>
#include <numbers>

#include "dnp/kernels.hpp"
#include "dnp/spectral.hpp"
#include "dnp/tolerances.hpp"

namespace dnp::sequences {

using model::SpinSystem;
using spinalg::ComplexMatrix;
using spinalg::cxd;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Joint unitaries are carried as 2x2 arrays of nuclear-register blocks:
// pulses act as linear combinations of block rows (O(n^2)) and sector
// evolutions as per-row block products, instead of full joint products.
struct BlockUnitary {
  ComplexMatrix b[2][2];

  static BlockUnitary identity(int nuclear_dim) {
    BlockUnitary u;
    u.b[0][0] = ComplexMatrix::identity(nuclear_dim);
    u.b[1][1] = ComplexMatrix::identity(nuclear_dim);
    u.b[0][1] = ComplexMatrix(nuclear_dim);
    u.b[1][0] = ComplexMatrix(nuclear_dim);
    return u;
  }
};

// u <- (p (x) 1) u  with p a 2x2 electron operator
void left_apply_pulse(const ComplexMatrix& p, BlockUnitary& u) {
  for (int j = 0; j < 2; ++j) {
    ComplexMatrix top = spinalg::add(spinalg::scale(u.b[0][j], p(0, 0)),
                                     spinalg::scale(u.b[1][j], p(0, 1)));
    ComplexMatrix bot = spinalg::add(spinalg::scale(u.b[0][j], p(1, 0)),
                                     spinalg::scale(u.b[1][j], p(1, 1)));
    u.b[0][j] = std::move(top);
    u.b[1][j] = std::move(bot);
  }
}

// u <- diag(f0, f1) u
void left_apply_sectors(const ComplexMatrix& f0, const ComplexMatrix& f1, BlockUnitary& u) {
  for (int j = 0; j < 2; ++j) {
    u.b[0][j] = spinalg::multiply(f0, u.b[0][j]);
    u.b[1][j] = spinalg::multiply(f1, u.b[1][j]);
  }
}

BlockUnitary block_multiply(const BlockUnitary& a, const BlockUnitary& b) {
  BlockUnitary c;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      c.b[i][j] = spinalg::add(spinalg::multiply(a.b[i][0], b.b[0][j]),
                               spinalg::multiply(a.b[i][1], b.b[1][j]));
    }
  return c;
}

BlockUnitary block_power(const BlockUnitary& a, int n) {
  BlockUnitary result = BlockUnitary::identity(a.b[0][0].dim());
  BlockUnitary base = a;
  while (n > 0) {
    if (n & 1) result = block_multiply(result, base);
    n >>= 1;
    if (n > 0) base = block_multiply(base, base);
  }
  return result;
}

ComplexMatrix assemble(const BlockUnitary& u) {
  const int n = u.b[0][0].dim();
  ComplexMatrix out(2 * n);
  for (int bi = 0; bi < 2; ++bi)
    for (int bj = 0; bj < 2; ++bj)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(bi * n + i, bj * n + j) = u.b[bi][bj](i, j);
  return out;
}

ComplexMatrix pulse2(Axis axis, double angle, int sign) {
  const double half = 0.5 * sign * angle;
  return axis == Axis::X ? spinalg::su2_exponential(half, 0.0, 0.0)
                         : spinalg::su2_exponential(0.0, half, 0.0);
}

// exp(-2 pi i H_l t) for one nucleus in one sector, in closed form
ComplexMatrix nucleus_rotation(const model::NuclearSpinParams& nuc, double f_n, double m_s,
                               double t) {
  const double az = kTwoPi * t * 0.5 * (-f_n + m_s * nuc.a_par_MHz);
  const double ax = kTwoPi * t * 0.5 * (m_s * nuc.a_perp_MHz);
  return spinalg::su2_exponential(ax, 0.0, az);
}

BlockUnitary pulsepol_unit_blocks(const SpinSystem& system, const SequenceSpec& spec) {
  const int nd = system.nuclear_layout().nuclear_dim();
  const double quarter = spec.tau_pol_us / 4.0;
  const ComplexMatrix f0 = sector_evolution(system, system.electron.initial_sector, quarter);
  const ComplexMatrix f1 = sector_evolution(system, system.electron.flip_sector, quarter);

  const ComplexMatrix ux = pulse2(Axis::X, std::numbers::pi / 2.0, +1);
  const ComplexMatrix uxd = pulse2(Axis::X, std::numbers::pi / 2.0, -1);
  const ComplexMatrix uy = pulse2(Axis::Y, std::numbers::pi / 2.0, +1);

  // Ux Ut Uy^2 Ut (Ux Uy) Ut (Ux^dag)^2 Ut Uy, applied right to left
  BlockUnitary u = BlockUnitary::identity(nd);
  left_apply_pulse(uy, u);
  left_apply_sectors(f0, f1, u);
  left_apply_pulse(uxd, u);
  left_apply_pulse(uxd, u);
  left_apply_sectors(f0, f1, u);
  left_apply_pulse(uy, u);
  left_apply_pulse(ux, u);
  left_apply_sectors(f0, f1, u);
  left_apply_pulse(uy, u);
  left_apply_pulse(uy, u);
  left_apply_sectors(f0, f1, u);
  left_apply_pulse(ux, u);
  return u;
}

}  // namespace

double ChannelKraus::completeness_residual() const {
  if (operators.empty()) return 1.0;
  const int n = operators.front().dim();
  ComplexMatrix acc(n);
  for (const auto& k : operators)
    spinalg::add_in_place(acc, spinalg::multiply(spinalg::adjoint(k), k));
  return spinalg::max_abs_diff(acc, ComplexMatrix::identity(n));
}

ComplexMatrix electron_pulse(Axis axis, double angle, int sign,
                             const spinalg::RegisterLayout& layout) {
  return spinalg::embed_electron(pulse2(axis, angle, sign), layout);
}

ComplexMatrix sector_evolution(const SpinSystem& system, double m_s, double duration_us) {
  std::vector<ComplexMatrix> factors;
  factors.reserve(system.nuclei.size());
  for (const auto& nuc : system.nuclei)
    factors.push_back(nucleus_rotation(nuc, system.f_n_MHz, m_s, duration_us));
  return spinalg::kron_chain(factors);
}

ComplexMatrix free_evolution(const SpinSystem& system, double duration_us) {
  if (duration_us < 0.0) throw std::invalid_argument("free_evolution: negative duration");
  const int nd = system.nuclear_layout().nuclear_dim();
  const ComplexMatrix f0 = sector_evolution(system, system.electron.initial_sector, duration_us);
  const ComplexMatrix f1 = sector_evolution(system, system.electron.flip_sector, duration_us);
  ComplexMatrix out(2 * nd);
  for (int i = 0; i < nd; ++i)
    for (int j = 0; j < nd; ++j) {
      out(i, j) = f0(i, j);
      out(nd + i, nd + j) = f1(i, j);
    }
  return out;
}

ComplexMatrix pulsepol_unit(const SpinSystem& system, const SequenceSpec& spec) {
  spec.validate();
  system.validate();
  return assemble(pulsepol_unit_blocks(system, spec));
}

ComplexMatrix pulsepol_total(const SpinSystem& system, const SequenceSpec& spec) {
  spec.validate();
  system.validate();
  return assemble(block_power(pulsepol_unit_blocks(system, spec), 2 * spec.n_pol));
}

ComplexMatrix novel_total(const SpinSystem& system, const SequenceSpec& spec) {
  spec.validate();
  system.validate();
  const auto layout = system.joint_layout();
  const double f_t = spec.target_frequency();
  const double t_dur = spec.n_pol * 2.0 * spec.tau_pol_us;

  const ComplexMatrix sy = spinalg::embed_electron(spinalg::scale(spinalg::pauli_y(), 0.5), layout);
  const ComplexMatrix sz = spinalg::embed_electron(spinalg::scale(spinalg::pauli_z(), 0.5), layout);
  const ComplexMatrix iz2 = spinalg::scale(spinalg::pauli_z(), 0.5);
  const ComplexMatrix ix2 = spinalg::scale(spinalg::pauli_x(), 0.5);

  ComplexMatrix h = spinalg::scale(sy, f_t);
  for (int l = 0; l < system.n_nuc(); ++l) {
    spinalg::add_in_place(
        h, spinalg::scale(spinalg::embed_nuclear(iz2, l, layout), -system.f_n_MHz));
    spinalg::add_in_place(
        h, spinalg::scale(spinalg::multiply(sz, spinalg::embed_nuclear(ix2, l, layout)),
                          system.nuclei[l].a_perp_MHz));
  }

  const ComplexMatrix ux = electron_pulse(Axis::X, std::numbers::pi / 2.0, +1, layout);
  const ComplexMatrix evo = spinalg::expi_hermitian(h, -kTwoPi * t_dur);
  return spinalg::multiply(spinalg::multiply(ux, evo), spinalg::adjoint(ux));
}

ComplexMatrix total_unitary(const SpinSystem& system, const SequenceSpec& spec) {
  return spec.protocol == Protocol::PulsePol ? pulsepol_total(system, spec)
                                             : novel_total(system, spec);
}

ChannelKraus sequence_channel(const ComplexMatrix& u, const model::ElectronModel& electron) {
  (void)electron;  // sector identity is fixed by the register ordering
  const int d = u.dim();
  const int n = d / 2;
  if (2 * n != d) throw std::invalid_argument("sequence_channel: odd joint dimension");

  ChannelKraus ch;
  ch.source = "sequence";
  ch.operators.assign(2, ComplexMatrix(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      ch.operators[0](i, j) = u(i, j);        // <init|U|init>
      ch.operators[1](i, j) = u(n + i, j);    // <flip|U|init>
    }
  const double resid = ch.completeness_residual();
  if (resid > 1e-8)
    throw ChannelConsistencyError("sequence_channel: completeness residual " +
                                  std::to_string(resid));
  return ch;
}

ChannelKraus disentangle_channel(const SpinSystem& system, double theta_e_rad, double wait_us) {
  if (system.electron.kind != model::ElectronKind::NvEffective)
    throw std::invalid_argument("disentangle_channel: requires the NV effective electron model");
  if (wait_us < 0.0) throw std::invalid_argument("disentangle_channel: negative wait");

  // exp(-i theta S_x)|init> = cos(theta/2)|init> - i sin(theta/2)|flip>
  const cxd a0{std::cos(theta_e_rad / 2.0), 0.0};
  const cxd a1{0.0, -std::sin(theta_e_rad / 2.0)};

  ChannelKraus ch;
  ch.source = "disentangle";
  if (std::abs(a0) > 1e-12)
    ch.operators.push_back(spinalg::scale(
        sector_evolution(system, system.electron.initial_sector, wait_us), a0));
  if (std::abs(a1) > 1e-12)
    ch.operators.push_back(spinalg::scale(
        sector_evolution(system, system.electron.flip_sector, wait_us), a1));

  const double resid = ch.completeness_residual();
  if (resid > KRAUS_COMPLETENESS_TOL)
    throw ChannelConsistencyError("disentangle_channel: completeness residual " +
                                  std::to_string(resid));
  return ch;
}

}  // namespace dnp::sequences
