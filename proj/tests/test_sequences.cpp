#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dnp/engine.hpp"
#include "dnp/kernels.hpp"
#include "dnp/model.hpp"
#include "dnp/rng.hpp"
#include "dnp/sequences.hpp"
#include "dnp/spectral.hpp"
#include "dnp/tolerances.hpp"

using namespace dnp;
using model::SpinSystem;
using spinalg::ComplexMatrix;
using spinalg::cxd;

namespace {

SpinSystem random_system(std::uint64_t seed, int n_nuc, bool nv = false) {
  rng::Engine eng(seed);
  SpinSystem s;
  s.electron = nv ? model::ElectronModel::nv_effective() : model::ElectronModel::spin_half();
  s.f_n_MHz = 0.4 + rng::uniform01(eng);
  for (int l = 0; l < n_nuc; ++l)
    s.nuclei.push_back(
        {0.3 * rng::uniform01(eng) - 0.15, 0.4 * rng::uniform01(eng), std::to_string(l + 1)});
  return s;
}

ComplexMatrix joint_hamiltonian(const SpinSystem& s) {
  const int nd = s.nuclear_layout().nuclear_dim();
  const ComplexMatrix h0 = model::sector_hamiltonian(s, s.electron.initial_sector);
  const ComplexMatrix h1 = model::sector_hamiltonian(s, s.electron.flip_sector);
  ComplexMatrix h(2 * nd);
  for (int i = 0; i < nd; ++i)
    for (int j = 0; j < nd; ++j) {
      h(i, j) = h0(i, j);
      h(nd + i, nd + j) = h1(i, j);
    }
  return h;
}

constexpr double kPi = std::numbers::pi;

}  // namespace

TEST_CASE("electron_pulse basics") {
  const auto layout = spinalg::RegisterLayout::joint(1);
  const ComplexMatrix id = ComplexMatrix::identity(4);

  CHECK(spinalg::max_abs_diff(sequences::electron_pulse(sequences::Axis::X, 0.0, +1, layout), id) ==
        0.0);

  // Ux^2 = exp(-i pi Sx) = -i sx on the electron slot
  const ComplexMatrix ux = sequences::electron_pulse(sequences::Axis::X, kPi / 2, +1, layout);
  const ComplexMatrix ux2 = spinalg::multiply(ux, ux);
  const ComplexMatrix want =
      spinalg::embed_electron(spinalg::scale(spinalg::pauli_x(), cxd{0.0, -1.0}), layout);
  CHECK(spinalg::max_abs_diff(ux2, want) < 1e-15);

  // Ux Ux^dagger = 1
  const ComplexMatrix uxd = sequences::electron_pulse(sequences::Axis::X, kPi / 2, -1, layout);
  CHECK(spinalg::max_abs_diff(spinalg::multiply(ux, uxd), id) < 1e-15);
}

TEST_CASE("free_evolution") {
  SUBCASE("zero duration is the identity") {
    const SpinSystem s = random_system(3, 2);
    CHECK(spinalg::max_abs_diff(sequences::free_evolution(s, 0.0),
                                ComplexMatrix::identity(8)) == 0.0);
  }

  SUBCASE("single nucleus matches the dense joint exponential") {
    const SpinSystem s = random_system(5, 1);
    const double t = 1.7;
    const ComplexMatrix dense = spinalg::expi_hermitian(joint_hamiltonian(s), -2.0 * kPi * t);
    CHECK(spinalg::max_abs_diff(sequences::free_evolution(s, t), dense) < 1e-12);
  }

  SUBCASE("three nuclei match the dense joint exponential") {
    rng::Engine eng(1234);
    for (std::uint64_t seed = 10; seed < 14; ++seed) {
      const SpinSystem s = random_system(seed, 3, seed % 2 == 0);
      const double t = 0.3 + 2.0 * rng::uniform01(eng);
      const ComplexMatrix dense = spinalg::expi_hermitian(joint_hamiltonian(s), -2.0 * kPi * t);
      CHECK(spinalg::max_abs_diff(sequences::free_evolution(s, t), dense) < 1e-11);
    }
  }

  SUBCASE("semigroup property") {
    const SpinSystem s = random_system(21, 2);
    const ComplexMatrix a = sequences::free_evolution(s, 0.8);
    const ComplexMatrix b = sequences::free_evolution(s, 1.9);
    const ComplexMatrix ab = sequences::free_evolution(s, 2.7);
    CHECK(spinalg::max_abs_diff(spinalg::multiply(a, b), ab) < 1e-11);
  }

  SUBCASE("negative duration rejected") {
    const SpinSystem s = random_system(3, 1);
    CHECK_THROWS_AS(sequences::free_evolution(s, -1.0), std::invalid_argument);
  }
}

TEST_CASE("pulsepol_unit") {
  SpinSystem s = random_system(31, 2);
  s.nuclei[0].a_par_MHz = s.nuclei[1].a_par_MHz = 0.0;
  sequences::SequenceSpec spec;
  spec.tau_pol_us = 1.2;
  spec.n_pol = 1;

  SUBCASE("matches the brute-force product of the printed factors") {
    const ComplexMatrix unit = sequences::pulsepol_unit(s, spec);
    const auto layout = s.joint_layout();
    const ComplexMatrix ux = sequences::electron_pulse(sequences::Axis::X, kPi / 2, +1, layout);
    const ComplexMatrix uxd = sequences::electron_pulse(sequences::Axis::X, kPi / 2, -1, layout);
    const ComplexMatrix uy = sequences::electron_pulse(sequences::Axis::Y, kPi / 2, +1, layout);
    const ComplexMatrix ut = sequences::free_evolution(s, spec.tau_pol_us / 4.0);
    // Ux Ut Uy^2 Ut (Ux Uy) Ut (Ux^dag)^2 Ut Uy
    ComplexMatrix prod = ux;
    for (const ComplexMatrix* f :
         {&ut, &uy, &uy, &ut, &ux, &uy, &ut, &uxd, &uxd, &ut, &uy})
      prod = spinalg::multiply(prod, *f);
    CHECK(spinalg::max_abs_diff(unit, prod) < 1e-12);
    CHECK(spinalg::unitarity_error(unit) < UNITARITY_TOL);
  }

  SUBCASE("A_perp = 0 leaves nuclear populations invariant") {
    SpinSystem dec = s;
    dec.nuclei[0].a_perp_MHz = dec.nuclei[1].a_perp_MHz = 0.0;
    const ComplexMatrix unit = sequences::pulsepol_unit(dec, spec);
    // unit commutes with total nuclear Iz
    const auto layout = dec.joint_layout();
    const ComplexMatrix iz = spinalg::scale(spinalg::pauli_z(), 0.5);
    ComplexMatrix total_iz(8);
    spinalg::add_in_place(total_iz, spinalg::embed_nuclear(iz, 0, layout));
    spinalg::add_in_place(total_iz, spinalg::embed_nuclear(iz, 1, layout));
    const ComplexMatrix comm = spinalg::sub(spinalg::multiply(unit, total_iz),
                                            spinalg::multiply(total_iz, unit));
    CHECK(spinalg::max_abs(comm) < 1e-12);
  }
}

TEST_CASE("pulsepol_total") {
  SpinSystem s = random_system(41, 2);
  sequences::SequenceSpec spec;
  spec.tau_pol_us = 0.9;

  SUBCASE("exponent two is the unit squared") {
    spec.n_pol = 1;
    const ComplexMatrix unit = sequences::pulsepol_unit(s, spec);
    const ComplexMatrix total = sequences::pulsepol_total(s, spec);
    CHECK(spinalg::max_abs_diff(total, spinalg::multiply(unit, unit)) < 1e-12);
  }

  SUBCASE("unitarity after sixteen repetitions") {
    spec.n_pol = 8;
    CHECK(spinalg::unitarity_error(sequences::pulsepol_total(s, spec)) < UNITARITY_TOL);
  }
}

TEST_CASE("flip probability peaks at the resonant tau (N_nuc = 1)") {
  SpinSystem s;
  s.electron = model::ElectronModel::spin_half();
  s.f_n_MHz = 1.0;
  s.nuclei = {{0.0, 0.1, "1"}};
  const double f_p = model::precession_frequency(1.0, 0.0, 0.1, 0.5);
  const double tau_res = sequences::SequenceSpec::resonant_tau(f_p);

  double best_tau = 0.0, best_p = -1.0, step = 0.0;
  const int n_grid = 41;
  for (int g = 0; g < n_grid; ++g) {
    sequences::SequenceSpec spec;
    spec.tau_pol_us = tau_res * (0.9 + 0.2 * g / (n_grid - 1));
    spec.n_pol = 4;
    if (g == 1) step = tau_res * 0.2 / (n_grid - 1);
    const ComplexMatrix u = sequences::pulsepol_total(s, spec);
    const auto ch = sequences::sequence_channel(u, s.electron);
    // electron flip probability out of the fully polarized transfer source |up>
    const auto& k_alpha = ch.operators[1];
    double p = 0.0;
    for (int r = 0; r < 2; ++r) p += std::norm(k_alpha(r, 0));
    if (p > best_p) {
      best_p = p;
      best_tau = spec.tau_pol_us;
    }
  }
  CHECK(std::abs(best_tau - tau_res) <= step + 1e-12);
}

TEST_CASE("novel_total") {
  SpinSystem s;
  s.electron = model::ElectronModel::spin_half();
  s.f_n_MHz = 1.0;
  s.nuclei = {{0.0, 0.3, "1"}, {0.0, 0.3, "2"}};

  SUBCASE("unitary, and near-identity at vanishing duration") {
    sequences::SequenceSpec spec;
    spec.protocol = sequences::Protocol::Novel;
    spec.tau_pol_us = 1e-9;
    spec.n_pol = 1;
    spec.f_t_MHz = 1.0;
    const ComplexMatrix u = sequences::novel_total(s, spec);
    CHECK(spinalg::unitarity_error(u) < UNITARITY_TOL);
    CHECK(spinalg::max_abs_diff(u, ComplexMatrix::identity(8)) < 1e-6);
  }

  SUBCASE("A_perp = 0 leaves nuclear populations invariant") {
    SpinSystem dec = s;
    dec.nuclei[0].a_perp_MHz = dec.nuclei[1].a_perp_MHz = 0.0;
    sequences::SequenceSpec spec;
    spec.protocol = sequences::Protocol::Novel;
    spec.tau_pol_us = 1.4;
    spec.n_pol = 2;
    const ComplexMatrix u = sequences::novel_total(dec, spec);
    const auto ch = sequences::sequence_channel(u, dec.electron);
    ComplexMatrix rho = engine::initial_nuclear_state(2);
    rho(0, 0) = 0.7;
    rho(1, 1) = 0.1;
    rho(2, 2) = 0.15;
    rho(3, 3) = 0.05;
    const ComplexMatrix after = engine::apply_channel(rho, ch);
    for (int i = 0; i < 4; ++i)
      CHECK(std::abs(after(i, i).real() - rho(i, i).real()) < 1e-10);
  }
}

TEST_CASE("sequence_channel") {
  SUBCASE("identity gives K_beta = 1, K_alpha = 0") {
    const auto ch = sequences::sequence_channel(ComplexMatrix::identity(8),
                                                model::ElectronModel::spin_half());
    CHECK(spinalg::max_abs_diff(ch.operators[0], ComplexMatrix::identity(4)) == 0.0);
    CHECK(spinalg::max_abs(ch.operators[1]) == 0.0);
  }

  SUBCASE("Kraus application equals joint evolution plus partial trace") {
    rng::Engine eng(99);
    for (int trial = 0; trial < 6; ++trial) {
      const SpinSystem s = random_system(700 + trial, 3, trial % 2 == 1);
      sequences::SequenceSpec spec;
      spec.tau_pol_us = 0.4 + 2.0 * rng::uniform01(eng);
      spec.n_pol = 1;
      const ComplexMatrix u = sequences::pulsepol_total(s, spec);
      const auto ch = sequences::sequence_channel(u, s.electron);
      CHECK(ch.completeness_residual() < KRAUS_COMPLETENESS_TOL);

      ComplexMatrix rho_n(8);
      for (int i = 0; i < 8; ++i) rho_n(i, i) = (i + 1) / 36.0;
      rho_n(0, 5) = cxd{0.02, 0.01};
      rho_n(5, 0) = cxd{0.02, -0.01};

      const ComplexMatrix via_kraus = engine::apply_channel(rho_n, ch);

      ComplexMatrix joint(16);
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) joint(i, j) = rho_n(i, j);  // electron in |init><init|
      const ComplexMatrix evolved = spinalg::sandwich(u, joint);
      const ComplexMatrix via_trace = spinalg::trace_out_electron(evolved, s.joint_layout());
      CHECK(spinalg::max_abs_diff(via_kraus, via_trace) < 1e-12);
    }
  }

  SUBCASE("A_perp = 0 has no transfer channel") {
    SpinSystem s = random_system(55, 2);
    s.nuclei[0].a_perp_MHz = s.nuclei[1].a_perp_MHz = 0.0;
    sequences::SequenceSpec spec;
    spec.tau_pol_us = 1.1;
    spec.n_pol = 1;
    const auto ch = sequences::sequence_channel(sequences::pulsepol_total(s, spec), s.electron);
    CHECK(spinalg::max_abs(ch.operators[1]) < 1e-12);
  }
}

TEST_CASE("disentangle_channel") {
  SpinSystem s = random_system(61, 2, /*nv=*/true);

  SUBCASE("theta_e = 0 keeps populations, phases are deterministic") {
    const auto ch = sequences::disentangle_channel(s, 0.0, 3.0);
    REQUIRE(ch.operators.size() == 1);
    // m_S = 0 sector evolution is diagonal (hyperfine-free, Iz only)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (i != j) CHECK(std::abs(ch.operators[0](i, j)) < 1e-14);
    for (int i = 0; i < 4; ++i)
      CHECK(std::abs(std::abs(ch.operators[0](i, i)) - 1.0) < 1e-12);
  }

  SUBCASE("theta_e = pi is a unitary single-Kraus channel") {
    const auto ch = sequences::disentangle_channel(s, kPi, 2.0);
    REQUIRE(ch.operators.size() == 1);
    CHECK(spinalg::unitarity_error(ch.operators[0]) < UNITARITY_TOL);
  }

  SUBCASE("intermediate angle gives two operators with completeness") {
    const auto ch = sequences::disentangle_channel(s, kPi / 2, 2.0);
    REQUIRE(ch.operators.size() == 2);
    CHECK(ch.completeness_residual() < KRAUS_COMPLETENESS_TOL);
  }

  SUBCASE("requires the NV model") {
    const SpinSystem sh = random_system(62, 2, /*nv=*/false);
    CHECK_THROWS_AS(sequences::disentangle_channel(sh, kPi, 1.0), std::invalid_argument);
  }
}
