#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dnp/kernels.hpp"
#include "dnp/model.hpp"
#include "dnp/rng.hpp"
#include "dnp/spectral.hpp"

using namespace dnp;
using model::SpinSystem;
using spinalg::ComplexMatrix;

namespace {

SpinSystem one_spin(double f_n, double a_par, double a_perp) {
  SpinSystem s;
  s.electron = model::ElectronModel::spin_half();
  s.f_n_MHz = f_n;
  s.nuclei = {{a_par, a_perp, "1"}};
  return s;
}

}  // namespace

TEST_CASE("constants reproduce the calibration points") {
  // 23.4866 mT corresponds to 1 MHz for protons
  const double f_h = model::larmor_from_field(23.4866, model::Species::H1);
  CHECK(std::abs(f_h - 1.0) / 1.0 < 1e-3);
  // 40 mT gives 428 kHz for 13C
  const double f_c = model::larmor_from_field(40.0, model::Species::C13);
  CHECK(std::abs(f_c - 0.428) / 0.428 < 5e-3);
  CHECK(model::larmor_from_field(0.0, model::Species::C13) == 0.0);
}

TEST_CASE("hyperfine prefactor order of magnitude at 1 nm") {
  const auto& c = model::constants();
  const double pref = c.mu0_h_prefactor * c.gamma_e_MHz_per_mT * c.gamma_c13_MHz_per_mT;
  CHECK(pref == doctest::Approx(0.020).epsilon(0.02));
}

TEST_CASE("sector_hamiltonian") {
  SUBCASE("NV m_S = 0 sector is the bare Larmor term") {
    SpinSystem s;
    s.electron = model::ElectronModel::nv_effective();
    s.f_n_MHz = 0.428;
    s.nuclei = {{0.1, 0.2, "1"}, {-0.05, 0.07, "2"}};
    const ComplexMatrix h = model::sector_hamiltonian(s, 0.0);
    // equals -f_n (Iz1 + Iz2): diagonal, hyperfine-free
    const auto layout = s.nuclear_layout();
    ComplexMatrix want(4);
    const ComplexMatrix iz = spinalg::scale(spinalg::pauli_z(), 0.5);
    spinalg::add_in_place(want, spinalg::scale(spinalg::embed_nuclear(iz, 0, layout), -0.428));
    spinalg::add_in_place(want, spinalg::scale(spinalg::embed_nuclear(iz, 1, layout), -0.428));
    CHECK(spinalg::max_abs_diff(h, want) < 1e-15);
  }

  SUBCASE("hand-expanded single-nucleus matrix") {
    const SpinSystem s = one_spin(1.0, 0.0, 0.3);
    const ComplexMatrix h = model::sector_hamiltonian(s, 0.5);
    CHECK(h(0, 0).real() == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(h(1, 1).real() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(h(0, 1).real() == doctest::Approx(0.075).epsilon(1e-14));
    CHECK(h(1, 0).real() == doctest::Approx(0.075).epsilon(1e-14));
  }

  SUBCASE("hermitian, and per-nucleus terms commute") {
    rng::Engine eng(4);
    for (int trial = 0; trial < 10; ++trial) {
      SpinSystem s;
      s.electron = model::ElectronModel::spin_half();
      s.f_n_MHz = 0.5 + rng::uniform01(eng);
      for (int l = 0; l < 3; ++l)
        s.nuclei.push_back({0.2 * rng::uniform01(eng) - 0.1, 0.2 * rng::uniform01(eng),
                            std::to_string(l)});
      const ComplexMatrix h = model::sector_hamiltonian(s, -0.5);
      CHECK(spinalg::hermiticity_error(h) < 1e-12);

      // the per-nucleus terms commute pairwise and sum to the full block
      const auto layout = s.nuclear_layout();
      const ComplexMatrix iz = spinalg::scale(spinalg::pauli_z(), 0.5);
      const ComplexMatrix ix = spinalg::scale(spinalg::pauli_x(), 0.5);
      std::vector<ComplexMatrix> terms;
      for (int l = 0; l < 3; ++l) {
        ComplexMatrix t = spinalg::scale(spinalg::embed_nuclear(iz, l, layout),
                                         -s.f_n_MHz - 0.5 * s.nuclei[l].a_par_MHz);
        spinalg::add_in_place(
            t, spinalg::scale(spinalg::embed_nuclear(ix, l, layout), -0.5 * s.nuclei[l].a_perp_MHz));
        terms.push_back(std::move(t));
      }
      ComplexMatrix total(8);
      for (const auto& t : terms) spinalg::add_in_place(total, t);
      CHECK(spinalg::max_abs_diff(total, h) < 1e-13);
      for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) {
          const ComplexMatrix comm = spinalg::sub(spinalg::multiply(terms[a], terms[b]),
                                                  spinalg::multiply(terms[b], terms[a]));
          CHECK(spinalg::max_abs(comm) < 1e-12);
        }
    }
  }

  SUBCASE("unknown sector is rejected") {
    const SpinSystem s = one_spin(1.0, 0.0, 0.3);
    CHECK_THROWS_AS(model::sector_hamiltonian(s, 1.0), std::invalid_argument);
  }
}

TEST_CASE("precession_frequency") {
  CHECK(model::precession_frequency(1.0, 0.0, 0.0, 0.5) == 1.0);
  CHECK(model::precession_frequency(1.0, 0.0, 0.3, 0.5) ==
        doctest::Approx(1.011187).epsilon(1e-6));
  // Table I spin #1 in the NV m_S = -1 sector
  const double fp = model::precession_frequency(0.428, -0.0113, 0.0592, -1.0);
  CHECK(fp == doctest::Approx(std::sqrt(0.4167 * 0.4167 + 0.0592 * 0.0592)).epsilon(1e-4));

  // the two spin-1/2 branches f_n -/+ a_par/2 come from m_S = +/- 1/2
  const double a_par = 0.08, a_perp = 0.05, f_n = 1.3;
  CHECK(model::precession_frequency(f_n, a_par, a_perp, -0.5) ==
        doctest::Approx(std::sqrt(std::pow(f_n + a_par / 2, 2) + std::pow(a_perp / 2, 2))));
  CHECK(model::precession_frequency(f_n, a_par, a_perp, 0.5) ==
        doctest::Approx(std::sqrt(std::pow(f_n - a_par / 2, 2) + std::pow(a_perp / 2, 2))));
}

TEST_CASE("single-nucleus sector spectrum is +/- f_p / 2") {
  rng::Engine eng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const double f_n = 0.3 + rng::uniform01(eng);
    const double a_par = 0.4 * rng::uniform01(eng) - 0.2;
    const double a_perp = 0.4 * rng::uniform01(eng);
    for (double m_s : {0.5, -0.5, -1.0}) {
      const SpinSystem s = [&] {
        SpinSystem sys = one_spin(f_n, a_par, a_perp);
        if (m_s == -1.0) sys.electron = model::ElectronModel::nv_effective();
        return sys;
      }();
      const double f_p = model::precession_frequency(f_n, a_par, a_perp, m_s);
      auto [vals, vecs] = spinalg::eigh(model::sector_hamiltonian(s, m_s));
      CHECK(std::abs(vals[0] + f_p / 2) < 1e-10);
      CHECK(std::abs(vals[1] - f_p / 2) < 1e-10);
    }
  }
}

TEST_CASE("tilt_angle") {
  CHECK(model::tilt_angle(1.0, 0.0, model::ElectronKind::SpinHalf) == 0.0);
  CHECK(model::tilt_angle(1.0, 0.3, model::ElectronKind::SpinHalf) ==
        doctest::Approx(0.14889).epsilon(1e-4));
  CHECK(model::tilt_angle(0.428, 0.3, model::ElectronKind::NvEffective) ==
        doctest::Approx(std::atan(0.3 / 0.428)).epsilon(1e-12));

  // monotone in a_perp
  double prev = -1.0;
  for (double a = 0.0; a < 1.0; a += 0.05) {
    const double t = model::tilt_angle(0.7, a, model::ElectronKind::SpinHalf);
    CHECK(t > prev);
    CHECK(t < std::numbers::pi / 2);
    prev = t;
  }
}

TEST_CASE("SpinSystem validation") {
  SpinSystem s = one_spin(1.0, 0.0, 0.3);
  CHECK_NOTHROW(s.validate());

  SpinSystem empty = s;
  empty.nuclei.clear();
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);

  SpinSystem big = s;
  big.nuclei.assign(13, {0.0, 0.01, "x"});
  CHECK_THROWS_AS(big.validate(), model::ResourceError);

  SpinSystem bad_f = s;
  bad_f.f_n_MHz = 0.0;
  CHECK_THROWS_AS(bad_f.validate(), std::invalid_argument);

  SpinSystem neg = s;
  neg.nuclei[0].a_perp_MHz = -0.1;
  CHECK_THROWS_AS(neg.validate(), std::invalid_argument);
}
