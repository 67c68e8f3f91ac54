#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dnp/complex_matrix.hpp"
#include "dnp/model.hpp"

namespace dnp::sequences {

enum class Protocol { PulsePol, Novel };

struct DisentangleSpec {
  double theta_e_rad = 0.0;
  std::optional<double> wait_us;   // default 2 * n_pol * tau_pol
};

struct SequenceSpec {
  Protocol protocol = Protocol::PulsePol;
  double tau_pol_us = 0.0;
  int n_pol = 1;
  std::optional<double> f_t_MHz;   // default 3 / (2 tau_pol)
  std::optional<DisentangleSpec> disentangle;

  double target_frequency() const { return f_t_MHz ? *f_t_MHz : 3.0 / (2.0 * tau_pol_us); }
  double disentangle_wait() const {
    return (disentangle && disentangle->wait_us) ? *disentangle->wait_us
                                                 : 2.0 * n_pol * tau_pol_us;
  }
  void validate() const {
    if (!(tau_pol_us > 0.0)) throw std::invalid_argument("SequenceSpec: tau_pol must be positive");
    if (n_pol < 1) throw std::invalid_argument("SequenceSpec: n_pol must be >= 1");
  }

  static double resonant_tau(double f_t_MHz) { return 3.0 / (2.0 * f_t_MHz); }
  static SequenceSpec pulsepol_resonant(double f_t_MHz, int n_pol) {
    SequenceSpec s;
    s.protocol = Protocol::PulsePol;
    s.tau_pol_us = resonant_tau(f_t_MHz);
    s.n_pol = n_pol;
    return s;
  }
};

/// Kraus operators on the nuclear register; sum_k K_k^dagger K_k = 1.
struct ChannelKraus {
  std::vector<spinalg::ComplexMatrix> operators;
  std::string source;
  double completeness_residual() const;
};

enum class Axis { X, Y };

/// exp(-i sign * angle * S_axis) on the electron slot, identity on nuclei.
/// The two electron sectors are treated as a pseudo-spin-1/2.
spinalg::ComplexMatrix electron_pulse(Axis axis, double angle, int sign,
                                      const spinalg::RegisterLayout& layout);

/// exp(-2 pi i H t) over the joint register; block-diagonal over electron
/// sectors, each block a tensor product of per-nucleus SU(2) rotations.
spinalg::ComplexMatrix free_evolution(const model::SpinSystem& system, double duration_us);

/// Nuclear-register evolution of a single electron sector.
spinalg::ComplexMatrix sector_evolution(const model::SpinSystem& system, double m_s,
                                        double duration_us);

/// One bracketed PulsePol unit (four tau_pol/4 free intervals).
spinalg::ComplexMatrix pulsepol_unit(const model::SpinSystem& system, const SequenceSpec& spec);
/// The unit raised to 2 n_pol.
spinalg::ComplexMatrix pulsepol_total(const model::SpinSystem& system, const SequenceSpec& spec);

/// U_x exp(-2 pi i H_novel t_dur) U_x^dagger with
/// H_novel = f_t S_y + sum_l (-f_n Iz^l + a_perp^l S_z Ix^l), t_dur = 2 n_pol tau_pol.
spinalg::ComplexMatrix novel_total(const model::SpinSystem& system, const SequenceSpec& spec);

/// Dispatch on spec.protocol.
spinalg::ComplexMatrix total_unitary(const model::SpinSystem& system, const SequenceSpec& spec);

class ChannelConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Conditional nuclear blocks of a joint unitary acting on the electron
/// initial state: K_beta = <init|U|init>, K_alpha = <flip|U|init>.
/// operators[0] is the no-flip block, operators[1] the flip block.
ChannelKraus sequence_channel(const spinalg::ComplexMatrix& u, const model::ElectronModel& electron);

/// Electron re-preparation exp(-i theta_e S_x)|init>, wait evolution, trace.
ChannelKraus disentangle_channel(const model::SpinSystem& system, double theta_e_rad,
                                 double wait_us);

}  // namespace dnp::sequences
