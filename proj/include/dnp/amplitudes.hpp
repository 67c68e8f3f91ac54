#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include "dnp/complex_matrix.hpp"
#include "dnp/model.hpp"
#include "dnp/sequences.hpp"

namespace dnp::amplitudes {

/// Transition-amplitude coefficients of the two-identical-nuclei operator
/// decomposition of the conditional blocks of a sequence unitary:
///   flip block     = a+ (s+^1 + s+^2) + a- (s-^1 + s-^2)
///                  + a-z (s-^1 sz^2 + sz^1 s-^2) + a+z (s+^1 sz^2 + sz^1 s+^2)
///   no-flip block  = be 1 + bz (sz^1 + sz^2) + bzz sz^1 sz^2
///                  + bpm (s+^1 s-^2 + s-^1 s+^2) + bpp (s+^1 s+^2 + s-^1 s-^2)
struct TransitionAmplitudeSet {
  std::complex<double> alpha_plus{}, alpha_minus{}, alpha_plus_z{}, alpha_minus_z{};
  std::complex<double> beta_e{}, beta_z{}, beta_zz{}, beta_pm{}, beta_pp{};
};

class BasisIncompletenessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hilbert-Schmidt projection of the conditional blocks of a joint unitary
/// (two identical nuclei) onto the operator set above. Throws
/// BasisIncompletenessError if the blocks do not reconstruct to 1e-8.
TransitionAmplitudeSet extract_amplitudes(const spinalg::ComplexMatrix& u_joint,
                                          double* reconstruction_residual = nullptr);

/// Closed-form amplitudes as functions of the per-quarter precession phase
/// phi = 2 pi f_p tau_pol / 4 and the tilt angle theta, for the spin-1/2
/// model with a_par = 0, uniform a_perp and n_pol = 1. Closed forms exist
/// for the four alphas and beta_pm/beta_pp; beta_e, beta_z, beta_zz are
/// returned as NaN (see series_amplitudes for their expansions).
TransitionAmplitudeSet analytic_amplitudes(double phi, double theta);

/// Third-order expansions in theta of all nine coefficients.
TransitionAmplitudeSet series_amplitudes(double phi, double theta);

/// Small-theta limits at the resonance phase phi = 3 pi / 4.
TransitionAmplitudeSet resonance_limits(double theta);

/// Map (phi, theta) to a concrete two-nucleus spin-1/2 system and the
/// resonant PulsePol spec producing that phase (f_n = 1 MHz internally).
struct PhasePoint {
  model::SpinSystem system;
  sequences::SequenceSpec spec;
};
PhasePoint phase_point(double phi, double theta, sequences::Protocol protocol);

enum class ScanKind { TauPol, APerp, TargetFrequency };

struct ScanSpec {
  ScanKind kind = ScanKind::TauPol;
  double start = 0.0;
  double stop = 0.0;
  int points = 0;
};

struct SpectrumRow {
  double scan_value = 0.0;
  TransitionAmplitudeSet amps;
};

/// Per grid point, build the sequence unitary and extract amplitudes.
/// A_perp scans re-target the resonance per point (f_t = f_p); tau scans
/// leave f_t at its 3/(2 tau) default; frequency scans set f_t directly.
std::vector<SpectrumRow> amplitude_spectrum(const model::SpinSystem& base,
                                            const sequences::SequenceSpec& seq,
                                            const ScanSpec& scan);

struct Extremum {
  double x = 0.0;       // quadratically refined position
  double value = 0.0;   // grid value at the winning point
  int index = 0;
  double grid_step = 0.0;
};

Extremum find_maximum(const std::vector<double>& xs, const std::vector<double>& ys);
Extremum find_minimum(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace dnp::amplitudes
