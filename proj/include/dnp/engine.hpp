#pragma once

#include <stdexcept>
#include <vector>

#include "dnp/complex_matrix.hpp"
#include "dnp/model.hpp"
#include "dnp/sequences.hpp"

namespace dnp::engine {

enum class RunMode { Coherent, Incoherent, CoherentWithDisentangle };

class NumericalHealthError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunHealth {
  double max_trace_drift = 0.0;
  double completeness_residual = 0.0;
  double min_final_eigenvalue = 0.0;
};

/// Trajectories store signed 2<Iz^l>; polarizations take absolute values
/// only at reporting, per the sign convention used for buildup curves.
struct RunResult {
  RunMode mode = RunMode::Coherent;
  int n_rep = 0;
  std::vector<std::vector<double>> two_iz;   // [n_rep+1][n_nuc], signed
  std::vector<double> mean_two_iz;           // [n_rep+1], signed
  spinalg::ComplexMatrix final_state;        // coherent modes
  std::vector<double> final_populations;     // incoherent mode
  bool diagonal_only = false;
  RunHealth health;
  double wall_seconds = 0.0;

  int n_nuc() const { return two_iz.empty() ? 0 : static_cast<int>(two_iz.front().size()); }
  double per_spin_polarization(int rep, int l) const { return std::abs(two_iz[rep][l]); }
  double total_polarization(int rep) const { return std::abs(mean_two_iz[rep]); }
  std::vector<double> final_per_spin_polarization() const;
  double final_total_polarization() const { return std::abs(mean_two_iz.back()); }
};

/// Maximally mixed nuclear state 1/2^n.
spinalg::ComplexMatrix initial_nuclear_state(int n_nuc);

/// rho' = sum_k K_k rho K_k^dagger, with a trace-drift health check.
spinalg::ComplexMatrix apply_channel(const spinalg::ComplexMatrix& rho,
                                     const sequences::ChannelKraus& channel);

/// Zero all off-diagonal elements.
spinalg::ComplexMatrix decohere_diag(const spinalg::ComplexMatrix& rho);

/// Population transfer matrix M_ij = sum_k |(K_k)_ij|^2 (column-stochastic).
struct MarkovMatrix {
  int dim = 0;
  std::vector<double> m;   // row-major
  std::vector<double> apply(const std::vector<double>& p) const;
};
MarkovMatrix incoherent_markov(const sequences::ChannelKraus& channel);

RunResult run(const model::SpinSystem& system, const sequences::SequenceSpec& spec, RunMode mode,
              int n_rep);

/// Two-spin reduced density matrix of nuclei p and q (slot order p then q).
spinalg::ComplexMatrix pair_density_matrix(const spinalg::ComplexMatrix& rho_n, int p, int q);

}  // namespace dnp::engine
