#include "dnp/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>

#include "dnp/kernels.hpp"
#include "dnp/spectral.hpp"
#include "dnp/tolerances.hpp"

namespace dnp::engine {

using sequences::ChannelKraus;
using spinalg::ComplexMatrix;
using spinalg::cxd;

namespace {

// Kraus operators with cached adjoints; diagonal operators (all sector
// evolutions of the hyperfine-free NV m_S = 0 level are) apply in O(n^2).
struct PreparedChannel {
  struct Op {
    ComplexMatrix k, k_dag;
    bool diagonal = false;
    std::vector<cxd> diag;
  };
  std::vector<Op> ops;

  explicit PreparedChannel(const ChannelKraus& ch) {
    for (const auto& k : ch.operators) {
      Op op;
      op.k = k;
      const int n = k.dim();
      double off = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j) off = std::max(off, std::abs(k(i, j)));
      op.diagonal = off < 1e-15;
      if (op.diagonal) {
        op.diag.resize(n);
        for (int i = 0; i < n; ++i) op.diag[i] = k(i, i);
      } else {
        op.k_dag = spinalg::adjoint(k);
      }
      ops.push_back(std::move(op));
    }
  }

  ComplexMatrix apply(const ComplexMatrix& rho) const {
    const int n = rho.dim();
    ComplexMatrix acc(n);
    for (const auto& op : ops) {
      if (op.diagonal) {
        for (int i = 0; i < n; ++i) {
          const cxd di = op.diag[i];
          for (int j = 0; j < n; ++j) acc(i, j) += di * rho(i, j) * std::conj(op.diag[j]);
        }
      } else {
        spinalg::add_in_place(acc, spinalg::multiply(spinalg::multiply(op.k, rho), op.k_dag));
      }
    }
    return acc;
  }
};

// signed 2<Iz^l> for every nucleus from the state's populations
std::vector<double> two_iz_from_diag(const std::vector<double>& populations, int n_nuc) {
  std::vector<double> out(n_nuc, 0.0);
  const int d = static_cast<int>(populations.size());
  for (int b = 0; b < d; ++b) {
    const double p = populations[b];
    for (int l = 0; l < n_nuc; ++l) {
      const bool down = (b >> (n_nuc - 1 - l)) & 1;
      out[l] += down ? -p : p;
    }
  }
  return out;
}

std::vector<double> diagonal_of(const ComplexMatrix& rho) {
  std::vector<double> d(rho.dim());
  for (int i = 0; i < rho.dim(); ++i) d[i] = rho(i, i).real();
  return d;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

std::vector<double> RunResult::final_per_spin_polarization() const {
  std::vector<double> out(two_iz.back().size());
  for (std::size_t l = 0; l < out.size(); ++l) out[l] = std::abs(two_iz.back()[l]);
  return out;
}

ComplexMatrix initial_nuclear_state(int n_nuc) {
  if (n_nuc < 1) throw std::invalid_argument("initial_nuclear_state: n_nuc must be >= 1");
  const int d = 1 << n_nuc;
  ComplexMatrix rho(d);
  const double p = 1.0 / static_cast<double>(d);
  for (int i = 0; i < d; ++i) rho(i, i) = p;
  return rho;
}

ComplexMatrix apply_channel(const ComplexMatrix& rho, const ChannelKraus& channel) {
  if (channel.operators.empty() || channel.operators.front().dim() != rho.dim())
    throw std::invalid_argument("apply_channel: dimension mismatch");
  PreparedChannel prepared(channel);
  ComplexMatrix out = prepared.apply(rho);
  const double drift = std::abs(spinalg::trace(out) - spinalg::trace(rho));
  if (drift > TRACE_DRIFT_TOL)
    throw NumericalHealthError("apply_channel: trace drift " + std::to_string(drift));
  return out;
}

ComplexMatrix decohere_diag(const ComplexMatrix& rho) {
  ComplexMatrix out(rho.dim());
  for (int i = 0; i < rho.dim(); ++i) out(i, i) = rho(i, i);
  return out;
}

std::vector<double> MarkovMatrix::apply(const std::vector<double>& p) const {
  std::vector<double> out(dim, 0.0);
  for (int i = 0; i < dim; ++i) {
    const double* row = m.data() + static_cast<std::size_t>(i) * dim;
    double s = 0.0;
    for (int j = 0; j < dim; ++j) s += row[j] * p[j];
    out[i] = s;
  }
  return out;
}

MarkovMatrix incoherent_markov(const ChannelKraus& channel) {
  const int n = channel.operators.front().dim();
  MarkovMatrix mm;
  mm.dim = n;
  mm.m.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (const auto& k : channel.operators)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) mm.m[static_cast<std::size_t>(i) * n + j] += std::norm(k(i, j));
  for (int j = 0; j < n; ++j) {
    double col = 0.0;
    for (int i = 0; i < n; ++i) col += mm.m[static_cast<std::size_t>(i) * n + j];
    if (std::abs(col - 1.0) > KRAUS_COMPLETENESS_TOL)
      throw sequences::ChannelConsistencyError("incoherent_markov: column sum " +
                                               std::to_string(col));
  }
  return mm;
}

RunResult run(const model::SpinSystem& system, const sequences::SequenceSpec& spec, RunMode mode,
              int n_rep) {
  system.validate();
  spec.validate();
  if (n_rep < 1) throw std::invalid_argument("run: n_rep must be >= 1");
  if (mode == RunMode::CoherentWithDisentangle && !spec.disentangle)
    throw std::invalid_argument("run: disentangle mode requires a disentangle spec");

  const auto t0 = std::chrono::steady_clock::now();
  const int n_nuc = system.n_nuc();
  const int d = 1 << n_nuc;

  const ComplexMatrix u = sequences::total_unitary(system, spec);
  const ChannelKraus channel = sequences::sequence_channel(u, system.electron);

  RunResult result;
  result.mode = mode;
  result.n_rep = n_rep;
  result.health.completeness_residual = channel.completeness_residual();
  result.two_iz.reserve(n_rep + 1);
  result.mean_two_iz.reserve(n_rep + 1);

  auto record = [&](const std::vector<double>& populations) {
    result.two_iz.push_back(two_iz_from_diag(populations, n_nuc));
    result.mean_two_iz.push_back(mean(result.two_iz.back()));
  };

  if (mode == RunMode::Incoherent) {
    const MarkovMatrix mm = incoherent_markov(channel);
    std::vector<double> p(d, 1.0 / static_cast<double>(d));
    record(p);
    for (int rep = 0; rep < n_rep; ++rep) {
      p = mm.apply(p);
      record(p);
    }
    double tr = 0.0, pmin = 0.0;
    for (double x : p) {
      tr += x;
      pmin = std::min(pmin, x);
    }
    result.health.max_trace_drift = std::abs(tr - 1.0);
    result.health.min_final_eigenvalue = pmin;
    result.final_populations = std::move(p);
    result.diagonal_only = true;
  } else {
    PreparedChannel seq_channel(channel);
    std::unique_ptr<PreparedChannel> dis_channel;
    if (mode == RunMode::CoherentWithDisentangle) {
      const ChannelKraus dch = sequences::disentangle_channel(
          system, spec.disentangle->theta_e_rad, spec.disentangle_wait());
      result.health.completeness_residual =
          std::max(result.health.completeness_residual, dch.completeness_residual());
      dis_channel = std::make_unique<PreparedChannel>(dch);
    }

    ComplexMatrix rho = initial_nuclear_state(n_nuc);
    record(diagonal_of(rho));
    for (int rep = 0; rep < n_rep; ++rep) {
      rho = seq_channel.apply(rho);
      if (dis_channel) rho = dis_channel->apply(rho);
      const double drift = std::abs(spinalg::trace(rho) - cxd{1.0, 0.0});
      result.health.max_trace_drift = std::max(result.health.max_trace_drift, drift);
      if (drift > TRACE_DRIFT_TOL)
        throw NumericalHealthError("run: trace drift " + std::to_string(drift) +
                                   " at repetition " + std::to_string(rep + 1));
      record(diagonal_of(rho));
    }
    result.health.min_final_eigenvalue = spinalg::min_eigenvalue_hermitian(rho);
    result.final_state = std::move(rho);
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

ComplexMatrix pair_density_matrix(const ComplexMatrix& rho_n, int p, int q) {
  if (p == q) throw std::invalid_argument("pair_density_matrix: p and q must differ");
  int n_nuc = 0;
  while ((1 << n_nuc) < rho_n.dim()) ++n_nuc;
  if ((1 << n_nuc) != rho_n.dim())
    throw std::invalid_argument("pair_density_matrix: dimension is not a power of two");
  if (p < 0 || q < 0 || p >= n_nuc || q >= n_nuc)
    throw std::out_of_range("pair_density_matrix: index out of range");

  const auto layout = spinalg::RegisterLayout::nuclear_only(n_nuc);
  const int lo = std::min(p, q), hi = std::max(p, q);
  ComplexMatrix reduced = spinalg::partial_trace(rho_n, layout, std::vector<int>{lo, hi});
  if (p < q) return reduced;

  // swap the two slots so that p comes first
  ComplexMatrix swapped(4);
  auto sw = [](int b) { return ((b & 1) << 1) | ((b >> 1) & 1); };
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) swapped(sw(i), sw(j)) = reduced(i, j);
  return swapped;
}

}  // namespace dnp::engine
