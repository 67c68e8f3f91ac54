#include "dnp/spectral.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "dnp/kernels.hpp"
#include "dnp/tolerances.hpp"

namespace dnp::spinalg {

std::pair<std::vector<double>, ComplexMatrix> eigh(const ComplexMatrix& h) {
  const int n = h.dim();
  ComplexMatrix vecs = h;  // overwritten with eigenvectors as columns
  std::vector<double> vals(n);
  const int info = LAPACKE_zheev(LAPACK_ROW_MAJOR, 'V', 'U', n, vecs.data(), n, vals.data());
  if (info != 0) throw std::runtime_error("eigh: zheev failed, info=" + std::to_string(info));
  return {std::move(vals), std::move(vecs)};
}

ComplexMatrix expi_hermitian(const ComplexMatrix& h, double factor) {
  auto [vals, v] = eigh(h);
  const int n = h.dim();
  ComplexMatrix scaled = v;
  for (int j = 0; j < n; ++j) {
    const cxd phase = std::exp(cxd{0.0, factor * vals[j]});
    for (int i = 0; i < n; ++i) scaled(i, j) *= phase;
  }
  return multiply(scaled, adjoint(v));
}

double min_eigenvalue_hermitian(const ComplexMatrix& h) {
  return eigh(h).first.front();
}

UnitarySpectral unitary_spectral(const ComplexMatrix& u) {
  if (unitarity_error(u) >= UNITARITY_TOL)
    throw std::invalid_argument("unitary_spectral: input is not unitary");
  const int n = u.dim();

  // Diagonalize the Hermitian part (U + U^dagger)/2, then split degenerate
  // eigenspaces with (U - U^dagger)/2i, which commutes with it for normal U.
  const ComplexMatrix ud = adjoint(u);
  ComplexMatrix hc(n), hs(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      hc(i, j) = (u(i, j) + ud(i, j)) / 2.0;
      hs(i, j) = (u(i, j) - ud(i, j)) / cxd{0.0, 2.0};
    }
  auto [cvals, v] = eigh(hc);
  const ComplexMatrix hv = multiply(hs, v);

  constexpr double cluster_tol = 1e-7;
  int start = 0;
  while (start < n) {
    int end = start + 1;
    while (end < n && cvals[end] - cvals[end - 1] < cluster_tol) ++end;
    const int m = end - start;
    if (m > 1) {
      ComplexMatrix block(m);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          cxd sum{0.0, 0.0};
          for (int r = 0; r < n; ++r) sum += std::conj(v(r, start + a)) * hv(r, start + b);
          block(a, b) = sum;
        }
      auto [bvals, w] = eigh(block);
      (void)bvals;
      std::vector<cxd> rotated(static_cast<std::size_t>(n) * m);
      for (int r = 0; r < n; ++r)
        for (int b = 0; b < m; ++b) {
          cxd sum{0.0, 0.0};
          for (int a = 0; a < m; ++a) sum += v(r, start + a) * w(a, b);
          rotated[static_cast<std::size_t>(r) * m + b] = sum;
        }
      for (int r = 0; r < n; ++r)
        for (int b = 0; b < m; ++b) v(r, start + b) = rotated[static_cast<std::size_t>(r) * m + b];
    }
    start = end;
  }

  UnitarySpectral out;
  out.phases.resize(n);
  const ComplexMatrix uv = multiply(u, v);
  for (int k = 0; k < n; ++k) {
    cxd lambda{0.0, 0.0};
    for (int r = 0; r < n; ++r) lambda += std::conj(v(r, k)) * uv(r, k);
    out.phases[k] = std::arg(lambda);
  }
  out.vectors = std::move(v);
  return out;
}

ComplexMatrix reconstruct(const UnitarySpectral& s) {
  const int n = s.vectors.dim();
  ComplexMatrix scaled = s.vectors;
  for (int j = 0; j < n; ++j) {
    const cxd phase = std::exp(cxd{0.0, s.phases[j]});
    for (int i = 0; i < n; ++i) scaled(i, j) *= phase;
  }
  return multiply(scaled, adjoint(s.vectors));
}

}  // namespace dnp::spinalg
