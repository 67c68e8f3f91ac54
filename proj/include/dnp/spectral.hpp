#pragma once

#include <utility>
#include <vector>

#include "dnp/complex_matrix.hpp"

namespace dnp::spinalg {

/// Eigendecomposition of a Hermitian matrix (ascending eigenvalues).
/// Columns of the returned matrix are the eigenvectors.
std::pair<std::vector<double>, ComplexMatrix> eigh(const ComplexMatrix& h);

/// exp(i * factor * H) for Hermitian H, via spectral decomposition.
ComplexMatrix expi_hermitian(const ComplexMatrix& h, double factor);

double min_eigenvalue_hermitian(const ComplexMatrix& h);

struct UnitarySpectral {
  std::vector<double> phases;   // U = V diag(e^{i phase_k}) V^dagger
  ComplexMatrix vectors;
};

/// Spectral decomposition of a unitary. Rejects non-unitary input
/// (unitarity error above UNITARITY_TOL).
UnitarySpectral unitary_spectral(const ComplexMatrix& u);

ComplexMatrix reconstruct(const UnitarySpectral& s);

}  // namespace dnp::spinalg
