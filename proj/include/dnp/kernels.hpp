#pragma once

#include <span>
#include <vector>

#include "dnp/complex_matrix.hpp"
#include "dnp/register_layout.hpp"

namespace dnp::spinalg {

// ---- products ----------------------------------------------------------
// multiply() routes small matrices through the serial kernel and large ones
// through the OpenMP split-plane kernel (three real GEMMs per complex GEMM).
// multiply_serial() is the plain reference implementation used by tests and
// the kernel benchmark.
ComplexMatrix multiply(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix multiply_serial(const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix adjoint(const ComplexMatrix& a);

/// k * rho * k^dagger
ComplexMatrix sandwich(const ComplexMatrix& k, const ComplexMatrix& rho);

ComplexMatrix add(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix sub(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix scale(const ComplexMatrix& a, cxd factor);
void add_in_place(ComplexMatrix& a, const ComplexMatrix& b);

cxd trace(const ComplexMatrix& a);
double max_abs(const ComplexMatrix& a);
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);
bool all_finite(const ComplexMatrix& a);

/// max |(U^dagger U - I)_{ij}|
double unitarity_error(const ComplexMatrix& u);
/// max |(A - A^dagger)_{ij}|
double hermiticity_error(const ComplexMatrix& a);

/// A^n for n >= 0 by repeated squaring.
ComplexMatrix matrix_power(const ComplexMatrix& a, int n);

// ---- tensor structure ---------------------------------------------------
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix kron_chain(std::span<const ComplexMatrix> factors);
ComplexMatrix kron_chain(const std::vector<ComplexMatrix>& factors);

/// Embed a 2x2 operator on one nuclear slot, identity elsewhere.
ComplexMatrix embed_nuclear(const ComplexMatrix& op, int slot, const RegisterLayout& layout);
/// Embed a 2x2 operator on the electron slot, identity on nuclei.
ComplexMatrix embed_electron(const ComplexMatrix& op, const RegisterLayout& layout);

/// Unified-slot form: slot 0 is the electron when the layout has one,
/// nuclear slot l is unified slot l + (electron present ? 1 : 0).
ComplexMatrix embed_single_spin(const ComplexMatrix& op, int unified_slot,
                                const RegisterLayout& layout);

/// Partial trace keeping the unified slots listed in `keep` (sorted, unique).
ComplexMatrix partial_trace(const ComplexMatrix& rho, const RegisterLayout& layout,
                            std::span<const int> keep);
ComplexMatrix partial_trace(const ComplexMatrix& rho, const RegisterLayout& layout,
                            const std::vector<int>& keep);

/// Trace out the electron slot of a joint-register density matrix.
ComplexMatrix trace_out_electron(const ComplexMatrix& rho, const RegisterLayout& layout);

// ---- Pauli / spin-1/2 constants ------------------------------------------
const ComplexMatrix& pauli_x();
const ComplexMatrix& pauli_y();
const ComplexMatrix& pauli_z();
const ComplexMatrix& sigma_plus();    // |up><down|
const ComplexMatrix& sigma_minus();   // |down><up|
const ComplexMatrix& identity2();

/// exp(-i (ax sx + ay sy + az sz)) in closed form; exactly unitary up to
/// rounding, identity at a = 0.
ComplexMatrix su2_exponential(double ax, double ay, double az);

}  // namespace dnp::spinalg
