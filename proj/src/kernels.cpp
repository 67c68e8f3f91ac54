#include "dnp/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace dnp::spinalg {

namespace {

// Below this dimension the packing overhead of the split-plane kernel wins
// nothing; the serial complex loop is faster.
constexpr int kSplitThreshold = 48;
constexpr int kParallelThreshold = 96;

bool parallel_ok(int n) { return n >= kParallelThreshold && !omp_in_parallel(); }

// C += A*B on n x n row-major real planes with leading dimension ld.
// Register-tiled outer-product micro-kernel: an 8x16 block of C lives in
// accumulator registers across the whole k loop, so C never round-trips
// through cache inside the hot loop. Threads split the j strips; the
// k-summation order per element is fixed, so results do not depend on the
// thread count.
typedef double vd8 __attribute__((vector_size(64), aligned(8), may_alias));

inline vd8 splat(double x) { return vd8{x, x, x, x, x, x, x, x}; }

inline vd8 loadu(const double* p) { return *reinterpret_cast<const vd8*>(p); }

inline void storeu(double* p, vd8 v) { *reinterpret_cast<vd8*>(p) = v; }

constexpr int MR = 8;    // C rows per micro tile
constexpr int NR = 16;   // C columns per micro tile (two vd8)
constexpr int KC = 256;  // k chunk; one packed A block is MC x KC doubles
constexpr int MC = 128;

// kc-long rank-update of an MR x NR C tile from a packed A panel
inline void micro_kernel(const double* apanel, const double* b, int ld, double* crows, int kc) {
  vd8 acc0[MR], acc1[MR];
  for (int r = 0; r < MR; ++r) {
    acc0[r] = splat(0.0);
    acc1[r] = splat(0.0);
  }
  for (int kk = 0; kk < kc; ++kk, b += ld, apanel += MR) {
    const vd8 b0 = loadu(b);
    const vd8 b1 = loadu(b + 8);
    for (int r = 0; r < MR; ++r) {
      const vd8 av = splat(apanel[r]);
      acc0[r] += av * b0;
      acc1[r] += av * b1;
    }
  }
  for (int r = 0; r < MR; ++r) {
    double* crow = crows + static_cast<std::size_t>(r) * ld;
    storeu(crow, loadu(crow) + acc0[r]);
    storeu(crow + 8, loadu(crow + 8) + acc1[r]);
  }
}

void rgemm_acc(int n, int ld, const double* a, const double* b, double* c, bool par) {
  const int jn = n - n % NR;
  const int in = n - n % MR;

  std::vector<double> apack(static_cast<std::size_t>(MC) * KC);
  for (int k0 = 0; k0 < n; k0 += KC) {
    const int kc = std::min(KC, n - k0);
    for (int i0 = 0; i0 < in; i0 += MC) {
      const int mc = std::min(MC, in - i0);
      // pack the A block k-major in MR-wide panels
      for (int ip = 0; ip < mc; ip += MR) {
        double* dst = apack.data() + static_cast<std::size_t>(ip) * kc;
        for (int kk = 0; kk < kc; ++kk)
          for (int r = 0; r < MR; ++r)
            dst[static_cast<std::size_t>(kk) * MR + r] =
                a[static_cast<std::size_t>(i0 + ip + r) * ld + k0 + kk];
      }
#pragma omp parallel for schedule(static) if (par)
      for (int j0 = 0; j0 < jn; j0 += NR) {
        for (int ip = 0; ip < mc; ip += MR)
          micro_kernel(apack.data() + static_cast<std::size_t>(ip) * kc,
                       b + static_cast<std::size_t>(k0) * ld + j0,
                       ld, c + static_cast<std::size_t>(i0 + ip) * ld + j0, kc);
      }
    }
  }

  // leftover rows (n % MR), all columns
  for (int i = in; i < n; ++i) {
    const double* arow = a + static_cast<std::size_t>(i) * ld;
    double* crow = c + static_cast<std::size_t>(i) * ld;
    for (int k = 0; k < n; ++k) {
      const double ak = arow[k];
      const double* bk = b + static_cast<std::size_t>(k) * ld;
#pragma omp simd
      for (int j = 0; j < n; ++j) crow[j] += ak * bk[j];
    }
  }
  // leftover columns (n % NR) of the blocked rows
  if (jn < n) {
    for (int i = 0; i < in; ++i) {
      const double* arow = a + static_cast<std::size_t>(i) * ld;
      double* crow = c + static_cast<std::size_t>(i) * ld;
      for (int k = 0; k < n; ++k) {
        const double ak = arow[k];
        const double* bk = b + static_cast<std::size_t>(k) * ld;
        for (int j = jn; j < n; ++j) crow[j] += ak * bk[j];
      }
    }
  }
}

void require_same_dim(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
  if (a.dim() != b.dim()) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

}  // namespace

ComplexMatrix multiply_serial(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b, "multiply");
  const int n = a.dim();
  ComplexMatrix c(n);
  const cxd* pa = a.data();
  const cxd* pb = b.data();
  cxd* pc = c.data();
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      const cxd aik = pa[static_cast<std::size_t>(i) * n + k];
      const cxd* brow = pb + static_cast<std::size_t>(k) * n;
      cxd* crow = pc + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

ComplexMatrix multiply(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b, "multiply");
  const int n = a.dim();
  if (n < kSplitThreshold) return multiply_serial(a, b);

  // Split-plane product with the Gauss trick: three real GEMMs
  //   t1 = (ar+ai)(br+bi), t2 = ar*br, t3 = ai*bi
  //   cr = t2 - t3, ci = t1 - t2 - t3
  // The plane leading dimension is padded off powers of two to avoid
  // cache-set aliasing between the streamed B rows.
  const int ld = n + 8;
  const std::size_t nn = static_cast<std::size_t>(n) * ld;
  std::vector<double> planes(9 * nn, 0.0);
  double* ar = planes.data();
  double* ai = ar + nn;
  double* br = ai + nn;
  double* bi = br + nn;
  double* sa = bi + nn;
  double* sb = sa + nn;
  double* t1 = sb + nn;
  double* t2 = t1 + nn;
  double* t3 = t2 + nn;

  const cxd* pa = a.data();
  const cxd* pb = b.data();
  for (int i = 0; i < n; ++i) {
    const std::size_t row = static_cast<std::size_t>(i) * ld;
    const std::size_t src = static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      ar[row + j] = pa[src + j].real();
      ai[row + j] = pa[src + j].imag();
      br[row + j] = pb[src + j].real();
      bi[row + j] = pb[src + j].imag();
      sa[row + j] = ar[row + j] + ai[row + j];
      sb[row + j] = br[row + j] + bi[row + j];
    }
  }

  const bool par = parallel_ok(n);
  rgemm_acc(n, ld, sa, sb, t1, par);
  rgemm_acc(n, ld, ar, br, t2, par);
  rgemm_acc(n, ld, ai, bi, t3, par);

  ComplexMatrix c(n);
  cxd* pc = c.data();
  for (int i = 0; i < n; ++i) {
    const std::size_t row = static_cast<std::size_t>(i) * ld;
    const std::size_t dst = static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j)
      pc[dst + j] = cxd{t2[row + j] - t3[row + j], t1[row + j] - t2[row + j] - t3[row + j]};
  }
  return c;
}

ComplexMatrix adjoint(const ComplexMatrix& a) {
  const int n = a.dim();
  ComplexMatrix c(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c(j, i) = std::conj(a(i, j));
  return c;
}

ComplexMatrix sandwich(const ComplexMatrix& k, const ComplexMatrix& rho) {
  return multiply(multiply(k, rho), adjoint(k));
}

ComplexMatrix add(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b, "add");
  ComplexMatrix c = a;
  cxd* pc = c.data();
  const cxd* pb = b.data();
  for (std::size_t i = 0; i < c.size(); ++i) pc[i] += pb[i];
  return c;
}

ComplexMatrix sub(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b, "sub");
  ComplexMatrix c = a;
  cxd* pc = c.data();
  const cxd* pb = b.data();
  for (std::size_t i = 0; i < c.size(); ++i) pc[i] -= pb[i];
  return c;
}

ComplexMatrix scale(const ComplexMatrix& a, cxd factor) {
  ComplexMatrix c = a;
  cxd* pc = c.data();
  for (std::size_t i = 0; i < c.size(); ++i) pc[i] *= factor;
  return c;
}

void add_in_place(ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b, "add_in_place");
  cxd* pa = a.data();
  const cxd* pb = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) pa[i] += pb[i];
}

cxd trace(const ComplexMatrix& a) {
  cxd t{0.0, 0.0};
  for (int i = 0; i < a.dim(); ++i) t += a(i, i);
  return t;
}

double max_abs(const ComplexMatrix& a) {
  double m = 0.0;
  const cxd* p = a.data();
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(p[i]));
  return m;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b, "max_abs_diff");
  double m = 0.0;
  const cxd* pa = a.data();
  const cxd* pb = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(pa[i] - pb[i]));
  return m;
}

bool all_finite(const ComplexMatrix& a) {
  const cxd* p = a.data();
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!std::isfinite(p[i].real()) || !std::isfinite(p[i].imag())) return false;
  return true;
}

double unitarity_error(const ComplexMatrix& u) {
  const ComplexMatrix g = multiply(adjoint(u), u);
  double m = 0.0;
  for (int i = 0; i < g.dim(); ++i)
    for (int j = 0; j < g.dim(); ++j) {
      const cxd want = (i == j) ? cxd{1.0, 0.0} : cxd{0.0, 0.0};
      m = std::max(m, std::abs(g(i, j) - want));
    }
  return m;
}

double hermiticity_error(const ComplexMatrix& a) {
  double m = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = i; j < a.dim(); ++j) m = std::max(m, std::abs(a(i, j) - std::conj(a(j, i))));
  return m;
}

ComplexMatrix matrix_power(const ComplexMatrix& a, int n) {
  if (n < 0) throw std::invalid_argument("matrix_power: negative exponent");
  ComplexMatrix result = ComplexMatrix::identity(a.dim());
  ComplexMatrix base = a;
  while (n > 0) {
    if (n & 1) result = multiply(result, base);
    n >>= 1;
    if (n > 0) base = multiply(base, base);
  }
  return result;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const int na = a.dim(), nb = b.dim();
  ComplexMatrix c(na * nb);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < na; ++j) {
      const cxd aij = a(i, j);
      if (aij == cxd{0.0, 0.0}) continue;
      for (int k = 0; k < nb; ++k)
        for (int l = 0; l < nb; ++l) c(i * nb + k, j * nb + l) = aij * b(k, l);
    }
  return c;
}

ComplexMatrix kron_chain(std::span<const ComplexMatrix> factors) {
  if (factors.empty()) throw std::invalid_argument("kron_chain: empty factor list");
  ComplexMatrix out = factors[0];
  for (std::size_t i = 1; i < factors.size(); ++i) out = kron(out, factors[i]);
  return out;
}

ComplexMatrix kron_chain(const std::vector<ComplexMatrix>& factors) {
  return kron_chain(std::span<const ComplexMatrix>(factors));
}

namespace {

// Bit position (from the most significant end) of a unified slot.
int slot_bit_shift(int unified_slot, const RegisterLayout& layout) {
  const int total_bits = layout.nuclear_count + (layout.has_electron() ? 1 : 0);
  if (unified_slot < 0 || unified_slot >= total_bits)
    throw std::out_of_range("slot index out of range");
  return total_bits - 1 - unified_slot;
}

}  // namespace

ComplexMatrix embed_single_spin(const ComplexMatrix& op, int unified_slot,
                                const RegisterLayout& layout) {
  if (op.dim() != 2) throw std::invalid_argument("embed_single_spin: operator must be 2x2");
  const int shift = slot_bit_shift(unified_slot, layout);
  const int d = layout.total_dim();
  ComplexMatrix out(d);
  for (int i = 0; i < d; ++i) {
    const int bi = (i >> shift) & 1;
    for (int bj = 0; bj < 2; ++bj) {
      const int j = (i & ~(1 << shift)) | (bj << shift);
      out(i, j) = op(bi, bj);
    }
  }
  return out;
}

ComplexMatrix embed_nuclear(const ComplexMatrix& op, int slot, const RegisterLayout& layout) {
  if (slot < 0 || slot >= layout.nuclear_count)
    throw std::out_of_range("embed_nuclear: slot out of range");
  return embed_single_spin(op, slot + (layout.has_electron() ? 1 : 0), layout);
}

ComplexMatrix embed_electron(const ComplexMatrix& op, const RegisterLayout& layout) {
  if (!layout.has_electron())
    throw std::invalid_argument("embed_electron: layout has no electron slot");
  return embed_single_spin(op, 0, layout);
}

ComplexMatrix partial_trace(const ComplexMatrix& rho, const RegisterLayout& layout,
                            std::span<const int> keep) {
  const int total_bits = layout.slot_count();
  if (rho.dim() != layout.total_dim())
    throw std::invalid_argument("partial_trace: dimension mismatch with layout");

  std::vector<int> keep_sorted(keep.begin(), keep.end());
  std::sort(keep_sorted.begin(), keep_sorted.end());
  for (std::size_t i = 0; i < keep_sorted.size(); ++i) {
    if (keep_sorted[i] < 0 || keep_sorted[i] >= total_bits)
      throw std::out_of_range("partial_trace: keep slot out of range");
    if (i > 0 && keep_sorted[i] == keep_sorted[i - 1])
      throw std::invalid_argument("partial_trace: duplicate keep slot");
  }

  std::vector<int> traced;
  for (int s = 0; s < total_bits; ++s)
    if (!std::binary_search(keep_sorted.begin(), keep_sorted.end(), s)) traced.push_back(s);

  const int nk = static_cast<int>(keep_sorted.size());
  const int nt = static_cast<int>(traced.size());
  const int dk = 1 << nk;
  const int dt = 1 << nt;

  std::vector<int> keep_shift(nk), traced_shift(nt);
  for (int s = 0; s < nk; ++s) keep_shift[s] = total_bits - 1 - keep_sorted[s];
  for (int s = 0; s < nt; ++s) traced_shift[s] = total_bits - 1 - traced[s];

  auto scatter = [](int value, const std::vector<int>& shifts) {
    int out = 0;
    const int n = static_cast<int>(shifts.size());
    for (int s = 0; s < n; ++s) out |= ((value >> (n - 1 - s)) & 1) << shifts[s];
    return out;
  };

  ComplexMatrix out(dk);
  for (int r = 0; r < dk; ++r) {
    const int ir = scatter(r, keep_shift);
    for (int c = 0; c < dk; ++c) {
      const int jc = scatter(c, keep_shift);
      cxd sum{0.0, 0.0};
      for (int m = 0; m < dt; ++m) {
        const int t = scatter(m, traced_shift);
        sum += rho(ir | t, jc | t);
      }
      out(r, c) = sum;
    }
  }
  return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& rho, const RegisterLayout& layout,
                            const std::vector<int>& keep) {
  return partial_trace(rho, layout, std::span<const int>(keep));
}

ComplexMatrix trace_out_electron(const ComplexMatrix& rho, const RegisterLayout& layout) {
  if (!layout.has_electron())
    throw std::invalid_argument("trace_out_electron: layout has no electron slot");
  std::vector<int> keep(layout.nuclear_count);
  for (int l = 0; l < layout.nuclear_count; ++l) keep[l] = l + 1;
  return partial_trace(rho, layout, keep);
}

namespace {
ComplexMatrix make2(cxd a, cxd b, cxd c, cxd d) {
  ComplexMatrix m(2);
  m(0, 0) = a;
  m(0, 1) = b;
  m(1, 0) = c;
  m(1, 1) = d;
  return m;
}
}  // namespace

const ComplexMatrix& pauli_x() {
  static const ComplexMatrix m = make2(0, 1, 1, 0);
  return m;
}
const ComplexMatrix& pauli_y() {
  static const ComplexMatrix m = make2(0, cxd{0, -1}, cxd{0, 1}, 0);
  return m;
}
const ComplexMatrix& pauli_z() {
  static const ComplexMatrix m = make2(1, 0, 0, -1);
  return m;
}
const ComplexMatrix& sigma_plus() {
  static const ComplexMatrix m = make2(0, 1, 0, 0);
  return m;
}
const ComplexMatrix& sigma_minus() {
  static const ComplexMatrix m = make2(0, 0, 1, 0);
  return m;
}
const ComplexMatrix& identity2() {
  static const ComplexMatrix m = ComplexMatrix::identity(2);
  return m;
}

ComplexMatrix su2_exponential(double ax, double ay, double az) {
  if (!std::isfinite(ax) || !std::isfinite(ay) || !std::isfinite(az))
    throw std::invalid_argument("su2_exponential: non-finite input");
  const double a = std::sqrt(ax * ax + ay * ay + az * az);
  double sinc;  // sin(a)/a, exact limit 1 at a = 0
  if (a < 1e-8) {
    sinc = 1.0 - a * a / 6.0;
  } else {
    sinc = std::sin(a) / a;
  }
  const double c = std::cos(a);
  const cxd i{0.0, 1.0};
  return make2(c - i * sinc * az, sinc * (-i * ax - ay), sinc * (-i * ax + ay), c + i * sinc * az);
}

}  // namespace dnp::spinalg
