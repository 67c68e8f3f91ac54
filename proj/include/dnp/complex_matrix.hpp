#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace dnp::spinalg {

using cxd = std::complex<double>;

/// Dense square complex matrix, row-major storage.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;

  explicit ComplexMatrix(int dim) : dim_(dim) {
    if (dim <= 0) throw std::invalid_argument("ComplexMatrix: dim must be positive");
    a_.assign(static_cast<std::size_t>(dim) * dim, cxd{0.0, 0.0});
  }

  static ComplexMatrix identity(int dim) {
    ComplexMatrix m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  int dim() const { return dim_; }
  bool empty() const { return dim_ == 0; }

  cxd& operator()(int r, int c) { return a_[static_cast<std::size_t>(r) * dim_ + c]; }
  const cxd& operator()(int r, int c) const { return a_[static_cast<std::size_t>(r) * dim_ + c]; }

  cxd* data() { return a_.data(); }
  const cxd* data() const { return a_.data(); }

  std::size_t size() const { return a_.size(); }

 private:
  int dim_ = 0;
  std::vector<cxd> a_;
};

}  // namespace dnp::spinalg
