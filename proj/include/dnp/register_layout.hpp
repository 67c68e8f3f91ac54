#pragma once

#include <stdexcept>

namespace dnp::spinalg {

/// Slot ordering of a spin register: electron slot first (when present),
/// then nuclei in declared order. Slot 0 of the nuclear part is the most
/// significant bit of the basis index after the electron bit.
struct RegisterLayout {
  int electron_dim = 2;   // 1 for nuclear-only registers
  int nuclear_count = 0;

  RegisterLayout() = default;
  RegisterLayout(int e_dim, int n_nuc) : electron_dim(e_dim), nuclear_count(n_nuc) {
    if (e_dim != 1 && e_dim != 2)
      throw std::invalid_argument("RegisterLayout: electron_dim must be 1 or 2");
    if (n_nuc < 0 || n_nuc > 16)
      throw std::invalid_argument("RegisterLayout: nuclear_count out of range");
  }

  static RegisterLayout joint(int n_nuc) { return RegisterLayout(2, n_nuc); }
  static RegisterLayout nuclear_only(int n_nuc) { return RegisterLayout(1, n_nuc); }

  int nuclear_dim() const { return 1 << nuclear_count; }
  int total_dim() const { return electron_dim * nuclear_dim(); }
  bool has_electron() const { return electron_dim > 1; }

  /// Number of slots in the unified indexing (electron slot, if any, is slot 0).
  int slot_count() const { return nuclear_count + (has_electron() ? 1 : 0); }
};

}  // namespace dnp::spinalg
