#pragma once

#include <cstddef>
#include <string>

#include "jjring/error.hpp"
#include "jjring/linalg.hpp"

namespace jjring {

/// Square L x L grid shared by the (phi_plus, phi_minus) phase basis and the
/// (n_plus, n_minus) charge basis. Both axes use the signed index range
/// [-L/2 + 1, L/2]; storage is row-major with the "plus" axis outermost.
class PhaseGrid {
 public:
  explicit PhaseGrid(int size) : size_(size) {
    if (size <= 0 || size % 6 != 0) {
      throw ContractError("PhaseGrid: size must be a positive multiple of 6, got " +
                          std::to_string(size));
    }
  }

  int size() const noexcept { return size_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(size_) * size_; }

  int min_index() const noexcept { return -size_ / 2 + 1; }
  int max_index() const noexcept { return size_ / 2; }

  /// Storage position (0..L-1) of a signed index, wrapped cyclically.
  int position(int index) const noexcept {
    int p = (index - min_index()) % size_;
    return p < 0 ? p + size_ : p;
  }

  /// Signed index stored at a position.
  int index(int position) const noexcept { return position + min_index(); }

  /// Phase value 2*pi*k/L of a signed index.
  double phase(int index) const noexcept { return kTwoPi * index / size_; }

  std::size_t flat(int plus_index, int minus_index) const noexcept {
    return static_cast<std::size_t>(position(plus_index)) * size_ + position(minus_index);
  }

  bool operator==(const PhaseGrid&) const = default;

 private:
  int size_;
};

}  // namespace jjring
