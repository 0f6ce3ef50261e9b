#pragma once

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "jjring/grid.hpp"
#include "jjring/linalg.hpp"

namespace jjring {

/// Unitary 2D transform between the charge and phase bases of a PhaseGrid,
///   psi(k+, k-) = (1/L) sum_{n+, n-} exp(i 2 pi (k+ n+ + k- n-) / L) c(n+, n-),
/// with signed indices on both sides. Backed by FFTW; the signed-index offset
/// is absorbed into precomputed twiddle factors.
class GridFourier {
 public:
  explicit GridFourier(const PhaseGrid& grid);
  ~GridFourier();
  GridFourier(const GridFourier&) = delete;
  GridFourier& operator=(const GridFourier&) = delete;

  void to_phase(std::span<const cplx> charge, std::span<cplx> phase) const {
    run(charge, phase, +1);
  }
  void to_charge(std::span<const cplx> phase, std::span<cplx> charge) const {
    run(phase, charge, -1);
  }

  const PhaseGrid& grid() const noexcept { return grid_; }

 private:
  void run(std::span<const cplx> in, std::span<cplx> out, int sign) const;

  PhaseGrid grid_;
  std::vector<cplx> twiddle_;  // exp(i 2 pi k0 p / L), k0 = min index
  cplx global_;                // exp(i 4 pi k0^2 / L) / L
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

namespace detail {
// The FFTW planner is not thread-safe; execution with new-array calls is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

inline GridFourier::GridFourier(const PhaseGrid& grid) : grid_(grid) {
  const int L = grid.size();
  const int k0 = grid.min_index();
  twiddle_.resize(L);
  for (int p = 0; p < L; ++p) twiddle_[p] = std::polar(1.0, kTwoPi * k0 * p / L);
  global_ = std::polar(1.0 / L, 2.0 * kTwoPi * double(k0) * k0 / L);

  std::vector<cplx> a(grid.dim()), b(grid.dim());
  auto* pa = reinterpret_cast<fftw_complex*>(a.data());
  auto* pb = reinterpret_cast<fftw_complex*>(b.data());
  std::lock_guard lock(detail::fftw_planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_ = fftw_plan_dft_2d(L, L, pa, pb, FFTW_FORWARD, flags);
  backward_ = fftw_plan_dft_2d(L, L, pa, pb, FFTW_BACKWARD, flags);
  if (!forward_ || !backward_) throw NumericalError("GridFourier: FFTW planning failed");
}

inline GridFourier::~GridFourier() {
  std::lock_guard lock(detail::fftw_planner_mutex());
  if (forward_) fftw_destroy_plan(forward_);
  if (backward_) fftw_destroy_plan(backward_);
}

inline void GridFourier::run(std::span<const cplx> in, std::span<cplx> out, int sign) const {
  const int L = grid_.size();
  if (in.size() != grid_.dim() || out.size() != grid_.dim()) {
    throw ContractError("GridFourier: vector size does not match grid");
  }
  auto tw = [&](int p) { return sign > 0 ? twiddle_[p] : std::conj(twiddle_[p]); };
  std::vector<cplx> scratch(grid_.dim());
  for (int p = 0; p < L; ++p) {
    for (int q = 0; q < L; ++q) {
      const std::size_t i = static_cast<std::size_t>(p) * L + q;
      scratch[i] = in[i] * tw(p) * tw(q);
    }
  }
  std::vector<cplx> result(grid_.dim());
  fftw_execute_dft(sign > 0 ? backward_ : forward_,
                   reinterpret_cast<fftw_complex*>(scratch.data()),
                   reinterpret_cast<fftw_complex*>(result.data()));
  const cplx g = sign > 0 ? global_ : std::conj(global_);
  for (int p = 0; p < L; ++p) {
    for (int q = 0; q < L; ++q) {
      const std::size_t i = static_cast<std::size_t>(p) * L + q;
      out[i] = result[i] * tw(p) * tw(q) * g;
    }
  }
}

/// Shared transform for a grid size; plans are built once per size.
inline std::shared_ptr<const GridFourier> fourier_for(const PhaseGrid& grid) {
  // Planner mutex must outlive the cache, so construct it first.
  detail::fftw_planner_mutex();
  static std::mutex m;
  static std::map<int, std::shared_ptr<const GridFourier>> cache;
  std::lock_guard lock(m);
  auto& slot = cache[grid.size()];
  if (!slot) slot = std::make_shared<const GridFourier>(grid);
  return slot;
}

}  // namespace jjring
