#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "mfbel/time_grid.hpp"

namespace mfbel {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A draw is a
/// pure function of (key, counter), so any path can be regenerated in any
/// order or on any thread.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  [[nodiscard]] Counter operator()(Counter ctr) const noexcept;

 private:
  Key key_;
};

inline constexpr std::uint32_t kNoiseGeneratorVersion = 1;

/// Brownian increments of one path: a pure function of (seed, path_index, i).
struct NoiseGrid {
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
  std::vector<double> increments;

  [[nodiscard]] double terminal() const noexcept;
};

/// Standard normals z_0..z_{n-1} of stream `path_index`.
void fill_standard_normals(std::uint64_t seed, std::uint64_t path_index, std::span<double> out);

/// Brownian increments dW_i ~ N(0, dt) on the grid.
[[nodiscard]] NoiseGrid gen_noise(std::uint64_t seed, std::uint64_t path_index, const TimeGrid& grid);

/// Same as gen_noise but reuses `noise.increments` storage.
void gen_noise_into(std::uint64_t seed, std::uint64_t path_index, const TimeGrid& grid, NoiseGrid& noise);

/// Derives an independent stream family from a base seed.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept;

}  // namespace mfbel
