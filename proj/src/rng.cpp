#include "mfbel/rng.hpp"

#include <cmath>
#include <numbers>

namespace mfbel {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

inline std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

Philox4x32::Counter Philox4x32::operator()(Counter ctr) const noexcept {
  Key key = key_;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

double NoiseGrid::terminal() const noexcept {
  double w = 0.0;
  for (double dw : increments) w += dw;
  return w;
}

void fill_standard_normals(std::uint64_t seed, std::uint64_t path_index, std::span<double> out) {
  const Philox4x32 gen(seed);
  const auto path_lo = static_cast<std::uint32_t>(path_index);
  const auto path_hi = static_cast<std::uint32_t>(path_index >> 32);
  constexpr double two_pow_minus_53 = 1.0 / 9007199254740992.0;
  const std::size_t n = out.size();
  for (std::size_t j = 0; 2 * j < n; ++j) {
    const auto bits = gen({static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(j >> 32), path_lo, path_hi});
    const std::uint64_t a = (static_cast<std::uint64_t>(bits[0]) << 32) | bits[1];
    const std::uint64_t b = (static_cast<std::uint64_t>(bits[2]) << 32) | bits[3];
    const double u1 = static_cast<double>((a >> 11) + 1) * two_pow_minus_53;  // (0, 1]
    const double u2 = static_cast<double>(b >> 11) * two_pow_minus_53;        // [0, 1)
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out[2 * j] = radius * std::cos(angle);
    if (2 * j + 1 < n) out[2 * j + 1] = radius * std::sin(angle);
  }
}

void gen_noise_into(std::uint64_t seed, std::uint64_t path_index, const TimeGrid& grid, NoiseGrid& noise) {
  noise.seed = seed;
  noise.path_index = path_index;
  noise.increments.resize(grid.steps());
  fill_standard_normals(seed, path_index, noise.increments);
  const double scale = std::sqrt(grid.dt());
  for (double& dw : noise.increments) dw *= scale;
}

NoiseGrid gen_noise(std::uint64_t seed, std::uint64_t path_index, const TimeGrid& grid) {
  NoiseGrid noise;
  gen_noise_into(seed, path_index, grid, noise);
  return noise;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  return splitmix64(seed ^ splitmix64(salt));
}

}  // namespace mfbel
