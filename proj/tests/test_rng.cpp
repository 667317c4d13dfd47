#include <doctest.h>

#include <atomic>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "mfbel/parallel.hpp"
#include "mfbel/rng.hpp"
#include "mfbel/stats.hpp"

using namespace mfbel;

TEST_CASE("philox4x32-10 reproduces the Random123 known-answer vectors") {
  CHECK(Philox4x32(0)({0, 0, 0, 0}) == Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  const std::uint32_t f = 0xffffffffu;
  CHECK(Philox4x32(~0ULL)({f, f, f, f}) == Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
}

TEST_CASE("noise is a pure function of seed, path and grid") {
  const TimeGrid grid(1.0, 64);
  const NoiseGrid a = gen_noise(7, 3, grid);
  const NoiseGrid b = gen_noise(7, 3, grid);
  CHECK(a.increments == b.increments);
  CHECK(gen_noise(7, 4, grid).increments != a.increments);
  CHECK(gen_noise(8, 3, grid).increments != a.increments);
  CHECK(a.terminal() == doctest::Approx(std::accumulate(a.increments.begin(), a.increments.end(), 0.0)));

  std::vector<double> odd(5), even(6);
  fill_standard_normals(7, 3, odd);
  fill_standard_normals(7, 3, even);
  CHECK(std::equal(odd.begin(), odd.end(), even.begin()));
}

TEST_CASE("increments have mean 0, variance dt and no lag-one correlation") {
  const TimeGrid grid(2.0, 16);
  std::vector<double> values;
  std::vector<double> lag;
  for (std::uint64_t p = 0; p < 20000; ++p) {
    const auto dw = gen_noise(11, p, grid).increments;
    for (std::size_t i = 0; i < dw.size(); ++i) {
      values.push_back(dw[i] / std::sqrt(grid.dt()));
      if (i > 0) lag.push_back(dw[i] * dw[i - 1] / grid.dt());
    }
  }
  const auto s = summarize(values);
  CHECK(std::abs(s.mean) < 4 * s.std_error);
  CHECK(s.variance == doctest::Approx(1.0).epsilon(0.01));
  const auto c = summarize(lag);
  CHECK(std::abs(c.mean) < 4 * c.std_error);
}

TEST_CASE("derived seeds differ per salt") {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t salt = 0; salt < 100; ++salt) seeds.insert(derive_seed(1, salt));
  CHECK(seeds.size() == 100);
  CHECK(derive_seed(1, 5) == derive_seed(1, 5));
}

TEST_CASE("pairwise sums and two-pass summaries") {
  std::vector<double> v(1000);
  std::iota(v.begin(), v.end(), 1.0);
  CHECK(pairwise_sum(v) == 500500.0);
  CHECK(pairwise_sum(std::span<const double>{}) == 0.0);

  const std::vector<double> small{1, 2, 3, 4};
  const auto s = summarize(small);
  CHECK(s.mean == 2.5);
  CHECK(s.variance == doctest::Approx(5.0 / 3.0));
  CHECK(s.std_error == doctest::Approx(std::sqrt(5.0 / 12.0)));
  CHECK(summarize(std::vector<double>{3.0}).variance == 0.0);

  const std::vector<double> linear{0, 1, 2, 3, 4};
  CHECK(trapezoid(linear, 0.5) == doctest::Approx(4.0));
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975));
}

TEST_CASE("parallel blocks run once each and rethrow the first failure") {
  std::vector<std::atomic<int>> hits(37);
  parallel_for_blocks(hits.size(), 4, [&](std::size_t b) { ++hits[b]; });
  for (const auto& h : hits) CHECK(h.load() == 1);

  CHECK_THROWS_AS(parallel_for_blocks(10, 3,
                                      [](std::size_t b) {
                                        if (b == 6) throw std::runtime_error("block 6");
                                      }),
                  std::runtime_error);
  CHECK(resolve_threads(0) >= 1);
  CHECK(resolve_threads(5) == 5);
}
