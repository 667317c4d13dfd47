#include "mfbel/stats.hpp"

#include <algorithm>

namespace mfbel {

double pairwise_sum(std::span<const double> values) noexcept {
  constexpr std::size_t kLeaf = 32;
  if (values.size() <= kLeaf) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

SampleSummary summarize(std::span<const double> values) {
  SampleSummary out;
  out.count = values.size();
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = pairwise_sum(values) / n;
  if (values.size() < 2) return out;

  // Second pass over centred squares, chunked so no temporary of size n is needed.
  constexpr std::size_t kChunk = 4096;
  double buffer[kChunk];
  double sq = 0.0;
  for (std::size_t start = 0; start < values.size(); start += kChunk) {
    const std::size_t len = std::min(kChunk, values.size() - start);
    for (std::size_t i = 0; i < len; ++i) {
      const double d = values[start + i] - out.mean;
      buffer[i] = d * d;
    }
    sq += pairwise_sum(std::span<const double>(buffer, len));
  }
  out.variance = sq / (n - 1.0);
  out.std_error = std::sqrt(out.variance / n);
  return out;
}

double trapezoid(std::span<const double> samples, double dt) noexcept {
  if (samples.size() < 2) return 0.0;
  double interior = pairwise_sum(samples.subspan(1, samples.size() - 2));
  return dt * (interior + 0.5 * (samples.front() + samples.back()));
}

}  // namespace mfbel
