#pragma once

#include <cstddef>
#include <functional>

namespace mfbel {

/// Runs body(block) for block in [0, n_blocks) on up to `threads` workers.
/// Blocks are independent; callers that need reproducible sums write
/// per-block results and reduce them in block order afterwards.
void parallel_for_blocks(std::size_t n_blocks, unsigned threads,
                         const std::function<void(std::size_t)>& body);

/// Resolves 0 to the hardware concurrency.
[[nodiscard]] unsigned resolve_threads(unsigned requested) noexcept;

}  // namespace mfbel
