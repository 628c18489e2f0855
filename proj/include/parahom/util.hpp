#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace parahom {

/// Shortest round-trip decimal text ("%.17g").
std::string format_double(double value);

/// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

/// Mixes a base seed with a stream index (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Runs body(i) for i in [0, count). threads == 0 runs serially in index
/// order; otherwise work is split across up to `threads` workers. Results must
/// be written to per-index slots so the outcome does not depend on scheduling.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace parahom
