#pragma once

#include <cstdint>
#include <random>

namespace dasqos {

using Rng = std::mt19937_64;

/// Independent stream `stream` derived from a master seed. Streams with
/// different ids are decorrelated through seed_seq mixing.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

}  // namespace dasqos
