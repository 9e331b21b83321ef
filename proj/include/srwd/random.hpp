#pragma once

#include <cstdint>
#include <random>

namespace srwd {

using Rng = std::mt19937_64;

/// Independent generator for (seed, index, tag). Work items seeded this way
/// produce the same numbers whether they run serially or in parallel.
inline Rng make_stream(std::uint64_t seed, std::uint64_t index = 0, std::uint64_t tag = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
  return Rng(seq);
}

/// Stream tags.
namespace stream {
inline constexpr std::uint64_t kKernel = 0x4b45524eULL;
inline constexpr std::uint64_t kNoise = 0x4e4f4953ULL;
inline constexpr std::uint64_t kDataset = 0x44415441ULL;
inline constexpr std::uint64_t kInit = 0x494e4954ULL;
inline constexpr std::uint64_t kShuffle = 0x53485546ULL;
inline constexpr std::uint64_t kOnline = 0x4f4e4c4eULL;
}  // namespace stream

}  // namespace srwd
