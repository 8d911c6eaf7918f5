#pragma once

#include <cstdint>
#include <initializer_list>

#include "rfflab/common.hpp"

namespace rfflab {

/// Stream tags keep the random streams of one frame independent.
enum class Stream : std::uint64_t {
  channel = 1,
  payload_bits = 2,
  noise = 3,
  split = 4,
  symbol_errors = 5,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Order-sensitive hash of (parent, fields...). Seeds depend only on the
/// field values, never on loop order or thread scheduling.
constexpr Seed derive_seed(Seed parent, std::initializer_list<std::uint64_t> fields) noexcept {
  std::uint64_t h = mix64(parent);
  for (std::uint64_t f : fields) h = mix64(h ^ mix64(f));
  return h;
}

constexpr std::uint64_t tag(Stream s) noexcept { return static_cast<std::uint64_t>(s); }

}  // namespace rfflab
