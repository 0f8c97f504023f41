#pragma once

// Labelled random streams derived from a master seed. Every draw is keyed by
// (seed, label, index) so adding a new stream, or reordering sites, never
// perturbs existing draws.

#include <cstdint>
#include <random>
#include <string_view>

namespace deferral::rng {

constexpr std::uint64_t label_hash(std::string_view label) {
  std::uint64_t h = 14695981039346656037ull; // FNV-1a
  for (char ch : label) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ull;
  }
  return h;
}

using Engine = std::mt19937_64;

inline Engine stream(std::uint64_t seed, std::string_view label, std::uint64_t index) {
  const std::uint64_t lh = label_hash(label);
  std::seed_seq seq{
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(lh),   static_cast<std::uint32_t>(lh >> 32),
      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
  };
  return Engine(seq);
}

} // namespace deferral::rng
