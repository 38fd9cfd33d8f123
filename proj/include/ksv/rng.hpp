#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace ksv {

using Rng = std::mt19937_64;

/// Independent stream keyed by a tuple of 64-bit words. std::seed_seq only
/// keeps 32 bits per entry, so each word is split in two.
inline Rng derive_rng(std::initializer_list<std::uint64_t> key) {
  std::vector<std::uint32_t> words;
  words.reserve(key.size() * 2);
  for (std::uint64_t k : key) {
    words.push_back(static_cast<std::uint32_t>(k));
    words.push_back(static_cast<std::uint32_t>(k >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

}  // namespace ksv
