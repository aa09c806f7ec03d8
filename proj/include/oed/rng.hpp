#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace oed {

/// Stable 64-bit hash of a label (FNV-1a), used to key random streams by name.
std::uint64_t stream_tag(std::string_view label) noexcept;

/// Counter-based seed splitting: the derived seed depends only on the master
/// seed and the counters, never on how many other streams exist.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> counters) noexcept;

inline std::mt19937_64 make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> counters) {
    return std::mt19937_64(derive_seed(master, counters));
}

}  // namespace oed
