#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace csvm {

/// Recorded in every output file so runs can be reproduced.
inline constexpr std::string_view kPrngId = "mt19937_64+seed_seq/libstdc++";

using Rng = std::mt19937_64;

/// Independent generator for (seed, stream). Streams are mixed through
/// seed_seq, so neighbouring stream ids give unrelated sequences.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

/// Stream id for a (repeat, role) pair in multi-dataset experiments.
inline std::uint64_t stream_id(std::uint64_t repeat, std::uint64_t role) { return (repeat << 8) | (role & 0xff); }

} // namespace csvm
