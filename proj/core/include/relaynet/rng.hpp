#pragma once

#include <cstdint>
#include <random>

namespace relaynet {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based seed derivation: the result depends only on the arguments,
/// never on how many other streams were drawn before.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t index = 0) {
    return mix64(mix64(mix64(root) ^ stream) ^ (index * 0xd1342543de82ef95ULL + 1));
}

enum Stream : std::uint64_t {
    kTopology = 0x746f706fULL,
    kChannelBU = 0x63684255ULL,
    kChannelBR = 0x63684252ULL,
    kChannelRU = 0x63685255ULL,
    kRandomGroup = 0x72616e64ULL,
};

using Engine = std::mt19937_64;

} // namespace relaynet
