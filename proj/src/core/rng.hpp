#pragma once

#include <cstdint>
#include <random>

namespace mln {

// splitmix64: all randomness in the artifact derives from one master seed
// through counter-based streams, so reruns are reproducible.
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::mt19937_64 make_engine(std::uint64_t master, std::uint64_t stream) {
    return std::mt19937_64(split_seed(master, stream));
}

}  // namespace mln
