#ifndef NSBM_RNG_HPP
#define NSBM_RNG_HPP

#include <cstdint>
#include <random>

namespace nsbm {

// splitmix64 finalizer; used to derive independent substreams from a
// master seed so parallel replications are schedule-independent.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t substream(std::uint64_t master, std::uint64_t index) {
    return mix64(master ^ mix64(index + 1));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(mix64(seed)); }

}  // namespace nsbm

#endif
