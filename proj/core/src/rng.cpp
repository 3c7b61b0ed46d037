#include "curb/rng.hpp"

#include <cmath>

namespace curb {

double Rng::exponential() { return -std::log(uniform_open0()); }

std::uint64_t Rng::below(std::uint64_t n) {
    // Reject the top partial block so every residue is equally likely.
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
}

Rng Rng::substream(std::string_view key) const { return Rng(derive_seed(seed_, key)); }

Rng Rng::substream(std::uint64_t key) const { return Rng(mix64(seed_ ^ mix64(key + 0x9e3779b97f4a7c15ULL))); }

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view key) {
    // FNV-1a over the key, then mixed with the base seed.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : key) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return mix64(base ^ mix64(h));
}

}  // namespace curb
