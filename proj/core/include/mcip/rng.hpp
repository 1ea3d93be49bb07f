#pragma once

#include <cstdint>

namespace mcip {

/// Seedable splitmix64 generator. Used everywhere randomness is needed so
/// that every run is reproducible bit-for-bit across platforms (the standard
/// library distributions are not portable across implementations).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform value in [0, bound) via rejection sampling, bias-free.
    std::uint64_t uniform(std::uint64_t bound) {
        // largest multiple of bound that fits in 64 bits
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % bound;
    }

    /// Derive an independent seed from (base, salt) without touching the
    /// generator state. Used for per-trial seeds in experiments.
    static std::uint64_t derive(std::uint64_t base, std::uint64_t salt) {
        Rng r(base ^ (salt * 0x9e3779b97f4a7c15ULL + 0x1234567890abcdefULL));
        r.next_u64();
        return r.next_u64();
    }

private:
    std::uint64_t state_;
};

} // namespace mcip
