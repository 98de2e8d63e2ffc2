#pragma once
// Seeded randomness. The generator is splitmix64 (Steele, Lea, Flood 2014):
// a 64-bit counter advanced by the golden-ratio increment and finalized by
// a mix function. Pure integer arithmetic, so the uint64 stream is identical
// on every platform for a given seed. Streams are single-owner; never share
// one instance across concurrent consumers.

#include <cstdint>
#include <string_view>
#include <vector>

namespace crossview {

class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53 bits of precision.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Unbiased integer in [0, n) by rejection. n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r;
        do {
            r = next_u64();
        } while (r >= limit);
        return r % n;
    }

    // Standard normal via the polar method; the spare variate is cached.
    double gaussian();

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Deterministic sub-seed derivation: FNV-1a over the tag, mixed with the
// root seed and index through the splitmix64 finalizer. Every random
// decision in the artifact draws from a sub-seed derived this way from the
// single root seed.
std::uint64_t derive_seed(std::uint64_t root, std::string_view tag, std::uint64_t index = 0);

}  // namespace crossview
