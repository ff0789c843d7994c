#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace kge {

// 64-bit FNV-1a over a stream name. Used to derive independent child
// streams from one master seed so that components (split, init, sampling,
// shuffling) can be reseeded without affecting each other.
inline uint64_t hash_stream_name(std::string_view name) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : name) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Deterministic RNG wrapper. All distributions are hand-rolled on top of
// mt19937_64 so results do not depend on the standard library's
// implementation-defined distribution algorithms.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    static Rng child(uint64_t master_seed, std::string_view stream) {
        return Rng((master_seed + 0x9e3779b97f4a7c15ull) ^ hash_stream_name(stream));
    }

    uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1)
    double next_double() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // unbiased uniform integer in [0, n)
    uint64_t next_below(uint64_t n) {
        uint64_t threshold = (0 - n) % n;
        for (;;) {
            uint64_t r = gen_();
            if (r >= threshold) return r % n;
        }
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace kge
