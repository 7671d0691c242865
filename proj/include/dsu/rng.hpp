#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dsu {

// Deterministic 64-bit generator (splitmix64). Self-contained so that
// sequences are identical across platforms and standard libraries; the
// <random> distributions are implementation-defined and would break the
// byte-identical-run contract.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Inclusive integer range.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next_u64() % span);
    }

    // Box-Muller; draws two uniforms per call, no spare cached.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    bool coin(double p = 0.5) { return uniform() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(next_u64() % i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// All randomness in the pipeline flows from one root seed through named
// substreams, so each component is independently reproducible.
inline Rng named_stream(std::uint64_t root_seed, std::string_view name) {
    Rng mix(root_seed ^ fnv1a64(name));
    // burn-in decorrelates streams whose names differ in few bits
    mix.next_u64();
    return Rng(mix.next_u64());
}

inline Rng named_stream(std::uint64_t root_seed, std::string_view name, std::uint64_t a,
                        std::uint64_t b = 0) {
    std::string full(name);
    full += '/';
    full += std::to_string(a);
    full += '/';
    full += std::to_string(b);
    return named_stream(root_seed, full);
}

} // namespace dsu
