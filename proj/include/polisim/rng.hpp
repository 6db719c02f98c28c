#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "polisim/errors.hpp"

namespace polisim {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Independent sub-stream seeds (population, world, ...) derived from the one
// scenario seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    return splitmix64(base ^ splitmix64(salt));
}

// Deterministic random stream. mt19937_64 has a fully specified output
// sequence, and every draw below is built from raw engine output without
// going through std::*_distribution (whose results are implementation
// defined), so identical seeds give identical streams on every platform.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    // Uniform double in [0, 1), 53 bits of precision.
    double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, bound), unbiased via rejection.
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound == 0) {
            throw ContractViolation("RngStream::next_below: bound must be positive");
        }
        const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
        const std::uint64_t limit = max - max % bound;
        std::uint64_t v = engine_();
        while (v >= limit) {
            v = engine_();
        }
        return v % bound;
    }

    // Uniform integer in [lo, hi], inclusive.
    std::int64_t next_int(std::int64_t lo, std::int64_t hi) {
        if (lo > hi) {
            throw ContractViolation("RngStream::next_int: empty range");
        }
        const std::uint64_t span =
            static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
        if (span == 0) {  // full 64-bit range
            return static_cast<std::int64_t>(engine_());
        }
        return lo + static_cast<std::int64_t>(next_below(span));
    }

    double next_in(double lo, double hi) { return lo + next_unit() * (hi - lo); }

    // Fisher-Yates, consumes size-1 bounded draws.
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[next_below(i)]);
        }
    }

    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) {
            order[i] = i;
        }
        shuffle(order);
        return order;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace polisim
