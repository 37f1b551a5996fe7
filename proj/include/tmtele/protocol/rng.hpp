#pragma once

#include <cstdint>
#include <limits>

namespace tmtele::protocol {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Counter-derived random stream: attempt k of a campaign seeded with s uses
// the splitmix64 sequence started at splitmix64(s ^ splitmix64(k)). Streams
// do not depend on how attempts are distributed over workers.
class CounterStream {
public:
    using result_type = std::uint64_t;

    CounterStream(std::uint64_t master_seed, std::uint64_t counter)
        : state_(splitmix64(master_seed ^ splitmix64(counter))) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // 53-bit uniform in [0, 1).
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

}  // namespace tmtele::protocol
