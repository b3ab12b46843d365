#pragma once

#include <cstdint>

namespace holomera {

/// Counter-based pseudo-random stream (splitmix64 core). Cheap to fork:
/// derive(master, k) gives an independent stream per shot/restart index, so
/// parallel consumers stay order-independent and reproducible.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(seed) {}

    static RngStream derive(std::uint64_t master, std::uint64_t index);

    std::uint64_t next_u64();
    /// Uniform in [0, 1).
    double next_double();
    /// Standard normal via Box-Muller (fixed algorithm, not stdlib-dependent).
    double next_gaussian();
    /// Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n);

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace holomera
