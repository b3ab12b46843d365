#include "holomera/rng.hpp"

#include <cmath>

namespace holomera {

namespace {
std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
} // namespace

RngStream RngStream::derive(std::uint64_t master, std::uint64_t index) {
    std::uint64_t x = master;
    std::uint64_t a = splitmix64(x);
    x = a ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    std::uint64_t b = splitmix64(x);
    return RngStream(b);
}

std::uint64_t RngStream::next_u64() { return splitmix64(state_); }

double RngStream::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_gaussian() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * next_double() - 1.0;
        v = 2.0 * next_double() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
}

std::uint64_t RngStream::next_below(std::uint64_t n) {
    // rejection sampling to avoid modulo bias
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

} // namespace holomera
