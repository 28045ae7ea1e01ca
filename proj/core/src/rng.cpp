#include "imgcf/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace imgcf {

namespace {

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (const char c : text) {
        hash ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

RngStream RngStream::derive(std::uint64_t base_seed, std::string_view name) {
    return RngStream(splitmix64(base_seed ^ fnv1a64(name)));
}

std::int64_t RngStream::next_index(std::int64_t bound) {
    if (bound <= 0) {
        throw std::invalid_argument("RngStream::next_index: bound must be positive");
    }
    const std::uint64_t b = static_cast<std::uint64_t>(bound);
    // Reject the biased tail of the 64-bit range.
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % b;
    std::uint64_t v = gen_();
    while (v >= limit) {
        v = gen_();
    }
    return static_cast<std::int64_t>(v % b);
}

double RngStream::next_normal(double mean, double stddev) {
    if (has_spare_) {
        has_spare_ = false;
        return mean + stddev * spare_;
    }
    double u1 = next_double();
    while (u1 <= 0.0) {
        u1 = next_double();
    }
    const double u2 = next_double();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return mean + stddev * radius * std::cos(angle);
}

}  // namespace imgcf
