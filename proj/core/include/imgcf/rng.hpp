#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace imgcf {

// Seeded random stream. Every piece of randomness in the project flows from
// one base seed fanned out into named streams (init, split, sampling,
// synthetic, ...), so a run is fully determined by its seed. Bounded draws,
// shuffling and the Gaussian are implemented here rather than through
// std:: distributions so the byte-level output sequence is pinned by this
// code alone.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : gen_(seed) {}

    // Derives an independent stream from (base_seed, name).
    static RngStream derive(std::uint64_t base_seed, std::string_view name);

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // Uniform in [0, bound). bound must be positive.
    std::int64_t next_index(std::int64_t bound);

    // Box-Muller, one spare cached.
    double next_normal(double mean, double stddev);

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::int64_t i = static_cast<std::int64_t>(values.size()) - 1; i > 0; --i) {
            const std::int64_t j = next_index(i + 1);
            std::swap(values[static_cast<std::size_t>(i)], values[static_cast<std::size_t>(j)]);
        }
    }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace imgcf
