#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace qprobe {

/// splitmix64 finalizer. Used to derive independent per-run seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for stream `index` under `master`: mix64(master ^ mix64(index + 1)).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Seeded random source. All draws are defined on top of the raw 64-bit
/// mt19937_64 output so results do not depend on the standard library's
/// distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer on [0, n). n must be positive.
    std::size_t index(std::size_t n);

    /// k distinct values from [0, n), in draw order (partial Fisher-Yates).
    std::vector<std::size_t> choose(std::size_t n, std::size_t k);

private:
    std::mt19937_64 engine_;
};

} // namespace qprobe
