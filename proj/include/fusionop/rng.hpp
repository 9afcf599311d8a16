#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fusionop {

/// Counter-based pseudo-random stream.
///
/// Draw number i of the stream keyed by k is a pure function of (k, i), so a
/// stream can be regenerated bit-identically from its key, and independent
/// streams (per sample, per subspace, per layer) never share state.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept
        : key_(mix(key ^ 0x6a09e667f3bcc909ULL)), counter_(counter) {}

    std::uint64_t next_u64() noexcept;

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept;

    /// Standard normal via Box-Muller; the second variate of each pair is cached.
    double normal() noexcept;

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) noexcept;

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

    /// splitmix64 finalizer.
    static std::uint64_t mix(std::uint64_t x) noexcept;

private:
    std::uint64_t key_;
    std::uint64_t counter_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Seed for an independent child stream, e.g. one per layer or per cell.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Fisher-Yates shuffle driven by `rng`.
void shuffle(std::span<int> items, CounterRng& rng) noexcept;

/// Indices 0..n-1 in a seeded random order.
std::vector<int> permutation(int n, std::uint64_t seed);

} // namespace fusionop
