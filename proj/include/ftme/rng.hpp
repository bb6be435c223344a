#pragma once

#include <cstdint>

namespace ftme {

/// Counter-based generator: the value of draw k in stream s is a pure function of
/// (seed, s, k), so per-sample streams give identical results under any thread layout.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
        : base_(mix(seed ^ mix(stream + 0x9e3779b97f4a7c15ULL)))
    {
    }

    std::uint64_t next_u64() noexcept { return mix(base_ + 0xd1b54a32d192ed03ULL * ++counter_); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [-1, 1).
    double symmetric() noexcept { return 2.0 * uniform() - 1.0; }

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept
    {
        // splitmix64 finalizer
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t base_;
    std::uint64_t counter_ = 0;
};

}  // namespace ftme
