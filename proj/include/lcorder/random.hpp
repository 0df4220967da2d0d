#pragma once

#include <cstdint>
#include <random>

namespace lcorder {

/// SplitMix64 finaliser; used to derive independent per-instance seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index)
{
    return mix_seed(mix_seed(base ^ mix_seed(stream)) + index);
}

/// Seeded generator with portable draws (mt19937_64 output is fixed by the
/// standard; the std distributions are not, so we map bits ourselves).
class Rng
{
public:
    explicit Rng(std::uint64_t seed) : engine_{mix_seed(seed)} {}

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer on [lo, hi].
    std::int64_t integer(std::int64_t lo, std::int64_t hi)
    {
        auto const span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(engine_() % span);
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

} // namespace lcorder
