#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace daqd {

/// Counter-based random stream.
///
/// Each stream is a (key, counter) pair; the n-th draw is a SplitMix64 finalizer
/// applied to key + n * golden_gamma. Child streams are derived by hashing the
/// parent key with a stream id, so a subsystem can hand each batch member its
/// own stream and the result does not depend on evaluation order or thread count.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()() { return mix(key_ + (++counter_) * kGamma); }

    /// Independent child stream; does not advance this stream.
    Rng derive(std::uint64_t stream) const
    {
        Rng child;
        child.key_ = mix(key_ ^ mix(stream + 0x9e3779b97f4a7c15ULL));
        return child;
    }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    double normal() { return normal_(*this); }

    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n)
    {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(*this);
    }

    std::uint64_t key() const noexcept { return key_; }

    static std::uint64_t mix(std::uint64_t z)
    {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Seed of replication `index` under a run seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index)
{
    return Rng::mix(Rng::mix(seed) + index + 1);
}

// Stream ids for the top-level subsystems of a run.
namespace streams {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kVariation = 2;
inline constexpr std::uint64_t kTraining = 3;
inline constexpr std::uint64_t kSelection = 4;
inline constexpr std::uint64_t kImagination = 5;
inline constexpr std::uint64_t kPlanner = 6;
inline constexpr std::uint64_t kModelInit = 7;
} // namespace streams

} // namespace daqd
