#pragma once

#include <cstdint>
#include <string_view>

namespace mfg {

/// Counter-based generator: the k-th draw of stream s under seed is
/// splitmix64(seed ^ mix(s) + k * golden). Streams are independent and any
/// draw can be recomputed without replaying the sequence.
class CounterRng {
public:
    static constexpr std::string_view kGeneratorId = "splitmix64-counter";

    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) : key_(seed ^ mix(stream + kGolden)) {}

    /// Child generator for an independent sub-stream.
    CounterRng split(std::uint64_t stream) const { return CounterRng(key_, stream + 1); }

    std::uint64_t at(std::uint64_t counter) const { return mix(key_ + (counter + 1) * kGolden); }
    std::uint64_t next() { return at(counter_++); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t counter() const { return counter_; }

private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace mfg
