#pragma once

#include <cstdint>

namespace tomocheck {

/// Counter-based generator: output i of a stream with key k is
/// splitmix64_finalize(k + i * 0x9E3779B97F4A7C15), i = 1, 2, ...
/// Substreams are keyed by finalize(k ^ finalize(stream + 0xD1B54A32D192ED03)).
/// Uniform doubles take the top 53 bits; bounded integers use the
/// multiply-high reduction (bias below n / 2^64).
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}

    static constexpr std::uint64_t finalize(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next() { return finalize(key_ + (++counter_) * kGamma); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    CounterRng split(std::uint64_t stream) const { return CounterRng(derive_key(key_, stream)); }

    static constexpr std::uint64_t derive_key(std::uint64_t key, std::uint64_t stream) {
        return finalize(key ^ finalize(stream + 0xD1B54A32D192ED03ULL));
    }

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace tomocheck
