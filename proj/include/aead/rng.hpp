#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace aead {

/// Deterministic random source used everywhere randomness is needed.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. It is seeded through std::seed_seq (also fully specified) from
/// the 64-bit seed and a stream id, so independent streams can be derived
/// from one user seed. All derived quantities are computed here rather than
/// through <random> distributions, whose algorithms are implementation
/// defined, so results are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint32_t stream = 0);

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01();

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi);

    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound);

    /// Standard normal via Box-Muller (one value per call, no caching).
    double normal();

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// Stream ids, so that e.g. changing the epoch count never changes the initial weights.
namespace streams {
inline constexpr std::uint32_t kInit = 1;
inline constexpr std::uint32_t kShuffle = 2;
inline constexpr std::uint32_t kSynthetic = 3;
inline constexpr std::uint32_t kValidationSplit = 4;
inline constexpr std::uint32_t kGradcheck = 5;
}  // namespace streams

}  // namespace aead
