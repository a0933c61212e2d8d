#pragma once

// Counter-based random streams. Every random number in the library is a pure
// function of (master seed, stream id, counter), computed with Philox4x32-10,
// so parallel replications never share state and results do not depend on
// thread count or scheduling.

#include <array>
#include <cstdint>

namespace ustat {

/// Philox4x32-10 block function.
[[nodiscard]] std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                                      std::array<std::uint32_t, 2> key) noexcept;

class Stream {
public:
    explicit Stream(std::uint64_t seed, std::uint64_t id = 0) noexcept : seed_(seed), id_(id) {}

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t id() const noexcept { return id_; }

    /// Independent sub-stream; child(k) of distinct k (or distinct parents)
    /// yields distinct ids up to 64-bit hash collisions.
    [[nodiscard]] Stream child(std::uint64_t k) const noexcept;

    /// 128 random bits for the given counter.
    [[nodiscard]] std::array<std::uint64_t, 2> block(std::uint64_t counter) const noexcept;
    [[nodiscard]] std::uint64_t bits(std::uint64_t counter) const noexcept { return block(counter)[0]; }

    /// Uniform on [0, 1) with 53 random bits.
    [[nodiscard]] double uniform(std::uint64_t counter) const noexcept;
    /// Uniform on (0, 1), safe for log().
    [[nodiscard]] double uniform_open(std::uint64_t counter) const noexcept;
    /// Standard normal via Box-Muller on the two halves of one block.
    [[nodiscard]] double normal(std::uint64_t counter) const noexcept;

    /// Uniform integer in [0, bound) by rejection; consumes one or more
    /// counters starting at `counter`, which is advanced past them.
    [[nodiscard]] std::uint64_t below(std::uint64_t bound, std::uint64_t& counter) const;

    friend bool operator==(const Stream&, const Stream&) = default;

private:
    std::uint64_t seed_;
    std::uint64_t id_;
};

/// SplitMix64 finalizer, used for hashing stream coordinates.
[[nodiscard]] std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace ustat
