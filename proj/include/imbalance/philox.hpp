#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace imbalance {

/// Philox4x32-10 counter-based generator. A (seed, stream) pair selects an
/// independent sequence; the generator state is a 128-bit block counter
/// plus a position within the current output block.
class Philox {
public:
    using result_type = std::uint64_t;
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    Philox(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          counter_{0, 0, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (position_ == 2) {
            block_ = bijection(counter_, key_);
            if (++counter_[0] == 0) ++counter_[1];
            position_ = 0;
        }
        const std::uint64_t hi = block_[2 * position_];
        const std::uint64_t lo = block_[2 * position_ + 1];
        ++position_;
        return (hi << 32) | lo;
    }

    /// Uniform double in the open interval (0, 1).
    double uniform_open() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    /// The ten-round Philox bijection on one counter block.
    static Block bijection(Block ctr, Key key) {
        constexpr std::uint32_t m0 = 0xD2511F53u;
        constexpr std::uint32_t m1 = 0xCD9E8D57u;
        constexpr std::uint32_t w0 = 0x9E3779B9u;
        constexpr std::uint32_t w1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
            key[0] += w0;
            key[1] += w1;
        }
        return ctr;
    }

private:
    Key key_;
    Block counter_;
    Block block_{};
    int position_ = 2;
};

}  // namespace imbalance
