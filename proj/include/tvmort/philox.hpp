#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace tvmort {

__extension__ typedef unsigned __int128 uint128_t;

/// Philox4x64-10 counter-based generator (Salmon et al. 2011).
///
/// The word stream matches numpy.random.Philox(key=[key0, key1],
/// counter=counter): the 256-bit counter is incremented before each block
/// of four words is produced. uniform() matches numpy's Generator.random().
class Philox4x64 {
public:
    using result_type = std::uint64_t;
    using Counter = std::array<std::uint64_t, 4>;
    using Key = std::array<std::uint64_t, 2>;

    explicit Philox4x64(std::uint64_t key0 = 0, std::uint64_t key1 = 0, Counter counter = {})
        : key_{key0, key1}, ctr_(counter) {}

    /// The raw bijection: ten rounds applied to one counter block.
    static Counter block(Counter ctr, Key key) {
        constexpr std::uint64_t M0 = 0xD2E7470EE14C6C93ULL, M1 = 0xCA5A826395121157ULL;
        constexpr std::uint64_t W0 = 0x9E3779B97F4A7C15ULL, W1 = 0xBB67AE8584CAA73BULL;
        for (int round = 0; round < 10; ++round) {
            const uint128_t p0 = static_cast<uint128_t>(M0) * ctr[0];
            const uint128_t p1 = static_cast<uint128_t>(M1) * ctr[2];
            const auto hi0 = static_cast<std::uint64_t>(p0 >> 64);
            const auto lo0 = static_cast<std::uint64_t>(p0);
            const auto hi1 = static_cast<std::uint64_t>(p1 >> 64);
            const auto lo1 = static_cast<std::uint64_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += W0;
            key[1] += W1;
        }
        return ctr;
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (used_ == 4) {
            for (auto& w : ctr_)
                if (++w != 0) break;
            buffer_ = block(ctr_, key_);
            used_ = 0;
        }
        return buffer_[used_++];
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Standard normal by the Box-Muller transform; variates come in pairs.
    double normal();

private:
    Key key_;
    Counter ctr_;
    Counter buffer_{};
    int used_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Mixes three words into one seed (splitmix64 finaliser chain).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c);

}  // namespace tvmort
