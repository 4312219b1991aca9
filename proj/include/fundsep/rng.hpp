#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace fundsep {

// Philox4x32-10 counter-based generator. Each path owns an independent
// stream keyed by (seed, stream index), so adding paths never perturbs
// the draws of existing ones and any path can be regenerated in isolation.
namespace philox {

inline void round_once(std::array<std::uint32_t, 4>& c, const std::array<std::uint32_t, 2>& k) {
    const std::uint64_t p0 = std::uint64_t(0xD2511F53u) * c[0];
    const std::uint64_t p1 = std::uint64_t(0xCD9E8D57u) * c[2];
    const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
    const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

inline std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                          std::array<std::uint32_t, 2> key) {
    for (int r = 0; r < 10; ++r) {
        round_once(ctr, key);
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
    }
    return ctr;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

} // namespace philox

// One stream of uniforms/normals. Checksum folds every consumed 32-bit word
// (FNV-1a), which lets common-random-number consumers assert that two runs
// drew byte-identical randomness.
class PathRng {
  public:
    PathRng(std::uint64_t seed, std::uint64_t stream) {
        const std::uint64_t k = philox::splitmix64(seed);
        key_ = {std::uint32_t(k), std::uint32_t(k >> 32)};
        ctr_ = {0, 0, std::uint32_t(stream), std::uint32_t(stream >> 32)};
    }

    double uniform() {
        const std::uint32_t a = next_u32();
        const std::uint32_t b = next_u32();
        // 53-bit mantissa, strictly inside (0,1) so log() below is safe
        return ((a >> 5) * 67108864.0 + (b >> 6) + 0.5) * (1.0 / 9007199254740992.0);
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    std::uint64_t checksum() const { return checksum_; }

  private:
    std::uint32_t next_u32() {
        if (buf_pos_ == 4) {
            buf_ = philox::block(ctr_, key_);
            buf_pos_ = 0;
            if (++ctr_[0] == 0) ++ctr_[1]; // 2^64 blocks per stream
        }
        const std::uint32_t v = buf_[buf_pos_++];
        checksum_ = (checksum_ ^ v) * 0x100000001B3ull; // FNV-1a fold
        return v;
    }

    std::array<std::uint32_t, 4> ctr_{};
    std::array<std::uint32_t, 2> key_{};
    std::array<std::uint32_t, 4> buf_{};
    int buf_pos_ = 4;
    bool have_spare_ = false;
    double spare_ = 0.0;
    std::uint64_t checksum_ = 0xCBF29CE484222325ull; // FNV offset basis
};

} // namespace fundsep
