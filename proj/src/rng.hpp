#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace silc::rng {

// Philox4x32-10 counter-based generator.  Outputs depend only on
// (key, counter), so every (seed, stream) pair yields an independent
// sequence that is reproducible regardless of evaluation order.
struct Philox4x32 {
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(
        std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t(kMul0) * ctr[0];
            const std::uint64_t p1 = std::uint64_t(kMul1) * ctr[2];
            const std::uint32_t hi0 = std::uint32_t(p0 >> 32);
            const std::uint32_t lo0 = std::uint32_t(p0);
            const std::uint32_t hi1 = std::uint32_t(p1 >> 32);
            const std::uint32_t lo1 = std::uint32_t(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }
};

// One logical stream: key carries the 64-bit seed, the counter carries the
// stream id (high words) and a draw counter (low words).
class Stream {
  public:
    Stream(std::uint64_t seed, std::uint64_t stream_id)
        : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)},
          stream_lo_(std::uint32_t(stream_id)),
          stream_hi_(std::uint32_t(stream_id >> 32)) {}

    std::uint32_t next_u32() {
        if (pos_ == 4) {
            buf_ = Philox4x32::block(
                {std::uint32_t(draw_), std::uint32_t(draw_ >> 32), stream_lo_,
                 stream_hi_},
                key_);
            ++draw_;
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    // Uniform on (0,1): (x + 0.5) * 2^-32 never hits either endpoint.
    double next_uniform() {
        return (double(next_u32()) + 0.5) * 0x1p-32;
    }

    // Standard normal by the Box-Muller transform (fixed algorithm so that
    // sequences are identical across platforms and library versions).
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * M_PI * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

  private:
    std::array<std::uint32_t, 2> key_;
    std::uint32_t stream_lo_, stream_hi_;
    std::uint64_t draw_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace silc::rng
