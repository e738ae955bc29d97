#pragma once
// Counter-based random streams.
//
// Philox4x32-10 (Salmon et al., SC'11) keyed by a 64-bit seed. A stream is
// identified by a 64-bit stream id placed in the upper half of the 128-bit
// counter; the lower half counts blocks within the stream. Two streams from
// the same key never overlap, so replicate r of an experiment can draw from
// stream(master_seed, r) regardless of which worker thread runs it.

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace adalasso {

class Philox4x32
{
public:
    using result_type = std::uint32_t;

    Philox4x32(std::uint64_t seed, std::uint64_t stream) noexcept;

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Raw block function, exposed for known-answer tests.
    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                              std::array<std::uint32_t, 2> key) noexcept;

private:
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 4> buffer_{};
    unsigned used_ = 4;
};

/// Mixes a parent seed with a label so sub-streams (replicate, purpose) get
/// independent ids.
std::uint64_t derive_stream(std::uint64_t parent, std::uint64_t label) noexcept;

/// Normal and uniform draws on top of a Philox stream. Each instance owns its
/// distribution state, so draws are reproducible per (seed, stream).
class RandomStream
{
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream) : engine_(seed, stream) {}

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    /// Uniform integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi)
    {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
    }
    Philox4x32& engine() { return engine_; }

private:
    Philox4x32 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

} // namespace adalasso
