// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <initializer_list>

namespace rorecomp {

// SplitMix64 generator. Small, fast, and fully portable: every draw is a pure
// function of the 64-bit state, so results are bit-identical across platforms
// and independent of how work is scheduled across threads.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t state) : state_(state) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n), n > 0. Lemire multiply-shift; deterministic.
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

private:
    std::uint64_t state_;
};

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Tags keeping independent stream families from colliding.
enum class StreamKind : std::uint64_t {
    Question = 1,
    Rollout  = 2,
    Gate     = 3,
    EvalQuestion = 4,
    EvalRollout  = 5,
};

// Derives an independent stream from a root seed and a counter path, e.g.
// (seed, Rollout, step, question_id, sample_index). Streams never depend on
// call order, which keeps rollouts reproducible for any worker count.
inline SplitMix64 derive_stream(std::uint64_t seed,
                                StreamKind kind,
                                std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = mix64(seed ^ 0x9e3779b97f4a7c15ULL);
    s = mix64((s ^ static_cast<std::uint64_t>(kind)) * 0xff51afd7ed558ccdULL +
              0x2545f4914f6cdd1dULL);
    for (std::uint64_t p : path) {
        s = mix64((s ^ p) * 0xff51afd7ed558ccdULL + 0x2545f4914f6cdd1dULL);
    }
    return SplitMix64{s};
}

} // namespace rorecomp
