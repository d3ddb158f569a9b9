// ============================================================================
// Counter-based random number generation.
//
// The generator is SplitMix64: the state advances by the 64-bit golden-ratio
// increment and each output is an avalanche of the counter.  It is fixed here
// (rather than std::mt19937 or any distribution from <random>) so that
// identical seeds reproduce identical streams on every platform.  Substreams
// for Monte Carlo replicates and fold shuffles are derived with mix64, which
// feeds the (seed, stream) pair through the same avalanche.
// ============================================================================

#pragma once

#include <cstdint>
#include <vector>

namespace hdproj {

// SplitMix64 finalizer; bijective on 64-bit words.
std::uint64_t avalanche64(std::uint64_t z);

// Derives an independent substream seed from (seed, stream).
std::uint64_t mix64(std::uint64_t seed, std::uint64_t stream);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();

    // Uniform on (0, 1]; never returns 0 so log(u) is safe.
    double next_uniform();

    // Standard normal via Box-Muller; draws are produced in pairs and the
    // second is cached, so streams stay aligned only per generator.
    double next_normal();

    bool next_bernoulli_half();

    // Fisher-Yates with indices drawn from this stream.
    void shuffle(std::vector<std::int64_t>& values);

private:
    std::uint64_t state_;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace hdproj
