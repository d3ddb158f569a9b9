#include "hdproj/rng.hpp"

#include <cmath>
#include <numbers>

namespace hdproj {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
}

std::uint64_t avalanche64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t mix64(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = avalanche64(seed + kGolden);
    return avalanche64(z ^ (stream + kGolden));
}

std::uint64_t Rng::next_u64() {
    state_ += kGolden;
    return avalanche64(state_);
}

double Rng::next_uniform() {
    // 53 random bits; +1 shifts the range from [0,1) to (0,1].
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double Rng::next_normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    cached_normal_ = r * std::sin(a);
    has_cached_normal_ = true;
    return r * std::cos(a);
}

bool Rng::next_bernoulli_half() {
    return (next_u64() >> 63) != 0;
}

void Rng::shuffle(std::vector<std::int64_t>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(next_u64() % i);
        std::swap(values[i - 1], values[j]);
    }
}

}  // namespace hdproj
