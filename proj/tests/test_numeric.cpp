// ============================================================================
// Scalar numerics: normal CDF/quantile round trips, two-sided p-values, the
// KS distance against hand-computed values, and compensated summation.
// ============================================================================

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "hdproj/numeric.hpp"

using namespace hdproj;

TEST_CASE("normal_cdf at anchor points") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    // Phi(1.959963984540054) = 0.975
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(normal_cdf(-1.959963984540054) == doctest::Approx(0.025).epsilon(1e-12));
    // Phi(1) from tables.
    CHECK(normal_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-14));
    CHECK(normal_cdf(1.0) + normal_cdf(-1.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("normal_quantile inverts normal_cdf") {
    const std::vector<double> probs = {1e-10, 1e-4, 0.025, 0.3, 0.5, 0.7, 0.975, 0.9999, 1.0 - 1e-10};
    for (double prob : probs) {
        CHECK(normal_cdf(normal_quantile(prob)) == doctest::Approx(prob).epsilon(1e-11));
    }
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
}

TEST_CASE("two_sided_p") {
    CHECK(two_sided_p(0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(two_sided_p(1.959963984540054) == doctest::Approx(0.05).epsilon(1e-10));
    CHECK(two_sided_p(-1.959963984540054) == doctest::Approx(0.05).epsilon(1e-10));
    CHECK(two_sided_p(5.0) < 1e-5);
    CHECK(two_sided_p(40.0) >= 0.0);  // extreme tails stay finite and nonnegative
}

namespace reference {

// Direct O(n^2)-free but unoptimized KS: sup over sample points of both
// one-sided gaps, written independently of the library implementation.
double ks_plain(std::vector<double> sample) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double sup = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = normal_cdf(sample[i]);
        const double hi = (static_cast<double>(i) + 1.0) / n - f;
        const double lo = f - static_cast<double>(i) / n;
        sup = std::max({sup, hi, lo});
    }
    return sup;
}

}  // namespace reference

TEST_CASE("ks distance: hand-computed singletons") {
    // One observation at 0: F_n jumps 0 -> 1 there, Phi(0) = 0.5, so the
    // distance is exactly 0.5.
    CHECK(ks_distance_to_normal({0.0}) == doctest::Approx(0.5).epsilon(1e-15));
    // Two observations at -1 and 1: sup gap is Phi(1) - 1/2 at x = 1.
    CHECK(ks_distance_to_normal({-1.0, 1.0}) ==
          doctest::Approx(0.3413447460685429).epsilon(1e-13));
}

TEST_CASE("ks distance matches an independent evaluation on random data") {
    std::vector<double> sample;
    double x = 0.37;
    for (int i = 0; i < 500; ++i) {
        x = std::fmod(x * 997.0 + 0.1234567, 1.0);  // deterministic scatter in (0,1)
        sample.push_back(6.0 * x - 3.0);
    }
    CHECK(ks_distance_to_normal(sample) ==
          doctest::Approx(reference::ks_plain(sample)).epsilon(1e-14));
}

TEST_CASE("ks distance is small for a near-normal grid") {
    // Quantile grid: F_n tracks Phi by construction, distance <= 1/n.
    std::vector<double> grid;
    const int n = 1000;
    for (int i = 1; i <= n; ++i) {
        grid.push_back(normal_quantile((static_cast<double>(i) - 0.5) / n));
    }
    CHECK(ks_distance_to_normal(grid) <= 1.0 / n + 1e-12);
}

TEST_CASE("compensated summation survives cancellation") {
    CompensatedSum acc;
    acc.add(1.0);
    acc.add(1e100);
    acc.add(1.0);
    acc.add(-1e100);
    CHECK(acc.result() == doctest::Approx(2.0).epsilon(1e-15));

    std::vector<double> vals;
    for (int i = 0; i < 1000; ++i) vals.push_back(0.1);
    CHECK(compensated_total(vals) == doctest::Approx(100.0).epsilon(1e-15));
}
