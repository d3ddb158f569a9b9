// ============================================================================
// Scalar numerics shared across the library: compensated summation, the
// normal CDF and quantile, two-sided p-values, and the one-sample
// Kolmogorov-Smirnov distance to N(0,1).
// ============================================================================

#pragma once

#include <cstddef>
#include <vector>

namespace hdproj {

// Neumaier's variant of Kahan summation.  Used wherever per-sample scalars
// are accumulated into a statistic, to keep platform-dependent drift below
// the test tolerances.
class CompensatedSum {
public:
    void add(double value);
    double result() const { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

double compensated_total(const std::vector<double>& values);

// Phi(x) for the standard normal, accurate to ~1e-16 via erfc.
double normal_cdf(double x);

// Phi^{-1}(prob), prob in (0,1).  Acklam's rational approximation polished
// with one Halley step; absolute error is below 1e-13 over the open interval.
double normal_quantile(double prob);

// Two-sided p-value 2 * (1 - Phi(|t|)).
double two_sided_p(double t);

// sup_x |F_n(x) - Phi(x)| over a sample (copied and sorted internally).
double ks_distance_to_normal(std::vector<double> sample);

}  // namespace hdproj
