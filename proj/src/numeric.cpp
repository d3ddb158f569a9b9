#include "hdproj/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hdproj/types.hpp"

namespace hdproj {

void CompensatedSum::add(double value) {
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
        compensation_ += (sum_ - t) + value;
    } else {
        compensation_ += (value - t) + sum_;
    }
    sum_ = t;
}

double compensated_total(const std::vector<double>& values) {
    CompensatedSum acc;
    for (double v : values) acc.add(v);
    return acc.result();
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x * (1.0 / std::numbers::sqrt2));
}

double two_sided_p(double t) {
    return std::erfc(std::abs(t) * (1.0 / std::numbers::sqrt2));
}

namespace {

// Acklam's inverse normal CDF approximation (relative error ~1.15e-9).
double acklam(double p) {
    static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                -2.759285104469687e+02, 1.383577518672690e+02,
                                -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                -1.556989798598866e+02, 6.680131188771972e+01,
                                -1.328068155288572e+01};
    static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                -2.400758277161838e+00, -2.549732539343734e+00,
                                4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_quantile(double prob) {
    if (!(prob > 0.0 && prob < 1.0)) {
        throw ValidationError("normal_quantile: probability must lie in (0, 1)");
    }
    double x = acklam(prob);
    // One Halley refinement against the exact CDF; u = (cdf(x) - prob) / pdf(x)
    // with 1/pdf(x) = sqrt(2 pi) exp(x^2 / 2).
    const double e = normal_cdf(x) - prob;
    const double u = e * std::numbers::sqrt2 / std::numbers::inv_sqrtpi *
                     std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
    return x;
}

double ks_distance_to_normal(std::vector<double> sample) {
    if (sample.empty()) {
        throw ValidationError("ks_distance_to_normal: empty sample");
    }
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double dist = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double cdf = normal_cdf(sample[i]);
        const double lo = cdf - static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n - cdf;
        dist = std::max({dist, lo, hi});
    }
    return dist;
}

}  // namespace hdproj
