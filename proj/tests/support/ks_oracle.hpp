#pragma once

// Brute-force Kolmogorov-Smirnov reference: the empirical-CDF maximum
// gap is found by direct counting at every sample point (O(n^2)), and
// the Kolmogorov survival function is summed in long double with a
// fixed large term count. Independent of the production code path.

#include <cmath>
#include <span>
#include <vector>

namespace sqrn::testing {

inline double ks_statistic_bruteforce(std::span<const double> values) {
    const double n = static_cast<double>(values.size());
    double d = 0.0;
    for (double x : values) {
        double below = 0, at_or_below = 0;
        for (double y : values) {
            if (y < x) ++below;
            if (y <= x) ++at_or_below;
        }
        d = std::max(d, std::abs(at_or_below / n - x));
        d = std::max(d, std::abs(x - below / n));
    }
    return d;
}

inline double kolmogorov_q_reference(double t) {
    if (t <= 0.0) return 1.0;
    if (t < 1.18) {
        long double cdf = 0.0L;
        const long double a = 9.869604401089358L / (8.0L * t * t); // pi^2
        for (int j = 1; j <= 199; j += 2) cdf += expl(-static_cast<long double>(j) * j * a);
        cdf *= sqrtl(6.283185307179586L) / t; // sqrt(2 pi)
        long double q = 1.0L - cdf;
        if (q < 0) q = 0;
        if (q > 1) q = 1;
        return static_cast<double>(q);
    }
    long double q = 0.0L;
    for (int j = 1; j <= 1000; ++j) {
        const long double term = expl(-2.0L * static_cast<long double>(j) * j * t * t);
        q += (j % 2 == 1) ? term : -term;
    }
    long double val = 2.0L * q;
    if (val < 0) val = 0;
    if (val > 1) val = 1;
    return static_cast<double>(val);
}

inline double ks_pvalue_bruteforce(std::span<const double> values) {
    const double n = static_cast<double>(values.size());
    const double d = ks_statistic_bruteforce(values);
    const double scale = std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n);
    return kolmogorov_q_reference(scale * d);
}

} // namespace sqrn::testing
