#pragma once

#include <span>
#include <vector>

namespace socnet::stats {

// Linear-interpolation percentile (Hyndman-Fan type 7) of finite values;
// q in [0, 1]. NaN when no finite values are present.
double percentile(std::span<const double> values, double q);

double normal_cdf(double z);
// Two-sided p-value for a standard normal statistic.
double normal_two_sided_p(double z);
// Upper tail of the chi-square distribution with one degree of freedom.
double chi2_1_sf(double x);

struct Moments {
    std::size_t n = 0;
    double mean = 0;
    double variance = 0; // unbiased
};
// NaN entries are skipped.
Moments moments(std::span<const double> values);

} // namespace socnet::stats
