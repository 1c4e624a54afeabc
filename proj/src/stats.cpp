#include "socnet/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace socnet::stats {

double percentile(std::span<const double> values, double q) {
    std::vector<double> v;
    v.reserve(values.size());
    for (double x : values)
        if (!std::isnan(x)) v.push_back(x);
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const double h = q * double(v.size() - 1);
    const auto lo = std::size_t(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - double(lo)) * (v[hi] - v[lo]);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

double chi2_1_sf(double x) {
    if (x <= 0) return 1.0;
    return std::erfc(std::sqrt(x / 2.0));
}

Moments moments(std::span<const double> values) {
    Moments m;
    double mean = 0, m2 = 0;
    for (double x : values) {
        if (std::isnan(x)) continue;
        ++m.n;
        const double d = x - mean;
        mean += d / double(m.n);
        m2 += d * (x - mean);
    }
    m.mean = mean;
    m.variance = m.n > 1 ? m2 / double(m.n - 1) : 0.0;
    return m;
}

} // namespace socnet::stats
