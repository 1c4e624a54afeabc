#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace socnet {

using NodeIndex = std::uint32_t;
using NodeId = std::string;

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

// Bad input: malformed files, dangling references, invalid parameters,
// degenerate data. Maps to CLI exit code 1.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical failure: non-convergence, separation, singular designs.
// Maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Rank-deficient design; carries the offending term names.
class CollinearityError : public NumericalError {
public:
    explicit CollinearityError(std::string terms)
        : NumericalError("collinear design: " + terms), terms_(std::move(terms)) {}
    const std::string& terms() const noexcept { return terms_; }

private:
    std::string terms_;
};

// Natural ordering on node ids: all-digit ids compare numerically,
// everything else lexicographically (digits-only ids sort first).
inline bool node_id_less(std::string_view a, std::string_view b) {
    auto all_digits = [](std::string_view s) {
        if (s.empty()) return false;
        for (char c : s)
            if (c < '0' || c > '9') return false;
        return true;
    };
    const bool da = all_digits(a), db = all_digits(b);
    if (da && db) {
        auto strip = [](std::string_view s) {
            const auto p = s.find_first_not_of('0');
            return p == std::string_view::npos ? std::string_view("0") : s.substr(p);
        };
        const auto sa = strip(a), sb = strip(b);
        if (sa.size() != sb.size()) return sa.size() < sb.size();
        if (sa != sb) return sa < sb;
        return a < b;
    }
    if (da != db) return da;
    return a < b;
}

struct NodeIdLess {
    bool operator()(std::string_view a, std::string_view b) const { return node_id_less(a, b); }
};

} // namespace socnet
