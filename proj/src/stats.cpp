#include "cpsdiag/stats.hpp"

#include <algorithm>
#include <cmath>

#include "cpsdiag/error.hpp"

namespace cpsdiag::stats {

double mean(std::span<const double> xs) {
    if (xs.empty()) throw ValidationError("mean of empty series");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double stddev(std::span<const double> xs) {
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size()));
}

double median(std::span<const double> xs) { return percentile(xs, 50.0); }

double percentile(std::span<const double> xs, double q) {
    if (xs.empty()) throw ValidationError("percentile of empty series");
    if (!(q >= 0.0 && q <= 100.0)) throw ValidationError("percentile must lie in [0,100]");
    std::vector<double> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());
    const double rank = q / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<double> moving_median(std::span<const double> xs, std::size_t width) {
    std::vector<double> out(xs.begin(), xs.end());
    if (width <= 1) return out;
    std::vector<double> buf;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const std::size_t first = i + 1 >= width ? i + 1 - width : 0;
        buf.assign(xs.begin() + static_cast<std::ptrdiff_t>(first),
                   xs.begin() + static_cast<std::ptrdiff_t>(i + 1));
        out[i] = median(buf);
    }
    return out;
}

}  // namespace cpsdiag::stats
