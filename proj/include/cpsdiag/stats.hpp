#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cpsdiag::stats {

double mean(std::span<const double> xs);
// Population standard deviation (divides by n).
double stddev(std::span<const double> xs);
double median(std::span<const double> xs);

// Linear interpolation between order statistics: rank = q/100 * (n-1).
double percentile(std::span<const double> xs, double q);

// Trailing moving median: out[i] = median(xs[max(0, i-width+1) .. i]). The
// window shrinks at the start of the series. width 0 or 1 copies the input.
std::vector<double> moving_median(std::span<const double> xs, std::size_t width);

}  // namespace cpsdiag::stats
