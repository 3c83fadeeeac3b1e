#pragma once

#include <vector>

namespace bellsim::stats {

// Kolmogorov-Smirnov distance between samples in [0, L) and the distribution
// that is uniform within each of the N cells [i h, (i+1) h) with probability
// cell_probs[i] (renormalized to sum 1).
double ks_distance(std::vector<double> samples, const std::vector<double>& cell_probs,
                   double length);

// Pearson chi-square; bins with expected count below min_expected are pooled
// into one bin. Bins with zero expected count and zero observed are skipped.
double chi_square(const std::vector<double>& observed,
                  const std::vector<double>& expected, double min_expected = 5.0);

// Nearest-rank percentile, q in (0, 1]: sorted[ceil(q n) - 1].
double nearest_rank(std::vector<double> values, double q);

}  // namespace bellsim::stats
