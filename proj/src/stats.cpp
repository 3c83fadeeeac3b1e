#include "bellsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bellsim/common.hpp"

namespace bellsim::stats {

double ks_distance(std::vector<double> samples, const std::vector<double>& cell_probs,
                   double length) {
  if (samples.empty()) throw DomainError("ks_distance: no samples");
  const int n = static_cast<int>(cell_probs.size());
  const double total = compensated_sum(cell_probs);
  if (!(total > 0.0)) throw DomainError("ks_distance: zero reference mass");
  std::vector<double> cum(n + 1, 0.0);
  CompensatedSum acc;
  for (int i = 0; i < n; ++i) {
    acc.add(cell_probs[i] / total);
    cum[i + 1] = acc.value();
  }
  const double h = length / n;
  auto cdf = [&](double y) {
    int i = static_cast<int>(std::floor(y / h));
    i = std::clamp(i, 0, n - 1);
    const double frac = std::clamp((y - i * h) / h, 0.0, 1.0);
    return cum[i] + frac * (cum[i + 1] - cum[i]);
  };
  std::sort(samples.begin(), samples.end());
  const double m = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double f = cdf(samples[k]);
    d = std::max({d, (k + 1) / m - f, f - k / m});
  }
  return d;
}

double chi_square(const std::vector<double>& observed,
                  const std::vector<double>& expected, double min_expected) {
  if (observed.size() != expected.size()) {
    throw DomainError("chi_square: size mismatch");
  }
  CompensatedSum stat;
  double pooled_o = 0.0, pooled_e = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] < min_expected) {
      pooled_o += observed[i];
      pooled_e += expected[i];
      continue;
    }
    const double diff = observed[i] - expected[i];
    stat.add(diff * diff / expected[i]);
  }
  if (pooled_e > 0.0) {
    const double diff = pooled_o - pooled_e;
    stat.add(diff * diff / pooled_e);
  } else if (pooled_o > 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return stat.value();
}

double nearest_rank(std::vector<double> values, double q) {
  if (values.empty()) throw DomainError("nearest_rank: empty input");
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("nearest_rank: q must be in (0, 1]");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * values.size()));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

}  // namespace bellsim::stats
