#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "bellsim/common.hpp"

namespace bellsim {

// Periodic cubic grid, N points per axis, d axes, box [0, L)^d.
struct GridSpec {
  int dim = 1;
  int n = 64;
  double length = 20.0;

  double spacing() const { return length / n; }
  double coordinate(int i) const { return i * spacing(); }
  // FFT ordering: 0, 1, .., N/2-1, -N/2, .., -1 (times 2 pi / L).
  double wavenumber(int i) const {
    const int k = i < n / 2 ? i : i - n;
    return 2.0 * kPi * k / length;
  }
  std::size_t points() const {
    std::size_t s = 1;
    for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(n);
    return s;
  }
  // Cell volume h^d.
  double cell_volume() const;
  // Throws DomainError: N >= 8 and a power of two, d in {1,2,3}, L > 0.
  void validate() const;
};

inline double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= spacing();
  return v;
}

inline void GridSpec::validate() const {
  if (dim < 1 || dim > 3) throw DomainError("grid: d must be 1, 2 or 3");
  if (n < 8 || (n & (n - 1)) != 0) {
    throw DomainError("grid: N must be a power of two >= 8");
  }
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw DomainError("grid: L must be finite and > 0");
  }
}

// Minimum-image displacement on a periodic interval.
inline double periodic_delta(double a, double b, double length) {
  double d = std::fmod(a - b, length);
  if (d > 0.5 * length) d -= length;
  if (d < -0.5 * length) d += length;
  return d;
}

inline double wrap(double x, double length) {
  double w = std::fmod(x, length);
  if (w < 0.0) w += length;
  if (w >= length) w -= length;
  return w;
}

}  // namespace bellsim
