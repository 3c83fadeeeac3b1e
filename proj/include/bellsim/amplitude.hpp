#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "bellsim/common.hpp"
#include "bellsim/dirac.hpp"
#include "bellsim/grid.hpp"

namespace bellsim {

inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{2} << 30;

// Psi_{a1..aw}(x1..xw) stored densely. Flat index = spin * sites + site, where
// spin = sum_j a_j 4^(w-1-j) (a_j in 0..3) and site is row-major over the d*w
// global axes with particle 0 slowest.
struct ConfigAmplitude {
  GridSpec grid;
  int omega = 1;
  double mass = 1.0;
  double time = 0.0;
  std::vector<cplx> data;

  ConfigAmplitude() = default;
  // Zero amplitude. Throws ResourceError if the tensor exceeds the budget.
  ConfigAmplitude(const GridSpec& grid, int omega, double mass,
                  std::size_t memory_budget = kDefaultMemoryBudget);

  int axes() const { return grid.dim * omega; }
  std::size_t sites() const { return sites_; }
  std::size_t spins() const { return spins_; }
  // Measure of one configuration cell, h^(d w).
  double cell_volume() const;

  cplx& at(std::size_t spin, std::size_t site) { return data[spin * sites_ + site]; }
  const cplx& at(std::size_t spin, std::size_t site) const {
    return data[spin * sites_ + site];
  }

  // Stride of global axis g in the site index.
  std::size_t axis_stride(int g) const;
  // Grid index along global axis g of a site.
  int axis_index(std::size_t site, int g) const {
    return static_cast<int>((site / axis_stride(g)) % grid.n);
  }
  // Spin index a_j (0..3) of particle j inside a spin multi-index.
  int spin_of(std::size_t spin, int j) const {
    return static_cast<int>((spin >> (2 * (omega - 1 - j))) & 3U);
  }
  std::size_t spin_stride(int j) const {
    return std::size_t{1} << (2 * (omega - 1 - j));
  }

 private:
  std::size_t sites_ = 0;
  std::size_t spins_ = 0;
};

// Bytes needed for a dense amplitude (overflow saturates).
std::size_t amplitude_bytes(const GridSpec& grid, int omega);

struct PacketSpec {
  std::array<double, 3> center{0.0, 0.0, 0.0};
  // Standard deviation of |psi|^2 per axis; <= 0 means an unwindowed plane wave.
  double width = 1.0;
  std::array<double, 3> momentum{0.0, 0.0, 0.0};
  dirac::EnergySign sign = dirac::EnergySign::positive;
  int spin = 1;
  // Project onto the chosen energy sign in momentum space after windowing.
  bool project = true;
};

// One-particle spinor field phi_a(x) on the grid, unit norm, layout a*points+x.
std::vector<cplx> single_particle_state(const GridSpec& grid, double mass,
                                        const PacketSpec& packet);

// Normalized Slater determinant of the packets (omega = packets.size()).
// Throws DegenerateInputError when the antisymmetrized product vanishes.
ConfigAmplitude init_amplitude(const GridSpec& grid, double mass,
                               const std::vector<PacketSpec>& packets,
                               std::size_t memory_budget = kDefaultMemoryBudget);

// Max |Psi - sgn(P) P Psi| over every transposition of two fermion slots.
double antisymmetry_deviation(const ConfigAmplitude& psi);

// Applies the transposition of slots i and j (no sign).
ConfigAmplitude exchange(const ConfigAmplitude& psi, int i, int j);

}  // namespace bellsim
