#pragma once

#include <vector>

#include "bellsim/amplitude.hpp"
#include "bellsim/fft.hpp"

namespace bellsim {

// Exact free propagation of a configuration amplitude. Each particle's factor
// exp(-i h(k) dt) = cos(E dt) - i sin(E dt) h(k)/E is applied in momentum
// space; the factors act on different slots and commute, so the step has no
// splitting error and commutes with slot exchange.
class FreePropagator {
 public:
  FreePropagator(const GridSpec& grid, int omega, double mass);

  const GridSpec& grid() const { return grid_; }
  int omega() const { return omega_; }
  double mass() const { return mass_; }

  // psi <- exp(-i H dt) psi. Advances psi.time by dt.
  void propagate(ConfigAmplitude& psi, double dt) const;

  // <psi| sum_j h_j |psi> with the cell-volume measure.
  double energy(const ConfigAmplitude& psi) const;

  // In-place transforms over all d*w axes, batched over spin indices.
  void to_momentum(ConfigAmplitude& psi) const { plan_.forward(psi.data.data()); }
  void to_position(ConfigAmplitude& psi) const { plan_.backward(psi.data.data()); }

  // One-particle momentum vector of particle j at a momentum-space site.
  dirac::Momentum particle_momentum(std::size_t site, int j) const;

 private:
  void check(const ConfigAmplitude& psi) const;
  GridSpec grid_;
  int omega_;
  double mass_;
  FftPlan plan_;
};

// propagate() plus the instability detector: throws NumericalError when the
// norm moves by more than `max_drift` in one step.
void step_free(ConfigAmplitude& psi, double dt, const FreePropagator& prop,
               long step_index = 0, double max_drift = 1e-6);

// (2 pi / E_max) / 200 with E_max = sqrt(d (pi N / L)^2 + m^2).
double default_dt(const GridSpec& grid, double mass);

}  // namespace bellsim
