#pragma once

#include <vector>

#include "bellsim/amplitude.hpp"

namespace bellsim {

// rho(X) = sum over spin indices of |Psi|^2, one value per configuration site.
struct DensityField {
  GridSpec grid;
  int omega = 1;
  std::vector<double> rho;

  int axes() const { return grid.dim * omega; }
  double cell_volume() const;
};

// j[k * d + a](X) = Psi^* alpha^a_{a_k b} Psi(a_k -> b), real part.
struct CurrentField {
  GridSpec grid;
  int omega = 1;
  std::vector<std::vector<double>> j;
};

DensityField density(const ConfigAmplitude& psi);
CurrentField currents(const ConfigAmplitude& psi);

// Accumulate |Psi|^2 and currents of psi into existing fields (used for sums
// over photon sectors).
void accumulate_density(const ConfigAmplitude& psi, DensityField& out);
void accumulate_currents(const ConfigAmplitude& psi, CurrentField& out);
DensityField zero_density(const GridSpec& grid, int omega);
CurrentField zero_currents(const GridSpec& grid, int omega);

// sum_X rho h^(d w), compensated.
double norm(const ConfigAmplitude& psi);
double integrate(const DensityField& rho);

// sum_k div_k j_k with spectral derivatives (Nyquist mode dropped).
std::vector<double> spectral_divergence(const CurrentField& j);

// L2 norm (measure h^(d w)) of (rho1 - rho0)/dt + (div j0 + div j1)/2.
double continuity_residual(const DensityField& rho0, const CurrentField& j0,
                           const DensityField& rho1, const CurrentField& j1,
                           double dt);
double continuity_residual(const ConfigAmplitude& psi0,
                           const ConfigAmplitude& psi1);

// Probability per grid cell along global axis g (sums to the norm).
std::vector<double> marginal(const DensityField& rho, int axis);

// Circular mean position along global axis g, in [0, L).
double circular_centroid(const DensityField& rho, int axis);

// max over X of |j_k(X)| - rho(X) (<= 0 when the bound holds).
double current_bound_excess(const DensityField& rho, const CurrentField& j);

}  // namespace bellsim
