#include "bellsim/free_evolution.hpp"

#include "bellsim/observables.hpp"

namespace bellsim {
namespace {

int spin_count(int omega) { return 1 << (2 * omega); }

}  // namespace

FreePropagator::FreePropagator(const GridSpec& grid, int omega, double mass)
    : grid_(grid), omega_(omega), mass_(mass),
      plan_(grid.dim * omega, grid.n, static_cast<std::size_t>(spin_count(omega))) {
  grid_.validate();
  if (!(mass >= 0.0)) throw DomainError("FreePropagator: mass must be >= 0");
}

void FreePropagator::check(const ConfigAmplitude& psi) const {
  if (psi.omega != omega_ || psi.grid.n != grid_.n || psi.grid.dim != grid_.dim) {
    throw DomainError("FreePropagator: amplitude shape does not match");
  }
}

dirac::Momentum FreePropagator::particle_momentum(std::size_t site, int j) const {
  dirac::Momentum k = dirac::Momentum::Zero();
  const int d = grid_.dim;
  const int axes = d * omega_;
  std::size_t stride = 1;
  for (int g = axes - 1; g >= 0; --g) {
    if (g / d == j) {
      k[g % d] = grid_.wavenumber(static_cast<int>((site / stride) % grid_.n));
    }
    stride *= static_cast<std::size_t>(grid_.n);
  }
  return k;
}

void FreePropagator::propagate(ConfigAmplitude& psi, double dt) const {
  check(psi);
  const std::size_t pts = grid_.points();
  const int d = grid_.dim;
  // Per one-particle momentum: exp(-i h(k) dt).
  std::vector<dirac::Matrix4c> u(pts);
  for (std::size_t s = 0; s < pts; ++s) {
    dirac::Momentum k = dirac::Momentum::Zero();
    std::size_t rem = s;
    for (int a = d - 1; a >= 0; --a) {
      k[a] = grid_.wavenumber(static_cast<int>(rem % grid_.n));
      rem /= grid_.n;
    }
    const double e = dirac::energy(k, mass_);
    const dirac::Matrix4c h = dirac::hamiltonian(k, mass_);
    if (e == 0.0) {
      u[s] = dirac::Matrix4c::Identity();
    } else {
      u[s] = std::cos(e * dt) * dirac::Matrix4c::Identity() -
             kI * (std::sin(e * dt) / e) * h;
    }
  }

  to_momentum(psi);
  const std::size_t sites = psi.sites();
  for (int j = 0; j < omega_; ++j) {
    const std::size_t pstride = psi.axis_stride(j * d + d - 1);
    const std::size_t sstride = psi.spin_stride(j);
    #pragma omp parallel for schedule(static)
    for (std::size_t spin = 0; spin < psi.spins(); ++spin) {
      if (psi.spin_of(spin, j) != 0) continue;
      for (std::size_t site = 0; site < sites; ++site) {
        const dirac::Matrix4c& m = u[(site / pstride) % pts];
        dirac::Spinor v;
        for (int a = 0; a < 4; ++a) v[a] = psi.at(spin + a * sstride, site);
        const dirac::Spinor w = m * v;
        for (int a = 0; a < 4; ++a) psi.at(spin + a * sstride, site) = w[a];
      }
    }
  }
  to_position(psi);
  psi.time += dt;
}

double FreePropagator::energy(const ConfigAmplitude& psi) const {
  check(psi);
  ConfigAmplitude k = psi;
  to_momentum(k);
  const int d = grid_.dim;
  const std::size_t pts = grid_.points();
  std::vector<dirac::Matrix4c> h(pts);
  for (std::size_t s = 0; s < pts; ++s) {
    dirac::Momentum kv = dirac::Momentum::Zero();
    std::size_t rem = s;
    for (int a = d - 1; a >= 0; --a) {
      kv[a] = grid_.wavenumber(static_cast<int>(rem % grid_.n));
      rem /= grid_.n;
    }
    h[s] = dirac::hamiltonian(kv, mass_);
  }
  CompensatedSum acc;
  const std::size_t sites = k.sites();
  for (int j = 0; j < omega_; ++j) {
    const std::size_t pstride = k.axis_stride(j * d + d - 1);
    const std::size_t sstride = k.spin_stride(j);
    for (std::size_t spin = 0; spin < k.spins(); ++spin) {
      if (k.spin_of(spin, j) != 0) continue;
      for (std::size_t site = 0; site < sites; ++site) {
        dirac::Spinor v;
        for (int a = 0; a < 4; ++a) v[a] = k.at(spin + a * sstride, site);
        acc.add(v.dot(h[(site / pstride) % pts] * v).real());
      }
    }
  }
  // Parseval: sum_x |f|^2 = (1/sites) sum_k |f^|^2.
  return acc.value() * psi.cell_volume() / static_cast<double>(sites);
}

void step_free(ConfigAmplitude& psi, double dt, const FreePropagator& prop,
               long step_index, double max_drift) {
  const double before = norm(psi);
  prop.propagate(psi, dt);
  const double after = norm(psi);
  if (!std::isfinite(after) || std::abs(after - before) > max_drift) {
    throw NumericalError("free step went unstable: norm " +
                             std::to_string(before) + " -> " +
                             std::to_string(after) + " at step " +
                             std::to_string(step_index),
                         step_index, before, after);
  }
}

double default_dt(const GridSpec& grid, double mass) {
  const double kmax = kPi * grid.n / grid.length;
  const double emax = std::sqrt(grid.dim * kmax * kmax + mass * mass);
  return (2.0 * kPi / emax) / 200.0;
}

}  // namespace bellsim
