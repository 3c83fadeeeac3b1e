#include "bellsim/observables.hpp"

#include <algorithm>
#include <limits>

#include "bellsim/fft.hpp"

namespace bellsim {

double DensityField::cell_volume() const {
  double v = 1.0;
  for (int j = 0; j < omega; ++j) v *= grid.cell_volume();
  return v;
}

DensityField zero_density(const GridSpec& grid, int omega) {
  DensityField out{grid, omega, {}};
  std::size_t sites = 1;
  for (int j = 0; j < omega; ++j) sites *= grid.points();
  out.rho.assign(sites, 0.0);
  return out;
}

CurrentField zero_currents(const GridSpec& grid, int omega) {
  CurrentField out{grid, omega, {}};
  std::size_t sites = 1;
  for (int j = 0; j < omega; ++j) sites *= grid.points();
  out.j.assign(static_cast<std::size_t>(grid.dim * omega),
               std::vector<double>(sites, 0.0));
  return out;
}

void accumulate_density(const ConfigAmplitude& psi, DensityField& out) {
  const std::size_t sites = psi.sites();
  #pragma omp parallel for schedule(static)
  for (std::size_t site = 0; site < sites; ++site) {
    double acc = 0.0;
    for (std::size_t spin = 0; spin < psi.spins(); ++spin) {
      acc += std::norm(psi.at(spin, site));
    }
    out.rho[site] += acc;
  }
}

void accumulate_currents(const ConfigAmplitude& psi, CurrentField& out) {
  const auto& dset = dirac::dirac_set();
  const int d = psi.grid.dim;
  const std::size_t sites = psi.sites();
  for (int k = 0; k < psi.omega; ++k) {
    const std::size_t sstride = psi.spin_stride(k);
    for (int a = 0; a < d; ++a) {
      const dirac::Matrix4c& alpha = dset.alpha[a];
      auto& jk = out.j[k * d + a];
      #pragma omp parallel for schedule(static)
      for (std::size_t site = 0; site < sites; ++site) {
        double acc = 0.0;
        for (std::size_t spin = 0; spin < psi.spins(); ++spin) {
          if (psi.spin_of(spin, k) != 0) continue;
          dirac::Spinor v;
          for (int b = 0; b < 4; ++b) v[b] = psi.at(spin + b * sstride, site);
          acc += v.dot(alpha * v).real();
        }
        jk[site] += acc;
      }
    }
  }
}

DensityField density(const ConfigAmplitude& psi) {
  DensityField out = zero_density(psi.grid, psi.omega);
  accumulate_density(psi, out);
  return out;
}

CurrentField currents(const ConfigAmplitude& psi) {
  CurrentField out = zero_currents(psi.grid, psi.omega);
  accumulate_currents(psi, out);
  return out;
}

double integrate(const DensityField& rho) {
  return compensated_sum(rho.rho) * rho.cell_volume();
}

double norm(const ConfigAmplitude& psi) {
  CompensatedSum acc;
  for (const auto& c : psi.data) acc.add(std::norm(c));
  return acc.value() * psi.cell_volume();
}

std::vector<double> spectral_divergence(const CurrentField& j) {
  const GridSpec& g = j.grid;
  const int axes = g.dim * j.omega;
  const std::size_t sites = j.j.empty() ? 0 : j.j[0].size();
  FftPlan plan(axes, g.n, 1);
  std::vector<double> div(sites, 0.0);
  std::vector<cplx> buf(sites);
  for (int axis = 0; axis < axes; ++axis) {
    std::size_t stride = 1;
    for (int k = axes - 1; k > axis; --k) stride *= static_cast<std::size_t>(g.n);
    for (std::size_t s = 0; s < sites; ++s) buf[s] = j.j[axis][s];
    plan.forward(buf.data());
    for (std::size_t s = 0; s < sites; ++s) {
      const int idx = static_cast<int>((s / stride) % g.n);
      buf[s] *= idx == g.n / 2 ? cplx(0.0) : kI * g.wavenumber(idx);
    }
    plan.backward(buf.data());
    for (std::size_t s = 0; s < sites; ++s) div[s] += buf[s].real();
  }
  return div;
}

double continuity_residual(const DensityField& rho0, const CurrentField& j0,
                           const DensityField& rho1, const CurrentField& j1,
                           double dt) {
  if (!(dt > 0.0)) throw DomainError("continuity_residual: dt must be > 0");
  const std::vector<double> d0 = spectral_divergence(j0);
  const std::vector<double> d1 = spectral_divergence(j1);
  CompensatedSum acc;
  for (std::size_t s = 0; s < rho0.rho.size(); ++s) {
    const double r = (rho1.rho[s] - rho0.rho[s]) / dt + 0.5 * (d0[s] + d1[s]);
    acc.add(r * r);
  }
  return std::sqrt(acc.value() * rho0.cell_volume());
}

double continuity_residual(const ConfigAmplitude& psi0,
                           const ConfigAmplitude& psi1) {
  return continuity_residual(density(psi0), currents(psi0), density(psi1),
                             currents(psi1), psi1.time - psi0.time);
}

std::vector<double> marginal(const DensityField& rho, int axis) {
  const GridSpec& g = rho.grid;
  const int axes = rho.axes();
  if (axis < 0 || axis >= axes) throw DomainError("marginal: axis out of range");
  std::size_t stride = 1;
  for (int k = axes - 1; k > axis; --k) stride *= static_cast<std::size_t>(g.n);
  std::vector<CompensatedSum> acc(g.n);
  for (std::size_t s = 0; s < rho.rho.size(); ++s) {
    acc[(s / stride) % g.n].add(rho.rho[s]);
  }
  std::vector<double> out(g.n);
  const double cell = rho.cell_volume();
  for (int i = 0; i < g.n; ++i) out[i] = acc[i].value() * cell;
  return out;
}

double circular_centroid(const DensityField& rho, int axis) {
  const GridSpec& g = rho.grid;
  const std::vector<double> m = marginal(rho, axis);
  CompensatedSum c, s;
  for (int i = 0; i < g.n; ++i) {
    const double theta = 2.0 * kPi * g.coordinate(i) / g.length;
    c.add(m[i] * std::cos(theta));
    s.add(m[i] * std::sin(theta));
  }
  return wrap(std::atan2(s.value(), c.value()) * g.length / (2.0 * kPi), g.length);
}

double current_bound_excess(const DensityField& rho, const CurrentField& j) {
  const int d = rho.grid.dim;
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < rho.omega; ++k) {
    for (std::size_t s = 0; s < rho.rho.size(); ++s) {
      double mag2 = 0.0;
      for (int a = 0; a < d; ++a) mag2 += j.j[k * d + a][s] * j.j[k * d + a][s];
      worst = std::max(worst, std::sqrt(mag2) - rho.rho[s]);
    }
  }
  return worst;
}

}  // namespace bellsim
