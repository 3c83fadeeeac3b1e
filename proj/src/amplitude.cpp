#include "bellsim/amplitude.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "bellsim/fft.hpp"

namespace bellsim {

std::size_t amplitude_bytes(const GridSpec& grid, int omega) {
  constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
  std::size_t count = 1;
  const std::size_t per_particle = 4 * grid.points();
  for (int j = 0; j < omega; ++j) {
    if (count > kMax / per_particle) return kMax;
    count *= per_particle;
  }
  if (count > kMax / sizeof(cplx)) return kMax;
  return count * sizeof(cplx);
}

ConfigAmplitude::ConfigAmplitude(const GridSpec& g, int w, double m,
                                 std::size_t memory_budget)
    : grid(g), omega(w), mass(m) {
  grid.validate();
  if (omega < 1) throw DomainError("amplitude: omega must be >= 1");
  const std::size_t bytes = amplitude_bytes(grid, omega);
  if (bytes > memory_budget) {
    throw ResourceError("amplitude: N^(d w) 4^w tensor needs " +
                        std::to_string(bytes) + " bytes, budget is " +
                        std::to_string(memory_budget));
  }
  sites_ = 1;
  for (int j = 0; j < omega; ++j) sites_ *= grid.points();
  spins_ = std::size_t{1} << (2 * omega);
  data.assign(sites_ * spins_, cplx(0.0));
}

double ConfigAmplitude::cell_volume() const {
  double v = 1.0;
  for (int j = 0; j < omega; ++j) v *= grid.cell_volume();
  return v;
}

std::size_t ConfigAmplitude::axis_stride(int g) const {
  std::size_t s = 1;
  for (int k = axes() - 1; k > g; --k) s *= static_cast<std::size_t>(grid.n);
  return s;
}

std::vector<cplx> single_particle_state(const GridSpec& grid, double mass,
                                        const PacketSpec& packet) {
  grid.validate();
  const std::size_t pts = grid.points();
  const int d = grid.dim;
  dirac::Momentum p = dirac::Momentum::Zero();
  for (int a = 0; a < d; ++a) p[a] = packet.momentum[a];
  const dirac::Spinor w =
      dirac::energy_eigenspinor(packet.sign, packet.spin, p, mass);

  std::vector<cplx> phi(4 * pts);
  const bool windowed = packet.width > 0.0;
  for (std::size_t site = 0; site < pts; ++site) {
    double envelope = 1.0;
    double phase = 0.0;
    std::size_t rem = site;
    for (int a = d - 1; a >= 0; --a) {
      const int idx = static_cast<int>(rem % grid.n);
      rem /= grid.n;
      const double x = grid.coordinate(idx);
      if (windowed) {
        const double dx = periodic_delta(x, packet.center[a], grid.length);
        envelope *= std::exp(-dx * dx / (4.0 * packet.width * packet.width));
        phase += p[a] * dx;
      } else {
        phase += p[a] * x;
      }
    }
    const cplx f = envelope * std::exp(kI * phase);
    for (int s = 0; s < 4; ++s) phi[s * pts + site] = f * w[s];
  }

  if (packet.project) {
    FftPlan plan(d, grid.n, 4);
    plan.forward(phi.data());
    for (std::size_t site = 0; site < pts; ++site) {
      dirac::Momentum k = dirac::Momentum::Zero();
      std::size_t rem = site;
      for (int a = d - 1; a >= 0; --a) {
        k[a] = grid.wavenumber(static_cast<int>(rem % grid.n));
        rem /= grid.n;
      }
      if (dirac::energy(k, mass) == 0.0) continue;
      const dirac::Matrix4c proj = dirac::energy_projector(packet.sign, k, mass);
      dirac::Spinor v;
      for (int s = 0; s < 4; ++s) v[s] = phi[s * pts + site];
      v = proj * v;
      for (int s = 0; s < 4; ++s) phi[s * pts + site] = v[s];
    }
    plan.backward(phi.data());
  }

  CompensatedSum n2;
  for (const auto& c : phi) n2.add(std::norm(c));
  const double norm = std::sqrt(n2.value() * grid.cell_volume());
  if (!(norm > 1e-12)) {
    throw DegenerateInputError("packet has zero norm after energy projection");
  }
  for (auto& c : phi) c /= norm;
  return phi;
}

ConfigAmplitude init_amplitude(const GridSpec& grid, double mass,
                               const std::vector<PacketSpec>& packets,
                               std::size_t memory_budget) {
  const int omega = static_cast<int>(packets.size());
  if (omega < 1) throw DomainError("init_amplitude: need at least one packet");
  ConfigAmplitude psi(grid, omega, mass, memory_budget);
  const std::size_t pts = grid.points();

  std::vector<std::vector<cplx>> phis;
  for (const auto& p : packets) phis.push_back(single_particle_state(grid, mass, p));

  std::vector<int> perm(omega);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::pair<std::vector<int>, double>> perms;
  do {
    int inversions = 0;
    for (int i = 0; i < omega; ++i)
      for (int j = i + 1; j < omega; ++j) inversions += perm[i] > perm[j];
    perms.emplace_back(perm, inversions % 2 ? -1.0 : 1.0);
  } while (std::next_permutation(perm.begin(), perm.end()));

  const std::size_t sites = psi.sites();
  #pragma omp parallel for schedule(static)
  for (std::size_t spin = 0; spin < psi.spins(); ++spin) {
    std::vector<std::size_t> idx(omega);
    for (std::size_t site = 0; site < sites; ++site) {
      std::size_t rem = site;
      for (int j = omega - 1; j >= 0; --j) {
        idx[j] = psi.spin_of(spin, j) * pts + rem % pts;
        rem /= pts;
      }
      cplx acc = 0.0;
      for (const auto& [pm, sign] : perms) {
        cplx term = sign;
        for (int j = 0; j < omega; ++j) term *= phis[pm[j]][idx[j]];
        acc += term;
      }
      psi.at(spin, site) = acc;
    }
  }

  CompensatedSum n2;
  for (const auto& c : psi.data) n2.add(std::norm(c));
  const double norm2 = n2.value() * psi.cell_volume();
  if (!(norm2 > 1e-12)) {
    throw DegenerateInputError(
        "antisymmetrized product vanishes (identical or linearly dependent "
        "packets)");
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& c : psi.data) c *= inv;
  return psi;
}

ConfigAmplitude exchange(const ConfigAmplitude& psi, int i, int j) {
  if (i < 0 || j < 0 || i >= psi.omega || j >= psi.omega) {
    throw DomainError("exchange: slot out of range");
  }
  ConfigAmplitude out = psi;
  if (i == j) return out;
  const int d = psi.grid.dim;
  const std::size_t sites = psi.sites();
  std::vector<std::size_t> site_map(sites);
  for (std::size_t site = 0; site < sites; ++site) {
    std::size_t target = site;
    for (int a = 0; a < d; ++a) {
      const int gi = i * d + a, gj = j * d + a;
      const std::size_t si = psi.axis_stride(gi), sj = psi.axis_stride(gj);
      const std::size_t xi = psi.axis_index(site, gi), xj = psi.axis_index(site, gj);
      target = target - xi * si - xj * sj + xj * si + xi * sj;
    }
    site_map[site] = target;
  }
  for (std::size_t spin = 0; spin < psi.spins(); ++spin) {
    const std::size_t ai = psi.spin_of(spin, i), aj = psi.spin_of(spin, j);
    const std::size_t target = spin - ai * psi.spin_stride(i) -
                               aj * psi.spin_stride(j) + aj * psi.spin_stride(i) +
                               ai * psi.spin_stride(j);
    for (std::size_t site = 0; site < sites; ++site) {
      out.at(target, site_map[site]) = psi.at(spin, site);
    }
  }
  return out;
}

double antisymmetry_deviation(const ConfigAmplitude& psi) {
  double dev = 0.0;
  for (int i = 0; i < psi.omega; ++i) {
    for (int j = i + 1; j < psi.omega; ++j) {
      const ConfigAmplitude swapped = exchange(psi, i, j);
      for (std::size_t k = 0; k < psi.data.size(); ++k) {
        dev = std::max(dev, std::abs(psi.data[k] + swapped.data[k]));
      }
    }
  }
  return dev;
}

}  // namespace bellsim
