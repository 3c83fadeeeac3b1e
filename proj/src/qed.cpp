#include "bellsim/qed.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace bellsim::qed {
namespace {

double dot3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

}  // namespace

double PhotonMode::frequency() const { return std::sqrt(dot3(k, k)); }

double PhotonBasis::coefficient(int mode) const {
  return 1.0 / std::sqrt(2.0 * modes[mode].frequency() * volume);
}

Eigen::MatrixXd PhotonBasis::hamiltonian() const {
  return Eigen::VectorXd::Map(energies.data(), energies.size()).asDiagonal();
}

Eigen::VectorXd PhotonBasis::occupation(int mode) const {
  Eigen::VectorXd n(dimension());
  for (std::size_t s = 0; s < dimension(); ++s) n[s] = states[s][mode];
  return n;
}

Eigen::MatrixXcd PhotonBasis::vector_potential(int axis,
                                               const std::array<double, 3>& x) const {
  const auto dim = static_cast<Eigen::Index>(dimension());
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t m = 0; m < modes.size(); ++m) {
    const double eps = modes[m].polarization[axis];
    if (eps == 0.0) continue;
    const cplx phase = std::exp(kI * dot3(modes[m].k, x));
    const double c = eps * coefficient(static_cast<int>(m));
    const Eigen::MatrixXd& low = annihilators[m];
    a += (c * (1.0 + hermiticity_defect) * phase) * low.cast<cplx>();
    a += (c * std::conj(phase)) * low.transpose().cast<cplx>();
  }
  return a;
}

PhotonBasis build_photon_basis(const std::vector<PhotonMode>& modes, int n_max,
                               const GridSpec& grid, double hermiticity_defect) {
  if (n_max < 1) throw DomainError("photon basis: n_max must be >= 1");
  if (modes.empty()) throw DomainError("photon basis: need at least one mode");
  for (const auto& m : modes) {
    const double w = m.frequency();
    if (!(w > 0.0)) throw DomainError("photon basis: mode with k = 0");
    const double e2 = dot3(m.polarization, m.polarization);
    if (std::abs(e2 - 1.0) > 1e-12) {
      throw DomainError("photon basis: polarization must be a unit vector");
    }
    if (std::abs(dot3(m.polarization, m.k)) > 1e-12 * w) {
      throw DomainError("photon basis: polarization not transverse (eps.k != 0)");
    }
  }
  double dim = 1.0;
  for (std::size_t m = 0; m < modes.size(); ++m) dim *= (n_max + 1);
  if (dim > static_cast<double>(kMaxPhotonStates)) {
    throw ResourceError("photon basis: (n_max+1)^modes = " +
                        std::to_string(static_cast<long long>(dim)) +
                        " exceeds " + std::to_string(kMaxPhotonStates));
  }
  PhotonBasis b;
  b.modes = modes;
  b.n_max = n_max;
  b.volume = 1.0;
  for (int a = 0; a < grid.dim; ++a) b.volume *= grid.length;
  b.hermiticity_defect = hermiticity_defect;
  const int nm = static_cast<int>(modes.size());
  const auto total = static_cast<std::size_t>(dim);
  for (std::size_t s = 0; s < total; ++s) {
    std::vector<int> occ(nm);
    std::size_t rem = s;
    for (int m = nm - 1; m >= 0; --m) {
      occ[m] = static_cast<int>(rem % (n_max + 1));
      rem /= (n_max + 1);
    }
    double e = 0.0;
    for (int m = 0; m < nm; ++m) e += occ[m] * modes[m].frequency();
    b.states.push_back(occ);
    b.energies.push_back(e);
  }
  for (int m = 0; m < nm; ++m) {
    std::size_t stride = 1;
    for (int q = nm - 1; q > m; --q) stride *= (n_max + 1);
    Eigen::MatrixXd low = Eigen::MatrixXd::Zero(total, total);
    for (std::size_t s = 0; s < total; ++s) {
      const int n = b.states[s][m];
      if (n > 0) low(s - stride, s) = std::sqrt(static_cast<double>(n));
    }
    b.annihilators.push_back(low);
  }
  return b;
}

QedAmplitude product_state(const ConfigAmplitude& fermions, const PhotonBasis& basis,
                           std::size_t photon_state) {
  if (photon_state >= basis.dimension()) {
    throw DomainError("product_state: photon state out of range");
  }
  QedAmplitude out;
  out.time = fermions.time;
  for (std::size_t g = 0; g < basis.dimension(); ++g) {
    ConfigAmplitude sector = fermions;
    if (g != photon_state) std::fill(sector.data.begin(), sector.data.end(), cplx(0.0));
    out.sectors.push_back(std::move(sector));
  }
  return out;
}

QedPropagator::QedPropagator(const GridSpec& grid, int omega, double mass,
                             double charge, PhotonBasis basis, Scheme scheme)
    : grid_(grid), omega_(omega), charge_(charge), basis_(std::move(basis)),
      scheme_(scheme), free_(grid, omega, mass) {
  // Sites whose photon phases e^{i k.x_j} coincide share one local coupling.
  const std::size_t pts = grid.points();
  const int d = grid.dim;
  std::map<std::vector<long long>, int> particle_classes;
  std::vector<int> particle_class(pts);
  for (std::size_t s = 0; s < pts; ++s) {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    std::size_t rem = s;
    for (int a = d - 1; a >= 0; --a) {
      x[a] = grid.coordinate(static_cast<int>(rem % grid.n));
      rem /= grid.n;
    }
    std::vector<long long> key;
    for (const auto& m : basis_.modes) {
      const double ph = wrap(dot3(m.k, x), 2.0 * kPi);
      key.push_back(std::llround(ph * 1e12) % std::llround(2.0 * kPi * 1e12));
    }
    auto it = particle_classes.emplace(key, static_cast<int>(particle_classes.size())).first;
    particle_class[s] = it->second;
  }
  std::size_t sites = 1;
  for (int j = 0; j < omega; ++j) sites *= pts;
  site_class_.resize(sites);
  std::map<std::vector<int>, int> classes;
  for (std::size_t site = 0; site < sites; ++site) {
    std::vector<int> key(omega);
    std::size_t rem = site;
    for (int j = omega - 1; j >= 0; --j) {
      key[j] = particle_class[rem % pts];
      rem /= pts;
    }
    auto [it, inserted] = classes.emplace(key, static_cast<int>(classes.size()));
    if (inserted) class_rep_.push_back(site);
    site_class_[site] = it->second;
  }
}

Eigen::MatrixXcd QedPropagator::local_coupling(std::size_t site) const {
  const std::size_t pts = grid_.points();
  const int d = grid_.dim;
  const std::size_t spins = std::size_t{1} << (2 * omega_);
  const std::size_t ng = basis_.dimension();
  const auto dim = static_cast<Eigen::Index>(ng * spins);
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(dim, dim);
  const auto& dset = dirac::dirac_set();
  std::size_t rem = site;
  std::vector<std::size_t> psite(omega_);
  for (int j = omega_ - 1; j >= 0; --j) {
    psite[j] = rem % pts;
    rem /= pts;
  }
  for (int j = 0; j < omega_; ++j) {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    std::size_t r = psite[j];
    for (int a = d - 1; a >= 0; --a) {
      x[a] = grid_.coordinate(static_cast<int>(r % grid_.n));
      r /= grid_.n;
    }
    const std::size_t sstride = std::size_t{1} << (2 * (omega_ - 1 - j));
    for (int axis = 0; axis < 3; ++axis) {
      const Eigen::MatrixXcd a = basis_.vector_potential(axis, x);
      if (a.cwiseAbs().maxCoeff() == 0.0) continue;
      const dirac::Matrix4c& alpha = dset.alpha[axis];
      for (std::size_t spin = 0; spin < spins; ++spin) {
        const std::size_t aj = (spin / sstride) % 4;
        const std::size_t base = spin - aj * sstride;
        for (std::size_t bj = 0; bj < 4; ++bj) {
          const cplx al = alpha(aj, bj);
          if (al == 0.0) continue;
          const std::size_t spin2 = base + bj * sstride;
          for (std::size_t g = 0; g < ng; ++g) {
            for (std::size_t g2 = 0; g2 < ng; ++g2) {
              const cplx ag = a(g, g2);
              if (ag == 0.0) continue;
              v(g * spins + spin, g2 * spins + spin2) += charge_ * al * ag;
            }
          }
        }
      }
    }
  }
  return v;
}

const std::vector<Eigen::MatrixXcd>& QedPropagator::exponentials(double dt) const {
  auto it = cache_.find(dt);
  if (it != cache_.end()) return it->second;
  std::vector<Eigen::MatrixXcd> exps;
  exps.reserve(class_rep_.size());
  for (std::size_t rep : class_rep_) {
    const Eigen::MatrixXcd gen = (-kI * dt) * local_coupling(rep);
    exps.push_back(gen.exp());
  }
  return cache_.emplace(dt, std::move(exps)).first->second;
}

void QedPropagator::free_part(QedAmplitude& psi, double dt) const {
  for (std::size_t g = 0; g < psi.sectors.size(); ++g) {
    free_.propagate(psi.sectors[g], dt);
    const cplx phase = std::exp(-kI * (basis_.energies[g] * dt));
    for (auto& c : psi.sectors[g].data) c *= phase;
  }
}

void QedPropagator::interaction(QedAmplitude& psi, double dt) const {
  if (charge_ == 0.0) return;
  const auto& exps = exponentials(dt);
  const std::size_t ng = psi.sectors.size();
  const std::size_t spins = psi.sectors[0].spins();
  const std::size_t sites = psi.sectors[0].sites();
  const auto dim = static_cast<Eigen::Index>(ng * spins);
  #pragma omp parallel
  {
    Eigen::VectorXcd v(dim), w(dim);
    #pragma omp for schedule(static)
    for (std::size_t site = 0; site < sites; ++site) {
      for (std::size_t g = 0; g < ng; ++g)
        for (std::size_t s = 0; s < spins; ++s) v[g * spins + s] = psi.sectors[g].at(s, site);
      w.noalias() = exps[site_class_[site]] * v;
      for (std::size_t g = 0; g < ng; ++g)
        for (std::size_t s = 0; s < spins; ++s) psi.sectors[g].at(s, site) = w[g * spins + s];
    }
  }
}

void QedPropagator::strang(QedAmplitude& psi, double dt) const {
  free_part(psi, 0.5 * dt);
  interaction(psi, dt);
  free_part(psi, 0.5 * dt);
}

void QedPropagator::propagate(QedAmplitude& psi, double dt) const {
  if (psi.sectors.size() != basis_.dimension()) {
    throw DomainError("QedPropagator: amplitude has the wrong number of sectors");
  }
  const double t0 = psi.time;
  if (scheme_ == Scheme::strang) {
    strang(psi, dt);
  } else {
    const double cbrt2 = std::cbrt(2.0);
    const double w1 = 1.0 / (2.0 - cbrt2);
    const double w0 = -cbrt2 / (2.0 - cbrt2);
    strang(psi, w1 * dt);
    strang(psi, w0 * dt);
    strang(psi, w1 * dt);
  }
  psi.time = t0 + dt;
  for (auto& s : psi.sectors) s.time = psi.time;
}

EnergyLedger QedPropagator::energy(const QedAmplitude& psi) const {
  EnergyLedger e;
  CompensatedSum kin, ph;
  for (std::size_t g = 0; g < psi.sectors.size(); ++g) {
    kin.add(free_.energy(psi.sectors[g]));
    ph.add(basis_.energies[g] * norm(psi.sectors[g]));
  }
  e.kinetic = kin.value();
  e.photon = ph.value();
  if (charge_ != 0.0) {
    std::vector<Eigen::MatrixXcd> vs;
    for (std::size_t rep : class_rep_) vs.push_back(local_coupling(rep));
    const std::size_t ng = psi.sectors.size();
    const std::size_t spins = psi.sectors[0].spins();
    const std::size_t sites = psi.sectors[0].sites();
    Eigen::VectorXcd v(ng * spins);
    CompensatedSum acc;
    for (std::size_t site = 0; site < sites; ++site) {
      for (std::size_t g = 0; g < ng; ++g)
        for (std::size_t s = 0; s < spins; ++s) v[g * spins + s] = psi.sectors[g].at(s, site);
      acc.add(v.dot(vs[site_class_[site]] * v).real());
    }
    e.interaction = acc.value() * psi.sectors[0].cell_volume();
  }
  return e;
}

void step_qed(QedAmplitude& psi, double dt, const QedPropagator& prop, long step_index,
              double max_drift) {
  const double before = qed_norm(psi);
  prop.propagate(psi, dt);
  const double after = qed_norm(psi);
  if (!std::isfinite(after) || std::abs(after - before) > max_drift) {
    throw NumericalError("QED step went unstable: norm " + std::to_string(before) +
                             " -> " + std::to_string(after) + " at step " +
                             std::to_string(step_index),
                         step_index, before, after);
  }
}

double qed_norm(const QedAmplitude& psi) {
  CompensatedSum acc;
  for (const auto& s : psi.sectors) acc.add(norm(s));
  return acc.value();
}

std::vector<double> sector_norms(const QedAmplitude& psi) {
  std::vector<double> out;
  for (const auto& s : psi.sectors) out.push_back(norm(s));
  return out;
}

double photon_number(const QedAmplitude& psi, const PhotonBasis& basis, int mode) {
  CompensatedSum acc;
  for (std::size_t g = 0; g < psi.sectors.size(); ++g) {
    acc.add(basis.states[g][mode] * norm(psi.sectors[g]));
  }
  return acc.value();
}

std::pair<DensityField, CurrentField> qed_density_currents(const QedAmplitude& psi) {
  const auto& first = psi.sectors.at(0);
  DensityField rho = zero_density(first.grid, first.omega);
  CurrentField j = zero_currents(first.grid, first.omega);
  for (const auto& s : psi.sectors) {
    accumulate_density(s, rho);
    accumulate_currents(s, j);
  }
  return {std::move(rho), std::move(j)};
}

double qed_continuity_residual(const QedAmplitude& psi0, const QedAmplitude& psi1) {
  const auto [r0, j0] = qed_density_currents(psi0);
  const auto [r1, j1] = qed_density_currents(psi1);
  return continuity_residual(r0, j0, r1, j1, psi1.time - psi0.time);
}

VelocityField qed_velocity(const QedAmplitude& psi, double node_eps) {
  const auto [rho, j] = qed_density_currents(psi);
  return velocity_field(rho, j, node_eps);
}

double qed_antisymmetry_deviation(const QedAmplitude& psi) {
  double dev = 0.0;
  for (const auto& s : psi.sectors) dev = std::max(dev, antisymmetry_deviation(s));
  return dev;
}

}  // namespace bellsim::qed
