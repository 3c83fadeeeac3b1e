#include "bellsim/fock.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include "bellsim/dirac.hpp"

namespace bellsim::fock {
namespace {

using Triplet = Eigen::Triplet<cplx>;
using dirac::EnergySign;

SparseOp identity(std::size_t dim) {
  SparseOp id(dim, dim);
  id.setIdentity();
  return id;
}

SparseOp diagonal_from(const std::vector<double>& diag) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < diag.size(); ++i) {
    if (diag[i] != 0.0) t.emplace_back(i, i, diag[i]);
  }
  SparseOp op(diag.size(), diag.size());
  op.setFromTriplets(t.begin(), t.end());
  return op;
}

// Restriction of an operator to a list of basis states, as a dense block.
Eigen::MatrixXcd restrict_to(const SparseOp& op,
                             const std::vector<std::uint64_t>& states) {
  Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(states.size(), states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = 0; j < states.size(); ++j) {
      block(i, j) = op.coeff(static_cast<Eigen::Index>(states[i]),
                             static_cast<Eigen::Index>(states[j]));
    }
  }
  return block;
}

}  // namespace

// ---------------------------------------------------------------------------
// ModeSet

ModeSet::ModeSet(std::vector<int> momentum_numbers, double length, double mass)
    : length_(length), mass_(mass), numbers_(std::move(momentum_numbers)) {
  if (!(length > 0.0)) throw DomainError("ModeSet: length must be > 0");
  if (!(mass > 0.0)) throw DomainError("ModeSet: mass must be > 0");
  if (numbers_.empty()) throw DomainError("ModeSet: empty momentum list");
  std::sort(numbers_.begin(), numbers_.end());
  if (std::adjacent_find(numbers_.begin(), numbers_.end()) != numbers_.end()) {
    throw DomainError("ModeSet: duplicate momentum");
  }
  const std::set<int> lookup(numbers_.begin(), numbers_.end());
  for (int n : numbers_) {
    if (!lookup.count(-n)) {
      throw DomainError("ModeSet: momentum list not closed under p -> -p");
    }
  }
  // Jordan-Wigner order: energy sign (c before zeta), momentum, spin.
  for (ModeKind kind : {ModeKind::electron, ModeKind::zeta}) {
    for (int n : numbers_) {
      for (int s = 1; s <= 2; ++s) modes_.push_back({kind, n, s});
    }
  }
}

ModeSet ModeSet::symmetric(int n_max, double length, double mass) {
  if (n_max < 0) throw DomainError("ModeSet: n_max must be >= 0");
  std::vector<int> ns;
  for (int n = -n_max; n <= n_max; ++n) ns.push_back(n);
  return ModeSet(std::move(ns), length, mass);
}

double ModeSet::momentum(int number) const {
  return 2.0 * kPi * number / length_;
}

double ModeSet::energy(int number) const {
  const double p = momentum(number);
  return std::sqrt(p * p + mass_ * mass_);
}

int ModeSet::index(ModeKind kind, int number, int spin) const {
  for (std::size_t j = 0; j < modes_.size(); ++j) {
    const auto& m = modes_[j];
    if (m.kind == kind && m.number == number && m.spin == spin) {
      return static_cast<int>(j);
    }
  }
  throw DomainError("ModeSet::index: no such mode");
}

// ---------------------------------------------------------------------------
// Ladder operators

std::vector<SparseOp> build_ladder_operators(const ModeSet& modes) {
  return build_ladder_operators(modes.mode_count());
}

std::vector<SparseOp> build_ladder_operators(int m) {
  if (m < 1) throw DomainError("build_ladder_operators: need at least one mode");
  if (m > kMaxModes) {
    throw ResourceError("build_ladder_operators: " + std::to_string(m) +
                        " modes exceeds the limit of " +
                        std::to_string(kMaxModes) + " (dimension 2^M)");
  }
  const std::uint64_t dim = std::uint64_t{1} << m;
  std::vector<SparseOp> out;
  out.reserve(m);
  for (int j = 0; j < m; ++j) {
    const std::uint64_t bit = std::uint64_t{1} << j;
    const std::uint64_t below = bit - 1;
    std::vector<Triplet> t;
    t.reserve(dim / 2);
    for (std::uint64_t s = 0; s < dim; ++s) {
      if (!(s & bit)) continue;
      const double sign = (std::popcount(s & below) % 2) ? -1.0 : 1.0;
      t.emplace_back(s ^ bit, s, sign);
    }
    SparseOp a(dim, dim);
    a.setFromTriplets(t.begin(), t.end());
    out.push_back(std::move(a));
  }
  return out;
}

// ---------------------------------------------------------------------------
// FockSystem

FockSystem::FockSystem(ModeSet modes, int grid_points)
    : modes_(std::move(modes)), grid_points_(grid_points) {
  if (grid_points < 1) throw DomainError("FockSystem: grid_points must be >= 1");
  ladder_ = build_ladder_operators(modes_);
  for (const auto& mode : modes_.modes()) {
    const double p = modes_.momentum(mode.number);
    const dirac::Momentum pv(p, 0.0, 0.0);
    // Unit volume: the explicit 1/sqrt(V) in the expansion carries the box.
    if (mode.kind == ModeKind::electron) {
      spinors_.push_back(dirac::plane_wave_spinor(EnergySign::positive,
                                                  mode.spin, pv, modes_.mass(),
                                                  1.0)
                             .components);
    } else {
      spinors_.push_back(dirac::plane_wave_spinor(EnergySign::negative,
                                                  mode.spin, -pv,
                                                  modes_.mass(), 1.0)
                             .components);
    }
  }
}

int FockSystem::site_of(double x) const {
  const double u = x / spacing();
  const double r = std::round(u);
  if (std::abs(u - r) > 1e-9) {
    throw DomainError("FockSystem: x = " + std::to_string(x) +
                      " is not a grid point");
  }
  const long n = static_cast<long>(r);
  return static_cast<int>(((n % grid_points_) + grid_points_) % grid_points_);
}

double FockSystem::mode_momentum(int mode) const {
  return modes_.momentum(modes_.modes()[mode].number);
}

cplx FockSystem::mode_function(int mode, int spinor, int site) const {
  const auto& md = modes_.modes()[mode];
  const double p = modes_.momentum(md.number);
  const double coef =
      std::sqrt(modes_.mass() / modes_.energy(md.number) / modes_.length());
  return coef * spinors_[mode][spinor] * std::exp(kI * (p * position(site)));
}

SparseOp FockSystem::field(int spinor, int site) const {
  SparseOp psi(dimension(), dimension());
  for (int j = 0; j < mode_count(); ++j) {
    const cplx c = mode_function(j, spinor, site);
    if (c != 0.0) psi += c * ladder_[j];
  }
  return psi;
}

double FockSystem::truncated_delta(double dx) const {
  CompensatedSum s;
  for (int n : modes_.numbers()) s.add(std::cos(modes_.momentum(n) * dx));
  return s.value() / modes_.length();
}

SparseOp FockSystem::one_body(const Eigen::MatrixXcd& coeffs) const {
  SparseOp out(dimension(), dimension());
  for (int i = 0; i < mode_count(); ++i) {
    for (int j = 0; j < mode_count(); ++j) {
      if (coeffs(i, j) == 0.0) continue;
      out += coeffs(i, j) * SparseOp(creator(i) * ladder_[j]);
    }
  }
  return out;
}

StateVector FockSystem::fermion_vacuum() const {
  StateVector v = StateVector::Zero(dimension());
  v[0] = 1.0;
  return v;
}

std::uint64_t FockSystem::particle_vacuum_index() const {
  std::uint64_t idx = 0;
  for (int j = 0; j < mode_count(); ++j) {
    if (modes_.modes()[j].kind == ModeKind::zeta) idx |= std::uint64_t{1} << j;
  }
  return idx;
}

StateVector FockSystem::particle_vacuum() const {
  StateVector v = StateVector::Zero(dimension());
  v[static_cast<Eigen::Index>(particle_vacuum_index())] = 1.0;
  return v;
}

// ---------------------------------------------------------------------------
// Observables

Observable parse_observable(const std::string& name) {
  if (name == "H_D") return Observable::hamiltonian;
  if (name == "F") return Observable::fermion_number;
  if (name == "N") return Observable::particle_number;
  if (name == "P") return Observable::momentum;
  if (name == "J") return Observable::current;
  throw DomainError("unknown observable kind '" + name + "'");
}

std::string observable_name(Observable kind) {
  switch (kind) {
    case Observable::hamiltonian: return "H_D";
    case Observable::fermion_number: return "F";
    case Observable::particle_number: return "N";
    case Observable::momentum: return "P";
    case Observable::current: return "J";
  }
  return "?";
}

SparseOp assemble_observable(Observable kind, const FockSystem& sys) {
  const auto& modes = sys.modes();
  const std::uint64_t dim = sys.dimension();
  std::vector<double> diag(dim, 0.0);
  for (std::uint64_t s = 0; s < dim; ++s) {
    CompensatedSum acc;
    for (int j = 0; j < sys.mode_count(); ++j) {
      const auto& md = modes.modes()[j];
      const bool occupied = (s >> j) & 1U;
      const bool electron = md.kind == ModeKind::electron;
      const double occ = occupied ? 1.0 : 0.0;
      const double p = modes.momentum(md.number);
      switch (kind) {
        case Observable::hamiltonian:
          acc.add((electron ? 1.0 : -1.0) * modes.energy(md.number) * occ);
          break;
        case Observable::fermion_number:
          acc.add(occ);
          break;
        case Observable::particle_number:
          // d^dagger_s(-q) d_s(-q) = zeta_s(q) zeta_s(q)^dagger = 1 - n_zeta.
          acc.add(electron ? occ : 1.0 - occ);
          break;
        case Observable::momentum:
          acc.add(p * occ);
          break;
        case Observable::current:
          acc.add((electron ? 1.0 : -1.0) * p * occ);
          break;
      }
    }
    diag[s] = acc.value();
  }
  return diagonal_from(diag);
}

SparseOp field_bilinear(Observable kind, const FockSystem& sys) {
  if (kind != Observable::hamiltonian && kind != Observable::fermion_number &&
      kind != Observable::momentum) {
    throw DomainError("field_bilinear: only H_D, F and P have a field route");
  }
  const int m = sys.mode_count();
  const double h = sys.spacing();
  const double mass = sys.modes().mass();
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(m, m);
  for (int j = 0; j < m; ++j) {
    const double pj = sys.mode_momentum(j);
    dirac::Matrix4c op;
    switch (kind) {
      case Observable::hamiltonian:
        op = dirac::hamiltonian(dirac::Momentum(pj, 0.0, 0.0), mass);
        break;
      case Observable::momentum:
        op = pj * dirac::Matrix4c::Identity();
        break;
      default:
        op = dirac::Matrix4c::Identity();
        break;
    }
    for (int i = 0; i < m; ++i) {
      cplx acc = 0.0;
      for (int site = 0; site < sys.grid_points(); ++site) {
        Eigen::Vector4cd phi_i, phi_j;
        for (int a = 0; a < 4; ++a) {
          phi_i[a] = sys.mode_function(i, a, site);
          phi_j[a] = sys.mode_function(j, a, site);
        }
        acc += phi_i.dot(op * phi_j);
      }
      g(i, j) = h * acc;
    }
  }
  // Entries at roundoff level are exact zeros of the continuum sum.
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (std::abs(g(i, j)) < 1e-14) g(i, j) = 0.0;
    }
  }
  return sys.one_body(g);
}

SparseOp fermion_density(int site, const FockSystem& sys) {
  if (site < 0 || site >= sys.grid_points()) {
    throw DomainError("fermion_density: site out of range");
  }
  SparseOp rho(sys.dimension(), sys.dimension());
  for (int a = 0; a < 4; ++a) {
    const SparseOp psi = sys.field(a, site);
    rho += SparseOp(psi.adjoint() * psi);
  }
  rho.prune(cplx(0.0), 1e-15);
  return rho;
}

SparseOp fermion_density_at(double x, const FockSystem& sys) {
  return fermion_density(sys.site_of(x), sys);
}

SparseOp charge_density(int site, double charge, const FockSystem& sys) {
  return -charge * fermion_density(site, sys);
}

SparseOp newton_wigner_density(int site, const FockSystem& sys) {
  if (site < 0 || site >= sys.grid_points()) {
    throw DomainError("newton_wigner_density: site out of range");
  }
  const auto& modes = sys.modes();
  const double x = sys.position(site);
  const double norm = 1.0 / std::sqrt(modes.length());
  SparseOp n(sys.dimension(), sys.dimension());
  for (int s = 1; s <= 2; ++s) {
    SparseOp c_field(sys.dimension(), sys.dimension());
    SparseOp d_field(sys.dimension(), sys.dimension());
    for (int num : modes.numbers()) {
      const cplx phase = norm * std::exp(kI * (modes.momentum(num) * x));
      c_field += phase * sys.annihilator(modes.index(ModeKind::electron, num, s));
      // d_s(p) = zeta_s(-p)^dagger
      d_field += phase * sys.creator(modes.index(ModeKind::zeta, -num, s));
    }
    n += SparseOp(c_field.adjoint() * c_field);
    n += SparseOp(d_field.adjoint() * d_field);
  }
  n.prune(cplx(0.0), 1e-15);
  return n;
}

// ---------------------------------------------------------------------------
// Operator helpers

double max_abs(const SparseOp& op) {
  double m = 0.0;
  for (int k = 0; k < op.outerSize(); ++k) {
    for (SparseOp::InnerIterator it(op, k); it; ++it) {
      m = std::max(m, std::abs(it.value()));
    }
  }
  return m;
}

SparseOp commutator(const SparseOp& a, const SparseOp& b) {
  return SparseOp(a * b) - SparseOp(b * a);
}

SparseOp anticommutator(const SparseOp& a, const SparseOp& b) {
  return SparseOp(a * b) + SparseOp(b * a);
}

// ---------------------------------------------------------------------------
// Density vs Newton-Wigner number commutator

namespace {

SparseOp smeared_density(std::span<const double> f, const FockSystem& sys) {
  if (static_cast<int>(f.size()) != sys.grid_points()) {
    throw DomainError("test function must have one sample per grid point");
  }
  SparseOp g(sys.dimension(), sys.dimension());
  for (int site = 0; site < sys.grid_points(); ++site) {
    if (f[site] == 0.0) continue;
    g += (sys.spacing() * f[site]) * fermion_density(site, sys);
  }
  return g;
}

// sum_x h f(x) exp(-i k x)
cplx smeared_phase(std::span<const double> f, const FockSystem& sys, double k) {
  cplx acc = 0.0;
  for (int site = 0; site < sys.grid_points(); ++site) {
    acc += f[site] * std::exp(-kI * (k * sys.position(site)));
  }
  return sys.spacing() * acc;
}

}  // namespace

DensityNumberNorms density_number_commutator_norms(std::span<const double> f,
                                        const FockSystem& sys) {
  const auto& modes = sys.modes();
  const SparseOp g = smeared_density(f, sys);
  const SparseOp n = assemble_observable(Observable::particle_number, sys);
  const SparseOp k = commutator(g, n);

  // Subspace: |0> plus every c^dagger_s(p) d^dagger_r(q) |0>.
  const std::uint64_t vac = sys.particle_vacuum_index();
  std::vector<std::uint64_t> states{vac};
  for (int i = 0; i < sys.mode_count(); ++i) {
    if (modes.modes()[i].kind != ModeKind::electron) continue;
    for (int j = 0; j < sys.mode_count(); ++j) {
      if (modes.modes()[j].kind != ModeKind::zeta) continue;
      states.push_back(vac ^ (std::uint64_t{1} << i) ^ (std::uint64_t{1} << j));
    }
  }
  const Eigen::MatrixXcd block = restrict_to(k, states);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(block);
  DensityNumberNorms out;
  out.direct = svd.singularValues()(0);

  // Closed form: the block is [[0, -y^dagger], [y, 0]] with
  // |y_{s p r k}| = 2 m / (V sqrt(E_p E_k)) |u_s(p)^dagger v_r(k) f~(p + k)|.
  const double mass = modes.mass();
  const double vol = modes.length();
  CompensatedSum sq;
  for (int np : modes.numbers()) {
    for (int nk : modes.numbers()) {
      const double p = modes.momentum(np);
      const double kk = modes.momentum(nk);
      const cplx ft = smeared_phase(f, sys, p + kk);
      const double pref =
          2.0 * mass / (vol * std::sqrt(modes.energy(np) * modes.energy(nk)));
      for (int s = 1; s <= 2; ++s) {
        const auto u = dirac::plane_wave_spinor(
            EnergySign::positive, s, dirac::Momentum(p, 0, 0), mass, 1.0);
        for (int r = 1; r <= 2; ++r) {
          const auto v = dirac::plane_wave_spinor(
              EnergySign::negative, r, dirac::Momentum(kk, 0, 0), mass, 1.0);
          const double y =
              pref * std::abs(u.components.dot(v.components) * ft);
          sq.add(y * y);
        }
      }
    }
  }
  out.closed_form = std::sqrt(sq.value());
  return out;
}

double verify_density_number_commutator(std::span<const double> f,
                                  const FockSystem& sys) {
  if (sys.modes().numbers().size() < 2) {
    throw DomainError(
        "verify_density_number_commutator: needs at least two distinct momenta");
  }
  const DensityNumberNorms n = density_number_commutator_norms(f, sys);
  const double scale = std::max(n.direct, n.closed_form);
  if (std::abs(n.direct - n.closed_form) > 1e-10 * scale + 1e-13) {
    throw InternalConsistencyError(
        "density-number commutator: direct norm " + std::to_string(n.direct) +
        " != closed-form norm " + std::to_string(n.closed_form));
  }
  return n.direct;
}

cplx density_number_element_direct(std::span<const double> f,
                                    const FockSystem& sys, int s, int r,
                                    int number) {
  const auto& modes = sys.modes();
  const SparseOp g = smeared_density(f, sys);
  const SparseOp n = assemble_observable(Observable::particle_number, sys);
  const SparseOp k = commutator(g, n);
  // d_r^dagger(p0) = zeta_r(-p0)
  const int c_idx = modes.index(ModeKind::electron, number, s);
  const int z_idx = modes.index(ModeKind::zeta, -number, r);
  const StateVector vac = sys.particle_vacuum();
  const StateVector pair =
      sys.annihilator(z_idx) * (sys.creator(c_idx) * vac);
  return vac.dot(k * pair);
}

cplx density_number_element_closed_form(std::span<const double> f,
                                         const FockSystem& sys, int s, int r,
                                         int number) {
  const auto& modes = sys.modes();
  const double p = modes.momentum(number);
  const double mass = modes.mass();
  const auto u = dirac::plane_wave_spinor(EnergySign::positive, s,
                                          dirac::Momentum(p, 0, 0), mass, 1.0);
  const auto v = dirac::plane_wave_spinor(EnergySign::negative, r,
                                          dirac::Momentum(p, 0, 0), mass, 1.0);
  const cplx ft = smeared_phase(f, sys, -2.0 * p);
  return -2.0 * mass / (modes.length() * modes.energy(number)) *
         v.components.dot(u.components) * ft;
}

// ---------------------------------------------------------------------------
// Super-selection

double superselection_leak(const SparseOp& hamiltonian,
                           const SparseOp& fermion_number, double t) {
  const Eigen::MatrixXcd h(hamiltonian);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::VectorXcd phases =
      (-kI * t * es.eigenvalues().cast<cplx>()).array().exp();
  const Eigen::MatrixXcd u =
      es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  double leak = 0.0;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const double fi = fermion_number.coeff(i, i).real();
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
      if (std::abs(fermion_number.coeff(j, j).real() - fi) > 0.5) {
        leak = std::max(leak, std::abs(u(i, j)));
      }
    }
  }
  return leak;
}

// ---------------------------------------------------------------------------
// Report

std::vector<CheckResult> fock_checks(const FockSystem& sys) {
  constexpr double kExact = 1e-12;
  std::vector<CheckResult> out;
  const auto& modes = sys.modes();
  const int m = sys.mode_count();
  const std::size_t dim = sys.dimension();
  const SparseOp id = identity(dim);

  double car = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      SparseOp ac = anticommutator(sys.annihilator(i), sys.creator(j));
      if (i == j) ac -= id;
      car = std::max(car, max_abs(ac));
      car = std::max(car, max_abs(anticommutator(sys.annihilator(i),
                                                 sys.annihilator(j))));
    }
  }
  out.push_back(make_check("mode CAR {a_i,a_j^+}=delta, {a_i,a_j}=0", car, kExact));

  {
    double res = 0.0;
    const int mid = sys.grid_points() / 2;
    for (int y : {0, mid}) {
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          const SparseOp psi_b_y = sys.field(b, y);
          for (int x = 0; x < sys.grid_points(); ++x) {
            const SparseOp psi_a_x = sys.field(a, x);
            SparseOp ac = anticommutator(psi_a_x, SparseOp(psi_b_y.adjoint()));
            if (a == b) {
              ac -= sys.truncated_delta(sys.position(x) - sys.position(y)) * id;
            }
            res = std::max(res, max_abs(ac));
            res = std::max(res, max_abs(anticommutator(psi_a_x, psi_b_y)));
          }
        }
      }
    }
    out.push_back(make_check("field CAR {psi_a(x),psi_b^+(y)}=delta_ab Delta_L(x-y)",
                             res, kExact));
  }

  const SparseOp hd = assemble_observable(Observable::hamiltonian, sys);
  const SparseOp f = assemble_observable(Observable::fermion_number, sys);
  const SparseOp n = assemble_observable(Observable::particle_number, sys);
  const SparseOp p = assemble_observable(Observable::momentum, sys);
  const SparseOp j = assemble_observable(Observable::current, sys);

  for (auto kind : {Observable::hamiltonian, Observable::fermion_number,
                    Observable::particle_number, Observable::momentum,
                    Observable::current}) {
    const SparseOp op = assemble_observable(kind, sys);
    out.push_back(make_check(observable_name(kind) + " hermitian",
                             max_abs(SparseOp(op - SparseOp(op.adjoint()))),
                             kExact));
  }
  out.push_back(make_check("[H_D,F]=0", max_abs(commutator(hd, f)), 1e-10));
  out.push_back(make_check("[H_D,N]=0 (free particle number conserved)",
                           max_abs(commutator(hd, n)), 1e-10));

  {
    // F is diagonal with spectrum {0..M}, multiplicity C(M, k).
    std::vector<std::size_t> counts(m + 1, 0);
    double off = 0.0, non_integer = 0.0;
    for (int k = 0; k < f.outerSize(); ++k) {
      for (SparseOp::InnerIterator it(f, k); it; ++it) {
        if (it.row() != it.col()) {
          off = std::max(off, std::abs(it.value()));
        }
      }
    }
    for (std::size_t s = 0; s < dim; ++s) {
      const double v = f.coeff(s, s).real();
      const long r = std::lround(v);
      non_integer = std::max(non_integer, std::abs(v - r));
      if (r >= 0 && r <= m) ++counts[r];
    }
    double mult = 0.0;
    double binom = 1.0;
    for (int k = 0; k <= m; ++k) {
      mult = std::max(mult, std::abs(static_cast<double>(counts[k]) - binom));
      binom = binom * (m - k) / (k + 1);
    }
    out.push_back(make_check("spec(F) = {0..M} with multiplicity C(M,k)",
                             std::max({off, non_integer, mult}), kExact));
  }

  {
    // One-electron table on |0_D>.
    const StateVector vac = sys.fermion_vacuum();
    double res = 0.0;
    for (int i = 0; i < m; ++i) {
      const auto& md = modes.modes()[i];
      const bool electron = md.kind == ModeKind::electron;
      const double e = modes.energy(md.number);
      const double pm = modes.momentum(md.number);
      const StateVector st = sys.creator(i) * vac;
      res = std::max(res, ((hd * st) - (electron ? e : -e) * st).norm());
      res = std::max(res, ((f * st) - st).norm());
      res = std::max(res, ((p * st) - pm * st).norm());
      res = std::max(res, ((j * st) - (electron ? pm : -pm) * st).norm());
    }
    out.push_back(make_check("one-electron eigenvalues of H_D, F, P, J on |0_D>",
                             res, kExact));
  }

  for (auto kind : {Observable::hamiltonian, Observable::fermion_number,
                    Observable::momentum}) {
    const SparseOp mode_form = assemble_observable(kind, sys);
    const SparseOp field_form = field_bilinear(kind, sys);
    out.push_back(make_check(
        observable_name(kind) + " mode sum = integral psi^+ O psi",
        max_abs(SparseOp(mode_form - field_form)), kExact));
  }

  std::vector<SparseOp> densities;
  for (int x = 0; x < sys.grid_points(); ++x) {
    densities.push_back(fermion_density(x, sys));
  }
  {
    SparseOp total(dim, dim);
    double herm = 0.0;
    for (const auto& d : densities) {
      total += sys.spacing() * d;
      herm = std::max(herm, max_abs(SparseOp(d - SparseOp(d.adjoint()))));
    }
    out.push_back(make_check("psi^+psi(x) hermitian", herm, kExact));
    out.push_back(make_check("sum_x h psi^+psi(x) = F",
                             max_abs(SparseOp(total - f)), kExact));
  }

  {
    // F = C + sum (c^+c - d^+d), C = number of zeta modes.
    const double c = m / 2.0;
    std::vector<double> diag(dim, 0.0);
    for (std::size_t s = 0; s < dim; ++s) {
      double acc = c;
      for (int i = 0; i < m; ++i) {
        const bool occ = (s >> i) & 1U;
        if (modes.modes()[i].kind == ModeKind::electron) {
          acc += occ ? 1.0 : 0.0;
        } else {
          acc -= occ ? 0.0 : 1.0;  // d^+d = 1 - n_zeta
        }
      }
      diag[s] = acc;
    }
    out.push_back(make_check("F = C + sum(c^+c - d^+d)",
                             max_abs(SparseOp(f - diagonal_from(diag))),
                             kExact));
  }

  {
    // [psi^+psi(x), psi_b^+(y)] = Delta_L(x - y) psi_b^+(x)
    double res = 0.0;
    const int y = 0;
    for (int b = 0; b < 4; ++b) {
      const SparseOp create_y = sys.field(b, y).adjoint();
      for (int x = 0; x < sys.grid_points(); ++x) {
        const SparseOp create_x = sys.field(b, x).adjoint();
        const double delta =
            sys.truncated_delta(sys.position(x) - sys.position(y));
        res = std::max(res, max_abs(SparseOp(commutator(densities[x], create_y) -
                                              delta * create_x)));
      }
    }
    out.push_back(make_check("[psi^+psi(x), psi_b^+(y)] = Delta_L(x-y) psi_b^+(x)",
                             res, kExact));
  }

  {
    const StateVector vac_d = sys.fermion_vacuum();
    const StateVector vac = sys.particle_vacuum();
    double res_d = 0.0, res_nw = 0.0, herm = 0.0, comm_n = 0.0;
    double nw_vs_density = 0.0;
    SparseOp nw_total(dim, dim);
    for (int x = 0; x < sys.grid_points(); ++x) {
      res_d = std::max(res_d, std::abs(vac_d.dot(densities[x] * vac_d)));
      const SparseOp nw = newton_wigner_density(x, sys);
      res_nw = std::max(res_nw, std::abs(vac.dot(nw * vac)));
      herm = std::max(herm, max_abs(SparseOp(nw - SparseOp(nw.adjoint()))));
      comm_n = std::max(comm_n, max_abs(commutator(nw, n)));
      nw_vs_density =
          std::max(nw_vs_density, max_abs(commutator(nw, densities[x])));
      nw_total += sys.spacing() * nw;
    }
    out.push_back(make_check("<0_D|psi^+psi(x)|0_D> = 0", res_d, kExact));
    out.push_back(make_check("<0|n(x)|0> = 0", res_nw, kExact));
    out.push_back(make_check("n(x) hermitian", herm, kExact));
    out.push_back(make_check("[n(x),N] = 0", comm_n, 1e-10));
    out.push_back(make_check("sum_x h n(x) = N",
                             max_abs(SparseOp(nw_total - n)), kExact));
    // Nonzero is the expected outcome; residual is 1e-10 - ||[n(x), rho(x)]||.
    if (modes.numbers().size() >= 2) {
      out.push_back(make_check("[n(x), psi^+psi(x)] != 0",
                               1e-10 - nw_vs_density, 0.0));
    }
  }

  if (modes.numbers().size() >= 2) {
    std::vector<double> gauss(sys.grid_points()), flat(sys.grid_points(), 1.0);
    const double len = modes.length();
    for (int x = 0; x < sys.grid_points(); ++x) {
      const double d = sys.position(x) - 0.3 * len;
      gauss[x] = std::exp(-d * d / (2.0 * std::pow(0.15 * len, 2)));
    }
    const DensityNumberNorms g = density_number_commutator_norms(gauss, sys);
    const DensityNumberNorms c = density_number_commutator_norms(flat, sys);
    const double scale = std::max(g.direct, g.closed_form);
    out.push_back(make_check("[int f psi^+psi, N]: direct = closed form",
                             std::abs(g.direct - g.closed_form) / scale, 1e-10));
    out.push_back(make_check("[int f psi^+psi, N] != 0 (Gaussian f)",
                             1e-6 - g.direct, 0.0));
    out.push_back(make_check("density-number commutator vanishes for f = 1",
                             std::max(c.direct, c.closed_form), 1e-10));
  }

  {
    // Exact diagonalization is dense; use the two outermost momenta when the
    // full space is too large for it.
    const double t = 0.7;
    if (dim <= 1024) {
      out.push_back(make_check(
          "exp(-i H_D t) block-diagonal in F sectors (ED)",
          superselection_leak(field_bilinear(Observable::hamiltonian, sys), f, t),
          1e-10));
    } else {
      const int nmax = modes.numbers().back();
      const FockSystem small(ModeSet({-nmax, nmax}, modes.length(), modes.mass()),
                             sys.grid_points());
      out.push_back(make_check(
          "exp(-i H_D t) block-diagonal in F sectors (ED, 2-momentum subsystem)",
          superselection_leak(field_bilinear(Observable::hamiltonian, small),
                              assemble_observable(Observable::fermion_number, small),
                              t),
          1e-10));
    }
  }
  return out;
}

}  // namespace bellsim::fock
