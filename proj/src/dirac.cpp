#include "bellsim/dirac.hpp"

#include <cmath>
#include <random>
#include <string>

namespace bellsim::dirac {
namespace {

using Matrix2c = Eigen::Matrix2cd;

std::array<Matrix2c, 3> pauli() {
  Matrix2c sx, sy, sz;
  sx << 0, 1, 1, 0;
  sy << 0, -kI, kI, 0;
  sz << 1, 0, 0, -1;
  return {sx, sy, sz};
}

double max_abs(const Matrix4c& m) { return m.cwiseAbs().maxCoeff(); }

void fix_phase(Spinor& s) {
  const double scale = s.norm();
  for (int i = 0; i < 4; ++i) {
    const double mag = std::abs(s[i]);
    if (mag > 1e-12 * scale) {
      s *= std::conj(s[i]) / mag;
      s[i] = mag;
      return;
    }
  }
}

}  // namespace

DiracSet build_dirac_set() {
  DiracSet d;
  const auto sigma = pauli();
  d.beta.setZero();
  d.beta.topLeftCorner<2, 2>().setIdentity();
  d.beta.bottomRightCorner<2, 2>() = -Matrix2c::Identity();
  for (int j = 0; j < 3; ++j) {
    d.alpha[j].setZero();
    d.alpha[j].topRightCorner<2, 2>() = sigma[j];
    d.alpha[j].bottomLeftCorner<2, 2>() = sigma[j];
  }
  d.gamma[0] = d.beta;
  for (int j = 0; j < 3; ++j) d.gamma[j + 1] = d.beta * d.alpha[j];
  return d;
}

const DiracSet& dirac_set() {
  static const DiracSet instance = build_dirac_set();
  return instance;
}

double energy(const Momentum& p, double mass) {
  if (!(mass >= 0.0)) throw DomainError("energy: mass must be >= 0");
  return std::sqrt(p.squaredNorm() + mass * mass);
}

Matrix4c hamiltonian(const Momentum& p, double mass) {
  const auto& d = dirac_set();
  return p[0] * d.alpha[0] + p[1] * d.alpha[1] + p[2] * d.alpha[2] +
         mass * d.beta;
}

Matrix4c energy_projector(EnergySign sign, const Momentum& k, double mass) {
  const double e = energy(k, mass);
  if (!(e > 0.0)) throw DomainError("energy_projector: E_k must be > 0");
  const double s = sign == EnergySign::positive ? 1.0 : -1.0;
  return 0.5 * (Matrix4c::Identity() + (s / e) * hamiltonian(k, mass));
}

Spinor energy_eigenspinor(EnergySign sign, int spin, const Momentum& k,
                          double mass) {
  if (spin != 1 && spin != 2) {
    throw DomainError("energy_eigenspinor: spin must be 1 or 2");
  }
  const int rest_index =
      (sign == EnergySign::positive ? 0 : 2) + (spin - 1);
  Spinor s = energy_projector(sign, k, mass).col(rest_index);
  s.normalize();
  fix_phase(s);
  return s;
}

PlaneWaveSpinor plane_wave_spinor(EnergySign kind, int spin,
                                  const Momentum& p, double mass,
                                  double volume) {
  if (!(mass > 0.0)) {
    throw DomainError(
        "plane_wave_spinor: normalization E/(V m) undefined for m <= 0");
  }
  if (!(volume > 0.0)) throw DomainError("plane_wave_spinor: V must be > 0");
  const Momentum k = kind == EnergySign::positive ? p : Momentum(-p);
  Spinor s = energy_eigenspinor(kind, spin, k, mass);
  s *= std::sqrt(energy(p, mass) / (volume * mass));
  return {s, kind, spin, p, mass, volume};
}

std::vector<CheckResult> algebra_checks(int random_draws,
                                        unsigned long long seed) {
  constexpr double kTol = 1e-12;
  std::vector<CheckResult> out;
  const DiracSet d = build_dirac_set();
  const Matrix4c id = Matrix4c::Identity();

  for (int j = 0; j < 3; ++j) {
    const std::string a = "alpha" + std::to_string(j + 1);
    out.push_back(make_check("{" + a + ",beta}=0",
                             max_abs(anticommutator(d.alpha[j], d.beta)),
                             kTol));
    for (int k = j; k < 3; ++k) {
      const Matrix4c expect = j == k ? Matrix4c(2.0 * id) : Matrix4c::Zero();
      out.push_back(make_check(
          "{" + a + ",alpha" + std::to_string(k + 1) + "}=2delta",
          max_abs(anticommutator(d.alpha[j], d.alpha[k]) - expect), kTol));
    }
    out.push_back(make_check(a + " hermitian",
                             max_abs(d.alpha[j] - d.alpha[j].adjoint()),
                             kTol));
  }
  out.push_back(make_check("beta^2=1", max_abs(d.beta * d.beta - id), kTol));
  out.push_back(
      make_check("beta hermitian", max_abs(d.beta - d.beta.adjoint()), kTol));

  const double metric[4] = {1.0, -1.0, -1.0, -1.0};
  for (int mu = 0; mu < 4; ++mu) {
    for (int nu = mu; nu < 4; ++nu) {
      const Matrix4c expect =
          mu == nu ? Matrix4c(2.0 * metric[mu] * id) : Matrix4c::Zero();
      out.push_back(make_check(
          "{gamma" + std::to_string(mu) + ",gamma" + std::to_string(nu) +
              "}=2g",
          max_abs(anticommutator(d.gamma[mu], d.gamma[nu]) - expect), kTol));
    }
  }
  for (int j = 0; j < 3; ++j) {
    out.push_back(make_check("beta*gamma" + std::to_string(j + 1) + "=alpha" +
                                 std::to_string(j + 1),
                             max_abs(d.beta * d.gamma[j + 1] - d.alpha[j]),
                             kTol));
  }

  // Spinor eigen-equations, normalization and completeness at random (p, m).
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> pdist(-5.0, 5.0);
  std::uniform_real_distribution<double> mdist(0.1, 5.0);
  std::uniform_real_distribution<double> vdist(0.5, 10.0);
  double eig_res = 0.0, norm_res = 0.0, orth_res = 0.0, inv_cond = 1.0;
  for (int n = 0; n < random_draws; ++n) {
    const Momentum p(pdist(gen), pdist(gen), pdist(gen));
    const double m = mdist(gen);
    const double v = vdist(gen);
    const double e = energy(p, m);
    Eigen::Matrix4cd basis;
    for (int s = 1; s <= 2; ++s) {
      const auto u = plane_wave_spinor(EnergySign::positive, s, p, m, v);
      const auto w = plane_wave_spinor(EnergySign::negative, s, p, m, v);
      const auto& uc = u.components;
      const auto& wc = w.components;
      eig_res = std::max(eig_res, (hamiltonian(p, m) * uc - e * uc).norm() /
                                      (e * uc.norm()));
      eig_res = std::max(eig_res, (hamiltonian(-p, m) * wc + e * wc).norm() /
                                      (e * wc.norm()));
      const double target = e / (v * m);
      norm_res = std::max(norm_res,
                          std::abs(uc.squaredNorm() - target) / target);
      norm_res = std::max(norm_res,
                          std::abs(wc.squaredNorm() - target) / target);
      // v_r(-p) shares the operator alpha.p + m beta with u_s(p).
      for (int r = 1; r <= 2; ++r) {
        const auto vm = plane_wave_spinor(EnergySign::negative, r, -p, m, v);
        orth_res = std::max(orth_res,
                            std::abs(uc.dot(vm.components)) / target);
      }
      basis.col(s - 1) = uc;
      basis.col(s + 1) =
          plane_wave_spinor(EnergySign::negative, s, -p, m, v).components;
    }
    Eigen::JacobiSVD<Eigen::Matrix4cd> svd(basis);
    const auto sv = svd.singularValues();
    inv_cond = std::min(inv_cond, sv[3] / sv[0]);
  }
  out.push_back(make_check("spinor eigen-equation residual / E_p", eig_res,
                           kTol));
  out.push_back(make_check("spinor normalization E/(Vm)", norm_res, kTol));
  out.push_back(make_check("u_s(p) orthogonal to v_r(-p)", orth_res, kTol));
  // Completeness: smallest inverse condition number over draws must be O(1).
  out.push_back(make_check("{u1,u2,v1(-p),v2(-p)} linearly independent",
                           1.0 - inv_cond, 1.0 - 1e-6));
  return out;
}

}  // namespace bellsim::dirac
