#include <doctest.h>

#include <random>

#include "bellsim/dirac.hpp"

using namespace bellsim;
using namespace bellsim::dirac;

namespace {

// Pauli-Dirac matrices typed in entry by entry.
Matrix4c explicit_beta() {
  Matrix4c b = Matrix4c::Zero();
  b(0, 0) = 1;
  b(1, 1) = 1;
  b(2, 2) = -1;
  b(3, 3) = -1;
  return b;
}

Matrix4c explicit_alpha(int j) {
  Matrix4c a = Matrix4c::Zero();
  if (j == 0) {
    a(0, 3) = a(1, 2) = a(2, 1) = a(3, 0) = 1;
  } else if (j == 1) {
    a(0, 3) = -kI;
    a(1, 2) = kI;
    a(2, 1) = -kI;
    a(3, 0) = kI;
  } else {
    a(0, 2) = 1;
    a(1, 3) = -1;
    a(2, 0) = 1;
    a(3, 1) = -1;
  }
  return a;
}

// sigma.p applied to a two-spinor.
Eigen::Vector2cd sigma_dot(const Momentum& p, const Eigen::Vector2cd& c) {
  Eigen::Matrix2cd s;
  s << p[2], cplx(p[0], -p[1]), cplx(p[0], p[1]), -p[2];
  return s * c;
}

void phase_rule(Spinor& s) {
  const double scale = s.norm();
  for (int i = 0; i < 4; ++i) {
    if (std::abs(s[i]) > 1e-12 * scale) {
      s *= std::abs(s[i]) / s[i];
      return;
    }
  }
}

// Textbook closed forms: u = N (chi, sigma.p chi/(E+m)),
// v(p) = N (sigma.p chi/(E+m), chi), N^2 = (E+m)/(2 m V).
Spinor oracle_spinor(EnergySign kind, int s, const Momentum& p, double m, double v) {
  const double e = std::sqrt(p.squaredNorm() + m * m);
  Eigen::Vector2cd chi = Eigen::Vector2cd::Zero();
  chi[s - 1] = 1.0;
  const Eigen::Vector2cd other = sigma_dot(p, chi) / (e + m);
  Spinor out;
  if (kind == EnergySign::positive) {
    out << chi, other;
  } else {
    out << other, chi;
  }
  out *= std::sqrt((e + m) / (2.0 * m * v));
  phase_rule(out);
  return out;
}

}  // namespace

TEST_CASE("Dirac matrices match the explicit Pauli-Dirac entries") {
  const auto& d = dirac_set();
  CHECK((d.beta - explicit_beta()).cwiseAbs().maxCoeff() == 0.0);
  for (int j = 0; j < 3; ++j) {
    CHECK((d.alpha[j] - explicit_alpha(j)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((d.gamma[j + 1] - explicit_beta() * explicit_alpha(j)).cwiseAbs().maxCoeff() ==
          0.0);
  }
  CHECK((d.gamma[0] - explicit_beta()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("algebra_checks all pass within 1e-12") {
  const auto checks = algebra_checks(200, 7);
  CHECK(checks.size() >= 30);
  for (const auto& c : checks) {
    INFO(c.name << " residual " << c.residual);
    CHECK(c.pass);
  }
}

TEST_CASE("dispersion relation") {
  CHECK(energy(Momentum(3, 4, 0), 0.0) == doctest::Approx(5.0));
  CHECK(energy(Momentum(0, 0, 0), 2.5) == doctest::Approx(2.5));
  CHECK(energy(Momentum(1, 2, 2), 4.0) == doctest::Approx(5.0));
  CHECK_THROWS_AS(energy(Momentum(1, 0, 0), -1.0), DomainError);
}

TEST_CASE("plane-wave spinors equal the closed-form oracle") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> pd(-4.0, 4.0), md(0.2, 3.0), vd(0.5, 5.0);
  for (int draw = 0; draw < 300; ++draw) {
    const Momentum p(pd(gen), pd(gen), pd(gen));
    const double m = md(gen), v = vd(gen);
    for (auto kind : {EnergySign::positive, EnergySign::negative}) {
      for (int s = 1; s <= 2; ++s) {
        const auto got = plane_wave_spinor(kind, s, p, m, v).components;
        const auto want = oracle_spinor(kind, s, p, m, v);
        CHECK((got - want).norm() <= 1e-12 * want.norm());
      }
    }
  }
}

TEST_CASE("spinor properties: normalization, Lorentz scalar, orthogonality") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> pd(-6.0, 6.0), md(0.1, 4.0);
  const auto& d = dirac_set();
  for (int draw = 0; draw < 200; ++draw) {
    const Momentum p(pd(gen), pd(gen), pd(gen));
    const double m = md(gen), v = 2.0;
    const double e = energy(p, m);
    for (int s = 1; s <= 2; ++s) {
      const auto u = plane_wave_spinor(EnergySign::positive, s, p, m, v).components;
      const auto w = plane_wave_spinor(EnergySign::negative, s, p, m, v).components;
      CHECK(u.squaredNorm() == doctest::Approx(e / (v * m)).epsilon(1e-12));
      CHECK(w.squaredNorm() == doctest::Approx(e / (v * m)).epsilon(1e-12));
      // ubar u = 1/V, vbar v = -1/V.
      CHECK(std::real(u.dot(d.beta * u)) == doctest::Approx(1.0 / v).epsilon(1e-11));
      CHECK(std::real(w.dot(d.beta * w)) == doctest::Approx(-1.0 / v).epsilon(1e-11));
      for (int r = 1; r <= 2; ++r) {
        const auto u2 = plane_wave_spinor(EnergySign::positive, r, p, m, v).components;
        if (r != s) CHECK(std::abs(u.dot(u2)) <= 1e-12 * e);
      }
    }
  }
}

TEST_CASE("phase convention: first significant component is real and positive") {
  const Momentum p(0.3, -1.2, 0.7);
  for (auto kind : {EnergySign::positive, EnergySign::negative}) {
    for (int s = 1; s <= 2; ++s) {
      const auto c = energy_eigenspinor(kind, s, p, 1.0);
      int first = 0;
      while (std::abs(c[first]) <= 1e-12) ++first;
      CHECK(std::imag(c[first]) == 0.0);
      CHECK(std::real(c[first]) > 0.0);
    }
  }
  // At rest the spinors are the standard basis vectors.
  const auto u2 = energy_eigenspinor(EnergySign::positive, 2, Momentum::Zero(), 1.0);
  CHECK((u2 - Spinor(0, 1, 0, 0)).norm() < 1e-15);
  const auto v1 = energy_eigenspinor(EnergySign::negative, 1, Momentum::Zero(), 1.0);
  CHECK((v1 - Spinor(0, 0, 1, 0)).norm() < 1e-15);
}

TEST_CASE("invalid spinor requests raise DomainError") {
  CHECK_THROWS_AS(plane_wave_spinor(EnergySign::positive, 1, Momentum(1, 0, 0), 0.0, 1.0),
                  DomainError);
  CHECK_THROWS_AS(plane_wave_spinor(EnergySign::positive, 1, Momentum(1, 0, 0), 1.0, 0.0),
                  DomainError);
  CHECK_THROWS_AS(energy_eigenspinor(EnergySign::positive, 3, Momentum(1, 0, 0), 1.0),
                  DomainError);
  CHECK_THROWS_AS(energy_projector(EnergySign::positive, Momentum::Zero(), 0.0),
                  DomainError);
}

TEST_CASE("projectors are complementary idempotents") {
  const Momentum k(0.4, 0.1, -2.0);
  const auto pp = energy_projector(EnergySign::positive, k, 0.7);
  const auto pm = energy_projector(EnergySign::negative, k, 0.7);
  CHECK((pp + pm - Matrix4c::Identity()).norm() < 1e-14);
  CHECK((pp * pp - pp).norm() < 1e-14);
  CHECK((pp * pm).norm() < 1e-14);
}
