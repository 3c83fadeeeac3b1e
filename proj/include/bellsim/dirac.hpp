#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "bellsim/common.hpp"

// Dirac matrices (Pauli-Dirac representation), the free dispersion relation
// and plane-wave spinors. Natural units hbar = c = 1.
namespace bellsim::dirac {

using Matrix4c = Eigen::Matrix4cd;
using Spinor = Eigen::Vector4cd;
using Momentum = Eigen::Vector3d;

struct DiracSet {
  std::array<Matrix4c, 3> alpha;
  Matrix4c beta;
  // gamma[0] = beta, gamma[j] = beta * alpha[j].
  std::array<Matrix4c, 4> gamma;
};

DiracSet build_dirac_set();

// Process-wide immutable instance of build_dirac_set().
const DiracSet& dirac_set();

// E_p = sqrt(|p|^2 + m^2). Throws DomainError for m < 0.
double energy(const Momentum& p, double mass);

// Single-particle Dirac operator alpha.p + m beta.
Matrix4c hamiltonian(const Momentum& p, double mass);

enum class EnergySign { positive, negative };

// Unit-norm eigenvector of alpha.k + m beta with eigenvalue sign * E_k.
//
// The spin-degenerate eigenspace is resolved by projecting the standard
// rest-frame basis vector onto it (e_s for positive energy, e_{2+s} for
// negative energy), then fixing the first nonvanishing component to be real
// and positive. Requires E_k > 0 and spin in {1, 2}.
Spinor energy_eigenspinor(EnergySign sign, int spin, const Momentum& k,
                          double mass);

// Projector onto the sign * E_k eigenspace of alpha.k + m beta.
Matrix4c energy_projector(EnergySign sign, const Momentum& k, double mass);

struct PlaneWaveSpinor {
  Spinor components;
  EnergySign kind;
  int spin;
  Momentum momentum;
  double mass;
  double volume;
};

// u_s(p) (kind = positive) or v_s(p) (kind = negative), normalized to
// E_p / (V m). u_s(p) solves (alpha.p + m beta) u = +E_p u; v_s(p) solves
// (alpha.(-p) + m beta) v = -E_p v, the pairing used with exp(-i p.x).
// Throws DomainError for m <= 0 or V <= 0.
PlaneWaveSpinor plane_wave_spinor(EnergySign kind, int spin,
                                  const Momentum& p, double mass,
                                  double volume);

// Anticommutator {a, b}.
inline Matrix4c anticommutator(const Matrix4c& a, const Matrix4c& b) {
  return a * b + b * a;
}

// Every algebraic identity of the Dirac set plus spinor eigen/normalization
// checks over `random_draws` pseudo-random (p, m) pairs.
std::vector<CheckResult> algebra_checks(int random_draws = 100,
                                        unsigned long long seed = 20240917ULL);

}  // namespace bellsim::dirac
