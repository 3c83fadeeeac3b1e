#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "bellsim/common.hpp"

// Exact truncated second quantization of the free Dirac field on a finite
// 1D momentum set. Fermionic modes are realized in the occupation-number
// basis with Jordan-Wigner sign strings; mode j is bit j of the basis index.
namespace bellsim::fock {

using SparseOp = Eigen::SparseMatrix<cplx>;
using StateVector = Eigen::VectorXcd;

inline constexpr int kMaxModes = 14;

// c: positive-energy annihilator c_s(p). zeta: negative-energy annihilator
// zeta_s(q), whose mode function is v_s(-q) exp(i q x).
enum class ModeKind { electron, zeta };

struct Mode {
  ModeKind kind;
  int number;  // p = number * 2 pi / L
  int spin;    // 1 or 2
};

class ModeSet {
 public:
  // Momentum numbers must be distinct and closed under negation.
  ModeSet(std::vector<int> momentum_numbers, double length, double mass);

  // Momenta n * 2 pi / L for n in [-n_max, n_max].
  static ModeSet symmetric(int n_max, double length, double mass);

  double length() const { return length_; }
  double mass() const { return mass_; }
  const std::vector<int>& numbers() const { return numbers_; }
  const std::vector<Mode>& modes() const { return modes_; }
  int mode_count() const { return static_cast<int>(modes_.size()); }
  std::size_t dimension() const { return std::size_t{1} << modes_.size(); }

  double momentum(int number) const;
  double energy(int number) const;
  int index(ModeKind kind, int number, int spin) const;

 private:
  double length_;
  double mass_;
  std::vector<int> numbers_;
  std::vector<Mode> modes_;
};

// Annihilators a_j, one per mode, satisfying the CAR exactly.
// Throws ResourceError when the mode count exceeds kMaxModes.
std::vector<SparseOp> build_ladder_operators(const ModeSet& modes);
std::vector<SparseOp> build_ladder_operators(int mode_count);

// Ladder operators plus the spatial sampling grid used for field operators.
class FockSystem {
 public:
  FockSystem(ModeSet modes, int grid_points);

  const ModeSet& modes() const { return modes_; }
  std::size_t dimension() const { return modes_.dimension(); }
  int mode_count() const { return modes_.mode_count(); }
  int grid_points() const { return grid_points_; }
  double spacing() const { return modes_.length() / grid_points_; }
  double position(int site) const { return site * spacing(); }
  // Grid index of x; throws DomainError if x is not a grid point.
  int site_of(double x) const;

  const SparseOp& annihilator(int mode) const { return ladder_[mode]; }
  SparseOp creator(int mode) const { return ladder_[mode].adjoint(); }

  // Coefficient of a_j in psi_a(x_site):
  // sqrt(m / E_p) / sqrt(V) * spinor_a * exp(i p x).
  cplx mode_function(int mode, int spinor, int site) const;
  // Plane-wave momentum carried by mode j's function.
  double mode_momentum(int mode) const;

  // psi_a(x_site) as an operator.
  SparseOp field(int spinor, int site) const;

  // (1/L) sum_n exp(i 2 pi n dx / L) over the momentum set.
  double truncated_delta(double dx) const;

  // Sum_ij coeffs(i, j) a_i^dagger a_j.
  SparseOp one_body(const Eigen::MatrixXcd& coeffs) const;

  // |0_D>: annihilated by every c and zeta (basis index 0).
  StateVector fermion_vacuum() const;
  // |0>: all zeta modes filled, annihilated by every c and d.
  StateVector particle_vacuum() const;
  std::uint64_t particle_vacuum_index() const;

 private:
  ModeSet modes_;
  int grid_points_;
  std::vector<SparseOp> ladder_;
  std::vector<Eigen::Vector4cd> spinors_;  // per mode, u or v at unit volume
};

enum class Observable {
  hamiltonian,      // H_D
  fermion_number,   // F
  particle_number,  // N
  momentum,         // P
  current,          // J
};

// Accepts "H_D", "F", "N", "P", "J". Throws DomainError otherwise.
Observable parse_observable(const std::string& name);
std::string observable_name(Observable kind);

// Mode-sum form of the observable (diagonal in the occupation basis).
SparseOp assemble_observable(Observable kind, const FockSystem& sys);

// sum_x h psi^dagger(x) O psi(x) with O = -i alpha d/dx + m beta (hamiltonian),
// O = 1 (fermion_number) or O = -i d/dx (momentum), assembled from the mode
// functions. Independent route to the same operators.
SparseOp field_bilinear(Observable kind, const FockSystem& sys);

// psi^dagger(x) psi(x) built from the field operators.
SparseOp fermion_density(int site, const FockSystem& sys);
SparseOp fermion_density_at(double x, const FockSystem& sys);

// Q(x) = -e psi^dagger(x) psi(x).
SparseOp charge_density(int site, double charge, const FockSystem& sys);

// n(x) = sum_s C_s^dagger C_s + D_s^dagger D_s with
// C_s(x) = L^{-1/2} sum_p c_s(p) e^{ipx} and d_s(p) = zeta_s(-p)^dagger.
SparseOp newton_wigner_density(int site, const FockSystem& sys);

struct DensityNumberNorms {
  double direct = 0.0;       // from the commutator matrix
  double closed_form = 0.0;  // from the momentum-space pair sum
};

// Operator norm of [sum_x h f(x) psi^dagger psi(x), N] restricted to the span
// of |0> and the charge-neutral pair states c^dagger d^dagger |0>.
DensityNumberNorms density_number_commutator_norms(std::span<const double> f,
                                        const FockSystem& sys);

// Same norm; throws InternalConsistencyError when the two routes disagree
// by more than 1e-10 relative. Requires at least two distinct momenta.
double verify_density_number_commutator(std::span<const double> f,
                                  const FockSystem& sys);

// <0| sum_x h f(x) [psi^dagger psi(x), N] d_r^dagger(p0) c_s^dagger(p0) |0>
cplx density_number_element_direct(std::span<const double> f,
                                    const FockSystem& sys, int s, int r,
                                    int number);
cplx density_number_element_closed_form(std::span<const double> f,
                                         const FockSystem& sys, int s, int r,
                                         int number);

// Largest |entry| of a sparse matrix.
double max_abs(const SparseOp& op);
SparseOp commutator(const SparseOp& a, const SparseOp& b);
SparseOp anticommutator(const SparseOp& a, const SparseOp& b);

// Largest amplitude leaking out of its F-sector under exp(-i H t), computed by
// exact diagonalization of the dense H. Dense: keep dimension <= 4096.
double superselection_leak(const SparseOp& hamiltonian,
                           const SparseOp& fermion_number, double t);

// Every identity the module promises, with residual norms.
std::vector<CheckResult> fock_checks(const FockSystem& sys);

}  // namespace bellsim::fock
