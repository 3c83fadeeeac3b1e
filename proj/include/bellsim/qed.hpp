#pragma once

#include <array>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "bellsim/amplitude.hpp"
#include "bellsim/free_evolution.hpp"
#include "bellsim/guidance.hpp"
#include "bellsim/observables.hpp"

namespace bellsim::qed {

inline constexpr std::size_t kMaxPhotonStates = 4096;

struct PhotonMode {
  std::array<double, 3> k{0.0, 1.0, 0.0};
  std::array<double, 3> polarization{1.0, 0.0, 0.0};
  double frequency() const;
};

// Truncated occupation basis, mode 0 slowest. A(x) = sum_m eps_m c_m
// (a_m e^{i k.x} + a_m^dagger e^{-i k.x}), c_m = 1/sqrt(2 omega_m V).
struct PhotonBasis {
  std::vector<PhotonMode> modes;
  int n_max = 1;
  double volume = 1.0;
  // Scales the annihilation part of A; nonzero breaks hermiticity on purpose.
  double hermiticity_defect = 0.0;
  std::vector<std::vector<int>> states;
  std::vector<double> energies;               // H_Gamma diagonal
  std::vector<Eigen::MatrixXd> annihilators;  // per mode

  std::size_t dimension() const { return states.size(); }
  double coefficient(int mode) const;
  Eigen::MatrixXd hamiltonian() const;
  // Component `axis` of A at position x.
  Eigen::MatrixXcd vector_potential(int axis, const std::array<double, 3>& x) const;
  // Expected photon number <n_m> operator (diagonal) for one mode.
  Eigen::VectorXd occupation(int mode) const;
};

// Volume V = L^d of the grid. Throws DomainError for n_max < 1, k = 0,
// non-unit or non-transverse polarization; ResourceError above
// kMaxPhotonStates basis states.
PhotonBasis build_photon_basis(const std::vector<PhotonMode>& modes, int n_max,
                               const GridSpec& grid, double hermiticity_defect = 0.0);

struct QedAmplitude {
  std::vector<ConfigAmplitude> sectors;  // one per photon basis state
  double time = 0.0;
};

// |gamma> (x) fermions.
QedAmplitude product_state(const ConfigAmplitude& fermions, const PhotonBasis& basis,
                           std::size_t photon_state = 0);

enum class Scheme { strang, yoshida4 };

struct EnergyLedger {
  double kinetic = 0.0;
  double photon = 0.0;
  double interaction = 0.0;
  double total() const { return kinetic + photon + interaction; }
};

// Splitting: (free + H_Gamma) half step, exact exponential of the local
// coupling sum_j e alpha.A(x_j) per configuration point in the (gamma, spin)
// indices, (free + H_Gamma) half step. yoshida4 composes three such steps.
class QedPropagator {
 public:
  QedPropagator(const GridSpec& grid, int omega, double mass, double charge,
                PhotonBasis basis, Scheme scheme = Scheme::strang);

  const PhotonBasis& basis() const { return basis_; }
  const FreePropagator& free() const { return free_; }
  double charge() const { return charge_; }

  void propagate(QedAmplitude& psi, double dt) const;
  EnergyLedger energy(const QedAmplitude& psi) const;

  // Local coupling matrix at configuration site `site` (gamma * 4^w + spin).
  Eigen::MatrixXcd local_coupling(std::size_t site) const;

 private:
  void strang(QedAmplitude& psi, double dt) const;
  void free_part(QedAmplitude& psi, double dt) const;
  void interaction(QedAmplitude& psi, double dt) const;
  const std::vector<Eigen::MatrixXcd>& exponentials(double dt) const;

  GridSpec grid_;
  int omega_;
  double charge_;
  PhotonBasis basis_;
  Scheme scheme_;
  FreePropagator free_;
  std::vector<int> site_class_;        // per configuration site
  std::vector<std::size_t> class_rep_; // representative site per class
  mutable std::map<double, std::vector<Eigen::MatrixXcd>> cache_;
};

// propagate() plus the instability detector.
void step_qed(QedAmplitude& psi, double dt, const QedPropagator& prop,
              long step_index = 0, double max_drift = 1e-6);

double qed_norm(const QedAmplitude& psi);
std::vector<double> sector_norms(const QedAmplitude& psi);
// <n> of one photon mode.
double photon_number(const QedAmplitude& psi, const PhotonBasis& basis, int mode);

// Gamma-summed density and currents.
std::pair<DensityField, CurrentField> qed_density_currents(const QedAmplitude& psi);
double qed_continuity_residual(const QedAmplitude& psi0, const QedAmplitude& psi1);
VelocityField qed_velocity(const QedAmplitude& psi, double node_eps = 1e-12);

// Max slot-exchange deviation over photon sectors.
double qed_antisymmetry_deviation(const QedAmplitude& psi);

}  // namespace bellsim::qed
