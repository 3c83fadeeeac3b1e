#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "bellsim/amplitude.hpp"
#include "bellsim/observables.hpp"

namespace bellsim {

// Grid speeds above 1 by less than this are rounding in j/rho, not violations.
inline constexpr double kSpeedRoundoff = 1e-12;

// v[k * d + a](X) = j/rho where rho >= node_eps * max rho; invalid elsewhere.
struct VelocityField {
  GridSpec grid;
  int omega = 1;
  std::vector<std::vector<double>> v;
  std::vector<std::uint8_t> valid;
  double max_speed = 0.0;        // over valid points, per fermion |v_k|
  std::size_t violations = 0;    // valid points with |v_k| > 1 + kSpeedRoundoff
  std::size_t masked = 0;

  int axes() const { return grid.dim * omega; }
};

VelocityField velocity_field(const DensityField& rho, const CurrentField& j,
                             double node_eps = 1e-12);
VelocityField velocity_field(const ConfigAmplitude& psi, double node_eps = 1e-12);

struct TrajectoryEnsemble {
  GridSpec grid;
  int omega = 1;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  double time = 0.0;
  // samples x axes, row-major. wrapped in [0, L); unwrapped is the lifted path.
  std::vector<double> wrapped;
  std::vector<double> unwrapped;
  // Last valid interpolated velocity per sample (held inside node regions).
  std::vector<double> last_velocity;
  std::size_t node_events = 0;
  double max_speed = 0.0;  // post-interpolation, per fermion
  std::size_t speed_violations = 0;  // post-interpolation above 1 + 1e-3

  int axes() const { return grid.dim * omega; }
};

// M draws from the cell distribution rho h^(d w), jittered uniformly within
// the cell centred on each grid point. Sample i uses counter stream
// stream_base + i, so results do not depend on thread scheduling.
TrajectoryEnsemble sample_initial(const DensityField& rho, std::size_t samples,
                                  std::uint64_t seed, std::uint64_t stream_base = 0);

// Multilinear interpolation over valid corners (weights renormalized).
// Returns false when every corner is masked.
bool interpolate_velocity(const VelocityField& field, const double* x, double* out);

struct StepFields {
  const VelocityField* start = nullptr;  // t
  const VelocityField* mid = nullptr;    // t + dt/2
  const VelocityField* end = nullptr;    // t + dt
};

// Classical RK4 on dX/dt = scale * v(t, X) with periodic wrapping.
void advance_ensemble(TrajectoryEnsemble& ens, const StepFields& fields, double dt,
                      double velocity_scale = 1.0);

// Drives an amplitude and an ensemble together. `advance(h)` moves the
// amplitude forward by h; `field()` returns the velocity field now.
class GuidedRun {
 public:
  GuidedRun(std::function<void(double)> advance, std::function<VelocityField()> field);
  void step(TrajectoryEnsemble& ens, double dt, double velocity_scale = 1.0);
  // Largest grid speed and grid violations seen across every field evaluated.
  double max_grid_speed() const { return max_grid_speed_; }
  std::size_t grid_violations() const { return grid_violations_; }

 private:
  void observe(const VelocityField& f);
  std::function<void(double)> advance_;
  std::function<VelocityField()> field_;
  VelocityField start_;
  bool have_start_ = false;
  double max_grid_speed_ = 0.0;
  std::size_t grid_violations_ = 0;
};

// True when the lifted 1D positions keep their initial ordering.
bool order_preserved(const std::vector<double>& initial, const std::vector<double>& final_);

struct EquivarianceReport {
  std::size_t samples = 0;
  int repetitions = 0;
  double factor = 1.5;
  int bins_per_axis = 0;
  std::vector<double> ks;               // per global axis
  std::vector<double> ks_baseline_p95;  // per global axis
  double chi2 = 0.0;
  double chi2_baseline_p95 = 0.0;
  bool pass = false;
};

// Compares the ensemble with rho(t1) against a resampling baseline: pass iff
// every statistic is <= factor * (95th percentile of the baseline values).
EquivarianceReport equivariance_test(const TrajectoryEnsemble& ens,
                                     const DensityField& rho, std::uint64_t seed,
                                     int repetitions = 100, double factor = 1.5);

}  // namespace bellsim
