#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bellsim/config.hpp"
#include "bellsim/guidance.hpp"
#include "bellsim/observables.hpp"
#include "bellsim/qed.hpp"

namespace bellsim {

// Emitted file: name relative to the output directory, and its bytes.
using OutputFile = std::pair<std::string, std::string>;

struct Snapshot {
  long step = 0;
  double time = 0.0;
  double norm = 0.0;
  double antisymmetry = 0.0;
  double energy = 0.0;                // total <H>
  std::optional<double> continuity;   // residual over the preceding step
  double current_excess = 0.0;        // max |j_k| - rho
  DensityField density;
  // QED only.
  std::vector<double> sector_norms;
  double photon_number = 0.0;
  qed::EnergyLedger ledger;
};

struct DynamicsResult {
  double dt = 0.0;
  long steps = 0;
  std::vector<Snapshot> snapshots;
  std::vector<CheckResult> checks;
  std::vector<OutputFile> files;
};

struct TruncationAudit {
  bool ran = false;
  int n_max = 0;
  double density_difference = 0.0;  // max |rho_n - rho_{n+1}| / max rho
  double photon_number_difference = 0.0;
  double energy_difference = 0.0;   // relative
  double tolerance = 0.0;
  bool pass = true;
};

struct QedResult : DynamicsResult {
  TruncationAudit audit;
};

struct TrajectoryResult {
  double dt = 0.0;
  long steps = 0;
  EquivarianceReport equivariance;
  double max_speed = 0.0;       // post-interpolation
  double max_grid_speed = 0.0;  // pre-interpolation
  std::size_t grid_violations = 0;
  std::size_t speed_violations = 0;
  std::size_t node_events = 0;
  std::optional<bool> order_preserved;  // omega = 1, d = 1 only
  double centroid_gap = 0.0;            // ensemble vs density, max over snapshots
  double norm_drift = 0.0;
  std::vector<CheckResult> checks;
  std::vector<OutputFile> files;
};

DynamicsResult run_evolve(const RunConfig& cfg);
QedResult run_qed(const RunConfig& cfg);
TrajectoryResult run_trajectories(const RunConfig& cfg);
std::vector<CheckResult> run_check_algebra(std::vector<OutputFile>* files = nullptr);
std::vector<CheckResult> run_fock_verify(const RunConfig::Fock& fock,
                                         std::vector<OutputFile>* files = nullptr);

struct InventoryEntry {
  std::string file;
  std::size_t bytes = 0;
  std::string sha256;
};

struct RunOptions {
  std::string out_dir;                 // empty: config output.dir
  std::optional<std::uint64_t> seed;   // overrides sampling.seed
};

struct RunManifest {
  std::string experiment;
  std::string status;  // "ok", "checks_failed" or "error"
  std::string error;
  std::vector<CheckResult> checks;
  std::vector<InventoryEntry> inventory;
  nlohmann::json document;
  std::string out_dir;

  bool success() const { return status == "ok"; }
  int exit_code() const { return success() ? 0 : 1; }
};

// Runs the experiment, writes every artifact plus manifest.json (atomically,
// also on failure) and returns the manifest.
RunManifest run(RunConfig cfg, const RunOptions& options = {});

std::string sha256_hex(const std::string& bytes);

// Check results as a JSON array of {name, residual, tolerance, pass}.
nlohmann::json checks_json(const std::vector<CheckResult>& checks);

}  // namespace bellsim
