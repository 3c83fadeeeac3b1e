#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bellsim/amplitude.hpp"
#include "bellsim/grid.hpp"
#include "bellsim/qed.hpp"

namespace bellsim {

enum class ConfigErrorKind { missing_field, type_mismatch, constraint_violation };

// Schema error naming the offending field path, e.g. "grid.N".
class ConfigError : public Error {
 public:
  ConfigError(ConfigErrorKind kind, std::string field, const std::string& reason);
  ConfigErrorKind kind() const { return kind_; }
  const std::string& field() const { return field_; }

 private:
  ConfigErrorKind kind_;
  std::string field_;
};

std::string config_error_kind_name(ConfigErrorKind kind);

enum class Experiment { check_algebra, fock_verify, evolve, trajectories, qed };

std::string experiment_name(Experiment e);

struct RunConfig {
  Experiment experiment = Experiment::evolve;
  GridSpec grid;

  struct Physics {
    double m = 1.0;
    double e = 0.0;
    std::vector<qed::PhotonMode> photon_modes;
    int n_max = 2;
    double hermiticity_defect = 0.0;
    bool qed_dynamics = false;  // trajectories: guide with the QED amplitude
  } physics;

  std::vector<PacketSpec> packets;

  struct Integrator {
    std::optional<double> dt;
    std::optional<double> duration;  // overrides steps; dt is adjusted to fit
    long steps = 100;
    long snapshot_stride = 10;
    qed::Scheme scheme = qed::Scheme::strang;
  } integrator;

  struct Sampling {
    std::size_t samples = 10000;
    std::uint64_t seed = 1;
    std::size_t record = 100;  // samples written to the trajectory file
    double velocity_scale = 1.0;
    int baseline_repetitions = 100;
  } sampling;

  struct Tolerances {
    double node_eps = 1e-12;
    double norm_drift = 1e-6;
    double equivariance_factor = 1.5;
    double antisymmetry = 1e-8;
    double energy = 1e-8;
    double truncation = 1e-3;
  } tolerances;

  struct Fock {
    int n_max = 1;
    double length = 2.0 * kPi;
    double mass = 1.0;
    int grid_points = 8;
  } fock;

  bool truncation_audit = true;
  std::string output_dir = "out";

  int omega() const { return static_cast<int>(packets.size()); }
  double resolved_dt() const;
  long resolved_steps() const;
};

// Parses and validates; throws ConfigError.
RunConfig parse_config(const nlohmann::json& j);
// Reads a file then parse_config. Throws Error when the file cannot be read.
RunConfig load_config(const std::string& path);

// Canonical JSON echo of a parsed config (all defaults filled in).
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace bellsim
