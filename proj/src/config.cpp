#include "bellsim/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "bellsim/free_evolution.hpp"

namespace bellsim {

using nlohmann::json;

ConfigError::ConfigError(ConfigErrorKind kind, std::string field,
                         const std::string& reason)
    : Error(config_error_kind_name(kind) + " at '" + field + "': " + reason),
      kind_(kind), field_(std::move(field)) {}

std::string config_error_kind_name(ConfigErrorKind kind) {
  switch (kind) {
    case ConfigErrorKind::missing_field: return "missing field";
    case ConfigErrorKind::type_mismatch: return "type mismatch";
    case ConfigErrorKind::constraint_violation: return "constraint violation";
  }
  return "config error";
}

std::string experiment_name(Experiment e) {
  switch (e) {
    case Experiment::check_algebra: return "check-algebra";
    case Experiment::fock_verify: return "fock-verify";
    case Experiment::evolve: return "evolve";
    case Experiment::trajectories: return "trajectories";
    case Experiment::qed: return "qed";
  }
  return "?";
}

double RunConfig::resolved_dt() const {
  if (integrator.duration) return *integrator.duration / resolved_steps();
  return integrator.dt ? *integrator.dt : default_dt(grid, physics.m);
}

long RunConfig::resolved_steps() const {
  if (!integrator.duration) return integrator.steps;
  const double dt = integrator.dt ? *integrator.dt : default_dt(grid, physics.m);
  return std::max(1L, static_cast<long>(std::ceil(*integrator.duration / dt - 1e-9)));
}

namespace {

[[noreturn]] void fail(ConfigErrorKind k, const std::string& path, const std::string& why) {
  throw ConfigError(k, path, why);
}

std::string join(const std::string& a, const std::string& b) {
  return a.empty() ? b : a + "." + b;
}

const json* find(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  const json* v = find(obj, key);
  if (!v) fail(ConfigErrorKind::missing_field, path, "required field is absent");
  return *v;
}

const json& object_at(const json& obj, const std::string& key, const std::string& path,
                      bool required) {
  static const json empty = json::object();
  const json* v = find(obj, key);
  if (!v) {
    if (required) fail(ConfigErrorKind::missing_field, path, "required section is absent");
    return empty;
  }
  if (!v->is_object()) fail(ConfigErrorKind::type_mismatch, path, "expected an object");
  return *v;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(ConfigErrorKind::type_mismatch, path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(ConfigErrorKind::constraint_violation, path, "must be finite");
  return x;
}

long long as_integer(const json& v, const std::string& path) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (std::isfinite(x) && x == std::floor(x)) return static_cast<long long>(x);
  }
  fail(ConfigErrorKind::type_mismatch, path, "expected an integer");
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(ConfigErrorKind::type_mismatch, path, "expected a boolean");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(ConfigErrorKind::type_mismatch, path, "expected a string");
  return v.get<std::string>();
}

std::array<double, 3> as_vector(const json& v, const std::string& path, int min_len,
                                int max_len) {
  std::array<double, 3> out{0.0, 0.0, 0.0};
  if (v.is_number() && min_len <= 1) {
    out[0] = as_number(v, path);
    return out;
  }
  if (!v.is_array()) fail(ConfigErrorKind::type_mismatch, path, "expected an array of numbers");
  const int n = static_cast<int>(v.size());
  if (n < min_len || n > max_len) {
    fail(ConfigErrorKind::constraint_violation, path,
         "expected " + std::to_string(min_len) +
             (min_len == max_len ? "" : ".." + std::to_string(max_len)) + " components");
  }
  for (int i = 0; i < n; ++i) out[i] = as_number(v[i], path + "[" + std::to_string(i) + "]");
  return out;
}

void check(bool ok, const std::string& path, const std::string& why) {
  if (!ok) fail(ConfigErrorKind::constraint_violation, path, why);
}

template <typename T, typename F>
void optional_field(const json& obj, const std::string& key, const std::string& prefix,
                    T& target, F convert) {
  if (const json* v = find(obj, key)) target = convert(*v, join(prefix, key));
}

Experiment parse_experiment(const std::string& s, const std::string& path) {
  if (s == "check-algebra") return Experiment::check_algebra;
  if (s == "fock-verify") return Experiment::fock_verify;
  if (s == "evolve") return Experiment::evolve;
  if (s == "trajectories") return Experiment::trajectories;
  if (s == "qed") return Experiment::qed;
  fail(ConfigErrorKind::constraint_violation, path,
       "unknown experiment '" + s +
           "' (check-algebra | fock-verify | evolve | trajectories | qed)");
}

}  // namespace

RunConfig parse_config(const json& j) {
  if (!j.is_object()) fail(ConfigErrorKind::type_mismatch, "", "config must be a JSON object");
  RunConfig cfg;
  if (const json* v = find(j, "schema_version")) {
    check(as_integer(*v, "schema_version") == kSchemaVersion, "schema_version",
          "unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")");
  }
  cfg.experiment =
      parse_experiment(as_string(require(j, "experiment", "experiment"), "experiment"),
                       "experiment");
  const bool dynamics = cfg.experiment == Experiment::evolve ||
                        cfg.experiment == Experiment::trajectories ||
                        cfg.experiment == Experiment::qed;

  // grid
  {
    const json& g = object_at(j, "grid", "grid", dynamics);
    if (dynamics) {
      cfg.grid.n = static_cast<int>(as_integer(require(g, "N", "grid.N"), "grid.N"));
      cfg.grid.length = as_number(require(g, "L", "grid.L"), "grid.L");
    }
    if (const json* v = find(g, "d")) cfg.grid.dim = static_cast<int>(as_integer(*v, "grid.d"));
    check(cfg.grid.dim >= 1 && cfg.grid.dim <= 3, "grid.d", "must be 1, 2 or 3");
    check(cfg.grid.n >= 8 && (cfg.grid.n & (cfg.grid.n - 1)) == 0, "grid.N",
          "must be a power of two >= 8 (got " + std::to_string(cfg.grid.n) + ")");
    check(cfg.grid.length > 0.0, "grid.L", "must be > 0");
  }

  // physics
  {
    const json& p = object_at(j, "physics", "physics", dynamics);
    if (dynamics) cfg.physics.m = as_number(require(p, "m", "physics.m"), "physics.m");
    check(cfg.physics.m > 0.0, "physics.m", "mass must be > 0");
    optional_field(p, "e", "physics", cfg.physics.e, as_number);
    if (const json* v = find(p, "n_max")) {
      cfg.physics.n_max = static_cast<int>(as_integer(*v, "physics.n_max"));
    }
    check(cfg.physics.n_max >= 1, "physics.n_max", "must be >= 1");
    optional_field(p, "hermiticity_defect", "physics", cfg.physics.hermiticity_defect, as_number);
    optional_field(p, "qed_dynamics", "physics", cfg.physics.qed_dynamics, as_bool);
    if (const json* modes = find(p, "photon_modes")) {
      if (!modes->is_array()) {
        fail(ConfigErrorKind::type_mismatch, "physics.photon_modes", "expected an array");
      }
      for (std::size_t i = 0; i < modes->size(); ++i) {
        const std::string path = "physics.photon_modes[" + std::to_string(i) + "]";
        const json& m = (*modes)[i];
        if (!m.is_object()) fail(ConfigErrorKind::type_mismatch, path, "expected an object");
        qed::PhotonMode mode;
        mode.k = as_vector(require(m, "k", path + ".k"), path + ".k", 3, 3);
        if (const json* e = find(m, "polarization")) {
          mode.polarization = as_vector(*e, path + ".polarization", 3, 3);
        }
        check(mode.frequency() > 0.0, path + ".k", "photon wave vector must be nonzero");
        const auto& e = mode.polarization;
        check(std::abs(e[0] * e[0] + e[1] * e[1] + e[2] * e[2] - 1.0) <= 1e-12,
              path + ".polarization", "must be a unit vector");
        check(std::abs(e[0] * mode.k[0] + e[1] * mode.k[1] + e[2] * mode.k[2]) <=
                  1e-12 * mode.frequency(),
              path + ".polarization", "must be transverse to k");
        cfg.physics.photon_modes.push_back(mode);
      }
    }
    if (cfg.physics.photon_modes.empty()) {
      // Default: one transverse mode along y, polarized along x.
      qed::PhotonMode mode;
      mode.k = {0.0, 2.0 * kPi / cfg.grid.length, 0.0};
      mode.polarization = {1.0, 0.0, 0.0};
      cfg.physics.photon_modes.push_back(mode);
    }
  }

  // packets
  if (dynamics) {
    const json& ps = require(j, "packets", "packets");
    if (!ps.is_array()) fail(ConfigErrorKind::type_mismatch, "packets", "expected an array");
    check(!ps.empty(), "packets", "need at least one packet (omega >= 1)");
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const std::string path = "packets[" + std::to_string(i) + "]";
      const json& p = ps[i];
      if (!p.is_object()) fail(ConfigErrorKind::type_mismatch, path, "expected an object");
      PacketSpec spec;
      const int d = cfg.grid.dim;
      spec.center = as_vector(require(p, "center", path + ".center"), path + ".center", d, d);
      if (const json* v = find(p, "width")) {
        spec.width = v->is_null() ? 0.0 : as_number(*v, path + ".width");
      }
      if (const json* v = find(p, "momentum")) {
        spec.momentum = as_vector(*v, path + ".momentum", d, d);
      }
      if (const json* v = find(p, "energy_sign")) {
        const std::string s = as_string(*v, path + ".energy_sign");
        check(s == "positive" || s == "negative", path + ".energy_sign",
              "must be 'positive' or 'negative'");
        spec.sign = s == "positive" ? dirac::EnergySign::positive : dirac::EnergySign::negative;
      }
      if (const json* v = find(p, "spin")) {
        spec.spin = static_cast<int>(as_integer(*v, path + ".spin"));
      }
      check(spec.spin == 1 || spec.spin == 2, path + ".spin", "must be 1 or 2");
      optional_field(p, "project", path, spec.project, as_bool);
      cfg.packets.push_back(spec);
    }
  }

  // integrator
  {
    const json& in = object_at(j, "integrator", "integrator", false);
    if (const json* v = find(in, "dt"); v && !v->is_null()) {
      cfg.integrator.dt = as_number(*v, "integrator.dt");
      check(*cfg.integrator.dt > 0.0, "integrator.dt", "must be > 0");
    }
    if (const json* v = find(in, "duration"); v && !v->is_null()) {
      cfg.integrator.duration = as_number(*v, "integrator.duration");
      check(*cfg.integrator.duration > 0.0, "integrator.duration", "must be > 0");
    }
    if (const json* v = find(in, "steps")) cfg.integrator.steps = as_integer(*v, "integrator.steps");
    check(cfg.integrator.steps >= 1, "integrator.steps", "must be >= 1");
    if (const json* v = find(in, "snapshot_stride")) {
      cfg.integrator.snapshot_stride = as_integer(*v, "integrator.snapshot_stride");
    }
    check(cfg.integrator.snapshot_stride >= 1, "integrator.snapshot_stride", "must be >= 1");
    if (const json* v = find(in, "scheme")) {
      const std::string s = as_string(*v, "integrator.scheme");
      check(s == "strang" || s == "yoshida4", "integrator.scheme",
            "must be 'strang' or 'yoshida4'");
      cfg.integrator.scheme = s == "strang" ? qed::Scheme::strang : qed::Scheme::yoshida4;
    }
  }

  // sampling
  {
    const json& s = object_at(j, "sampling", "sampling", false);
    if (const json* v = find(s, "M")) {
      const long long m = as_integer(*v, "sampling.M");
      check(m >= 1, "sampling.M", "must be >= 1");
      cfg.sampling.samples = static_cast<std::size_t>(m);
    }
    if (const json* v = find(s, "seed")) {
      const long long seed = as_integer(*v, "sampling.seed");
      check(seed >= 0, "sampling.seed", "must be >= 0");
      cfg.sampling.seed = static_cast<std::uint64_t>(seed);
    }
    if (const json* v = find(s, "record")) {
      const long long r = as_integer(*v, "sampling.record");
      check(r >= 0, "sampling.record", "must be >= 0");
      cfg.sampling.record = static_cast<std::size_t>(r);
    }
    optional_field(s, "velocity_scale", "sampling", cfg.sampling.velocity_scale, as_number);
    if (const json* v = find(s, "baseline_repetitions")) {
      cfg.sampling.baseline_repetitions =
          static_cast<int>(as_integer(*v, "sampling.baseline_repetitions"));
    }
    check(cfg.sampling.baseline_repetitions >= 1, "sampling.baseline_repetitions",
          "must be >= 1");
    if (cfg.experiment == Experiment::trajectories) {
      check(cfg.sampling.samples >= 1000, "sampling.M",
            "the equivariance test needs at least 1000 samples");
    }
  }

  // tolerances
  {
    const json& t = object_at(j, "tolerances", "tolerances", false);
    auto positive = [&](const char* key, double& target) {
      if (const json* v = find(t, key)) {
        target = as_number(*v, std::string("tolerances.") + key);
        check(target > 0.0, std::string("tolerances.") + key, "must be > 0");
      }
    };
    positive("node_eps", cfg.tolerances.node_eps);
    positive("norm_drift", cfg.tolerances.norm_drift);
    positive("equivariance_factor", cfg.tolerances.equivariance_factor);
    positive("antisymmetry", cfg.tolerances.antisymmetry);
    positive("energy", cfg.tolerances.energy);
    positive("truncation", cfg.tolerances.truncation);
  }

  // fock
  {
    const json& f = object_at(j, "fock", "fock", false);
    if (const json* v = find(f, "n_max")) cfg.fock.n_max = static_cast<int>(as_integer(*v, "fock.n_max"));
    check(cfg.fock.n_max >= 0, "fock.n_max", "must be >= 0");
    optional_field(f, "L", "fock", cfg.fock.length, as_number);
    check(cfg.fock.length > 0.0, "fock.L", "must be > 0");
    optional_field(f, "m", "fock", cfg.fock.mass, as_number);
    check(cfg.fock.mass > 0.0, "fock.m", "mass must be > 0");
    if (const json* v = find(f, "grid_points")) {
      cfg.fock.grid_points = static_cast<int>(as_integer(*v, "fock.grid_points"));
    }
    check(cfg.fock.grid_points >= 1, "fock.grid_points", "must be >= 1");
  }

  if (const json* v = find(j, "truncation_audit")) cfg.truncation_audit = as_bool(*v, "truncation_audit");
  {
    const json& o = object_at(j, "output", "output", false);
    if (const json* v = find(o, "dir")) cfg.output_dir = as_string(*v, "output.dir");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(ConfigErrorKind::type_mismatch, "", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const RunConfig& cfg) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["experiment"] = experiment_name(cfg.experiment);
  j["grid"] = {{"d", cfg.grid.dim}, {"N", cfg.grid.n}, {"L", cfg.grid.length}};
  json modes = json::array();
  for (const auto& m : cfg.physics.photon_modes) {
    modes.push_back({{"k", m.k}, {"polarization", m.polarization}});
  }
  j["physics"] = {{"m", cfg.physics.m},
                  {"e", cfg.physics.e},
                  {"n_max", cfg.physics.n_max},
                  {"hermiticity_defect", cfg.physics.hermiticity_defect},
                  {"qed_dynamics", cfg.physics.qed_dynamics},
                  {"photon_modes", modes}};
  json packets = json::array();
  for (const auto& p : cfg.packets) {
    packets.push_back({{"center", std::vector<double>(p.center.begin(), p.center.begin() + cfg.grid.dim)},
                       {"width", p.width},
                       {"momentum", std::vector<double>(p.momentum.begin(), p.momentum.begin() + cfg.grid.dim)},
                       {"energy_sign", p.sign == dirac::EnergySign::positive ? "positive" : "negative"},
                       {"spin", p.spin},
                       {"project", p.project}});
  }
  j["packets"] = packets;
  j["integrator"] = {{"dt", cfg.integrator.dt ? json(*cfg.integrator.dt) : json(nullptr)},
                     {"duration", cfg.integrator.duration ? json(*cfg.integrator.duration) : json(nullptr)},
                     {"steps", cfg.integrator.steps},
                     {"snapshot_stride", cfg.integrator.snapshot_stride},
                     {"scheme", cfg.integrator.scheme == qed::Scheme::strang ? "strang" : "yoshida4"}};
  j["sampling"] = {{"M", cfg.sampling.samples},
                   {"seed", cfg.sampling.seed},
                   {"record", cfg.sampling.record},
                   {"velocity_scale", cfg.sampling.velocity_scale},
                   {"baseline_repetitions", cfg.sampling.baseline_repetitions}};
  j["tolerances"] = {{"node_eps", cfg.tolerances.node_eps},
                     {"norm_drift", cfg.tolerances.norm_drift},
                     {"equivariance_factor", cfg.tolerances.equivariance_factor},
                     {"antisymmetry", cfg.tolerances.antisymmetry},
                     {"energy", cfg.tolerances.energy},
                     {"truncation", cfg.tolerances.truncation}};
  j["fock"] = {{"n_max", cfg.fock.n_max},
               {"L", cfg.fock.length},
               {"m", cfg.fock.mass},
               {"grid_points", cfg.fock.grid_points}};
  j["truncation_audit"] = cfg.truncation_audit;
  j["output"] = {{"dir", cfg.output_dir}};
  return j;
}

}  // namespace bellsim
