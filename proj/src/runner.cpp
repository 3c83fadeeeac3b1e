#include "bellsim/runner.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "bellsim/csv.hpp"
#include "bellsim/dirac.hpp"
#include "bellsim/fock.hpp"
#include "bellsim/free_evolution.hpp"

namespace bellsim {

using nlohmann::json;

namespace {

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string snapshot_name(long step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "density_%06ld.csv", step);
  return buf;
}

std::string density_csv(const DensityField& rho, double time, const std::string& what) {
  const int axes = rho.axes();
  std::vector<std::string> names, units;
  for (int g = 0; g < axes; ++g) {
    names.push_back("x" + std::to_string(g + 1));
    units.push_back("length");
  }
  names.push_back("rho");
  units.push_back("length^-" + std::to_string(axes));
  CsvTable table(names, units);
  table.comment(what + " at t = " + format_double(time));
  table.comment("coordinate x" + std::string(axes > 1 ? "k" : "1") +
                " is axis k of the configuration (particle-major)");
  const GridSpec& g = rho.grid;
  std::vector<double> row(axes + 1);
  for (std::size_t s = 0; s < rho.rho.size(); ++s) {
    std::size_t rem = s;
    for (int a = axes - 1; a >= 0; --a) {
      row[a] = g.coordinate(static_cast<int>(rem % g.n));
      rem /= g.n;
    }
    row[axes] = rho.rho[s];
    table.row(row);
  }
  return table.str();
}

std::vector<double> centroids(const DensityField& rho) {
  std::vector<double> c;
  for (int a = 0; a < rho.axes(); ++a) c.push_back(circular_centroid(rho, a));
  return c;
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

json snapshot_json(const Snapshot& s, bool qed) {
  json j = {{"step", s.step},
            {"time", s.time},
            {"norm", s.norm},
            {"antisymmetry", s.antisymmetry},
            {"energy", s.energy},
            {"continuity_residual", s.continuity ? json(*s.continuity) : json(nullptr)},
            {"current_bound_excess", s.current_excess},
            {"centroid", centroids(s.density)}};
  if (qed) {
    j["sector_norms"] = s.sector_norms;
    j["photon_number"] = s.photon_number;
    j["energy_ledger"] = {{"kinetic", s.ledger.kinetic},
                          {"photon", s.ledger.photon},
                          {"interaction", s.ledger.interaction},
                          {"total", s.ledger.total()}};
  }
  return j;
}

bool is_snapshot(long step, long steps, long stride) {
  return step == 0 || step == steps || step % stride == 0;
}

// Shared checks over a snapshot series.
void series_checks(const RunConfig& cfg, const std::vector<Snapshot>& snaps,
                   std::vector<CheckResult>& checks) {
  const Snapshot& first = snaps.front();
  double norm_drift = 0.0, energy_dev = 0.0, anti = 0.0, excess = 0.0;
  for (const auto& s : snaps) {
    norm_drift = std::max(norm_drift, std::abs(s.norm - first.norm));
    energy_dev = std::max(energy_dev, std::abs(s.energy - first.energy) /
                                          std::max(std::abs(first.energy), 1e-300));
    anti = std::max(anti, s.antisymmetry);
    const double rmax = max_of(s.density.rho);
    excess = std::max(excess, s.current_excess / rmax);
  }
  checks.push_back(make_check("norm drift", norm_drift, cfg.tolerances.norm_drift));
  if (cfg.omega() >= 2) {
    checks.push_back(make_check("antisymmetry deviation", anti, cfg.tolerances.antisymmetry));
  }
  checks.push_back(make_check("energy conservation (relative)", energy_dev, cfg.tolerances.energy));
  checks.push_back(make_check("|j_k| <= rho (excess / max rho)", excess, 1e-12));
}

json dynamics_json(const RunConfig& cfg, const DynamicsResult& r, bool qed) {
  json snaps = json::array();
  for (const auto& s : r.snapshots) snaps.push_back(snapshot_json(s, qed));
  return {{"grid", {{"d", cfg.grid.dim}, {"N", cfg.grid.n}, {"L", cfg.grid.length}}},
          {"omega", cfg.omega()},
          {"mass", cfg.physics.m},
          {"dt", r.dt},
          {"steps", r.steps},
          {"snapshots", snaps},
          {"checks", checks_json(r.checks)}};
}

struct QedRun {
  std::vector<Snapshot> snapshots;
  qed::QedAmplitude final_state;
  qed::PhotonBasis basis;
  double dt = 0.0;
  long steps = 0;
};

QedRun simulate_qed(const RunConfig& cfg, int n_max, bool record) {
  const ConfigAmplitude fermions = init_amplitude(cfg.grid, cfg.physics.m, cfg.packets);
  qed::PhotonBasis basis = qed::build_photon_basis(cfg.physics.photon_modes, n_max, cfg.grid,
                                                   cfg.physics.hermiticity_defect);
  const qed::QedPropagator prop(cfg.grid, cfg.omega(), cfg.physics.m, cfg.physics.e, basis,
                                cfg.integrator.scheme);
  QedRun out;
  out.basis = basis;
  out.dt = cfg.resolved_dt();
  out.steps = cfg.resolved_steps();
  qed::QedAmplitude psi = qed::product_state(fermions, basis);
  qed::QedAmplitude prev;
  auto snap = [&](long step, const qed::QedAmplitude* before) {
    Snapshot s;
    s.step = step;
    s.time = psi.time;
    s.norm = qed::qed_norm(psi);
    s.antisymmetry = cfg.omega() >= 2 ? qed::qed_antisymmetry_deviation(psi) : 0.0;
    s.ledger = prop.energy(psi);
    s.energy = s.ledger.total();
    auto [rho, j] = qed::qed_density_currents(psi);
    s.current_excess = current_bound_excess(rho, j);
    if (before) s.continuity = qed::qed_continuity_residual(*before, psi);
    s.density = std::move(rho);
    s.sector_norms = qed::sector_norms(psi);
    for (std::size_t m = 0; m < basis.modes.size(); ++m) {
      s.photon_number += qed::photon_number(psi, basis, static_cast<int>(m));
    }
    out.snapshots.push_back(std::move(s));
  };
  if (record) snap(0, nullptr);
  for (long step = 1; step <= out.steps; ++step) {
    const bool take = record && is_snapshot(step, out.steps, cfg.integrator.snapshot_stride);
    if (take) prev = psi;
    qed::step_qed(psi, out.dt, prop, step, cfg.tolerances.norm_drift);
    if (take) snap(step, &prev);
  }
  out.final_state = std::move(psi);
  return out;
}

std::vector<double> ensemble_centroids(const TrajectoryEnsemble& ens) {
  std::vector<double> out;
  const int axes = ens.axes();
  for (int a = 0; a < axes; ++a) {
    CompensatedSum c, s;
    for (std::size_t i = 0; i < ens.samples; ++i) {
      const double th = 2.0 * kPi * ens.wrapped[i * axes + a] / ens.grid.length;
      c.add(std::cos(th));
      s.add(std::sin(th));
    }
    out.push_back(wrap(std::atan2(s.value(), c.value()) * ens.grid.length / (2.0 * kPi),
                       ens.grid.length));
  }
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

json checks_json(const std::vector<CheckResult>& checks) {
  json arr = json::array();
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name},
                   {"residual", number_or_null(c.residual)},
                   {"tolerance", c.tolerance},
                   {"pass", c.pass}});
  }
  return arr;
}

std::vector<CheckResult> run_check_algebra(std::vector<OutputFile>* files) {
  std::vector<CheckResult> checks = dirac::algebra_checks();
  if (files) {
    json j = {{"checks", checks_json(checks)}, {"all_pass", all_pass(checks)}};
    files->emplace_back("algebra.json", j.dump(2) + "\n");
  }
  return checks;
}

std::vector<CheckResult> run_fock_verify(const RunConfig::Fock& fock,
                                         std::vector<OutputFile>* files) {
  const fock::FockSystem sys(fock::ModeSet::symmetric(fock.n_max, fock.length, fock.mass),
                             fock.grid_points);
  std::vector<CheckResult> checks = fock::fock_checks(sys);
  if (files) {
    json j = {{"n_max", fock.n_max},
              {"L", fock.length},
              {"m", fock.mass},
              {"grid_points", fock.grid_points},
              {"modes", sys.mode_count()},
              {"dimension", sys.dimension()},
              {"checks", checks_json(checks)},
              {"all_pass", all_pass(checks)}};
    files->emplace_back("fock.json", j.dump(2) + "\n");
  }
  return checks;
}

DynamicsResult run_evolve(const RunConfig& cfg) {
  DynamicsResult r;
  ConfigAmplitude psi = init_amplitude(cfg.grid, cfg.physics.m, cfg.packets);
  const FreePropagator prop(cfg.grid, cfg.omega(), cfg.physics.m);
  r.dt = cfg.resolved_dt();
  r.steps = cfg.resolved_steps();
  ConfigAmplitude prev;
  auto snap = [&](long step, const ConfigAmplitude* before) {
    Snapshot s;
    s.step = step;
    s.time = psi.time;
    s.norm = norm(psi);
    s.antisymmetry = cfg.omega() >= 2 ? antisymmetry_deviation(psi) : 0.0;
    s.energy = prop.energy(psi);
    s.ledger.kinetic = s.energy;
    s.density = density(psi);
    s.current_excess = current_bound_excess(s.density, currents(psi));
    if (before) s.continuity = continuity_residual(*before, psi);
    r.snapshots.push_back(std::move(s));
  };
  snap(0, nullptr);
  for (long step = 1; step <= r.steps; ++step) {
    const bool take = is_snapshot(step, r.steps, cfg.integrator.snapshot_stride);
    if (take) prev = psi;
    step_free(psi, r.dt, prop, step, cfg.tolerances.norm_drift);
    if (take) snap(step, &prev);
  }
  series_checks(cfg, r.snapshots, r.checks);
  for (const auto& s : r.snapshots) {
    r.files.emplace_back(snapshot_name(s.step), density_csv(s.density, s.time, "density"));
  }
  r.files.emplace_back("evolve.json", dynamics_json(cfg, r, false).dump(2) + "\n");
  return r;
}

QedResult run_qed(const RunConfig& cfg) {
  QedResult r;
  QedRun main = simulate_qed(cfg, cfg.physics.n_max, true);
  r.dt = main.dt;
  r.steps = main.steps;
  r.snapshots = std::move(main.snapshots);
  series_checks(cfg, r.snapshots, r.checks);

  if (cfg.physics.e != 0.0 && cfg.truncation_audit) {
    const QedRun bigger = simulate_qed(cfg, cfg.physics.n_max + 1, false);
    const auto [rho_a, j_a] = qed::qed_density_currents(main.final_state);
    const auto [rho_b, j_b] = qed::qed_density_currents(bigger.final_state);
    double diff = 0.0;
    for (std::size_t s = 0; s < rho_a.rho.size(); ++s) {
      diff = std::max(diff, std::abs(rho_a.rho[s] - rho_b.rho[s]));
    }
    r.audit.ran = true;
    r.audit.n_max = cfg.physics.n_max;
    r.audit.density_difference = diff / max_of(rho_a.rho);
    double na = 0.0, nb = 0.0;
    for (std::size_t m = 0; m < main.basis.modes.size(); ++m) {
      na += qed::photon_number(main.final_state, main.basis, static_cast<int>(m));
      nb += qed::photon_number(bigger.final_state, bigger.basis, static_cast<int>(m));
    }
    r.audit.photon_number_difference = std::abs(na - nb);
    const qed::QedPropagator pa(cfg.grid, cfg.omega(), cfg.physics.m, cfg.physics.e,
                                main.basis, cfg.integrator.scheme);
    const qed::QedPropagator pb(cfg.grid, cfg.omega(), cfg.physics.m, cfg.physics.e,
                                bigger.basis, cfg.integrator.scheme);
    const double ea = pa.energy(main.final_state).total();
    const double eb = pb.energy(bigger.final_state).total();
    r.audit.energy_difference = std::abs(ea - eb) / std::abs(ea);
    r.audit.tolerance = cfg.tolerances.truncation;
    r.audit.pass = r.audit.density_difference <= r.audit.tolerance;
    r.checks.push_back(make_check("truncation audit n_max vs n_max+1 (density, relative)",
                                  r.audit.density_difference, r.audit.tolerance));
  }

  CsvTable energy({"step", "t", "kinetic", "photon", "interaction", "total"},
                  {"1", "time", "energy", "energy", "energy", "energy"});
  energy.comment("energy ledger of the QED amplitude");
  for (const auto& s : r.snapshots) {
    r.files.emplace_back(snapshot_name(s.step),
                         density_csv(s.density, s.time, "photon-summed density"));
    energy.row({static_cast<double>(s.step), s.time, s.ledger.kinetic, s.ledger.photon,
                s.ledger.interaction, s.ledger.total()});
  }
  r.files.emplace_back("energy.csv", energy.str());
  json j = dynamics_json(cfg, r, true);
  j["charge"] = cfg.physics.e;
  j["photon_states"] = main.basis.dimension();
  j["scheme"] = cfg.integrator.scheme == qed::Scheme::strang ? "strang" : "yoshida4";
  j["truncation_audit"] = {{"ran", r.audit.ran},
                           {"n_max", r.audit.n_max},
                           {"density_difference", r.audit.density_difference},
                           {"photon_number_difference", r.audit.photon_number_difference},
                           {"energy_difference", r.audit.energy_difference},
                           {"tolerance", r.audit.tolerance},
                           {"pass", r.audit.pass},
                           {"truncation_limited", !r.audit.pass}};
  r.files.emplace_back("qed.json", j.dump(2) + "\n");
  return r;
}

TrajectoryResult run_trajectories(const RunConfig& cfg) {
  TrajectoryResult r;
  const ConfigAmplitude fermions = init_amplitude(cfg.grid, cfg.physics.m, cfg.packets);
  r.dt = cfg.resolved_dt();
  r.steps = cfg.resolved_steps();
  const double eps = cfg.tolerances.node_eps;

  ConfigAmplitude psi = fermions;
  const FreePropagator free_prop(cfg.grid, cfg.omega(), cfg.physics.m);
  std::optional<qed::QedPropagator> qed_prop;
  qed::QedAmplitude qpsi;
  const bool use_qed = cfg.physics.qed_dynamics;
  if (use_qed) {
    qed::PhotonBasis basis = qed::build_photon_basis(cfg.physics.photon_modes, cfg.physics.n_max,
                                                     cfg.grid, cfg.physics.hermiticity_defect);
    qed_prop.emplace(cfg.grid, cfg.omega(), cfg.physics.m, cfg.physics.e, basis,
                     cfg.integrator.scheme);
    qpsi = qed::product_state(fermions, qed_prop->basis());
  }
  long substep = 0;
  auto advance = [&](double h) {
    ++substep;
    if (use_qed) {
      qed::step_qed(qpsi, h, *qed_prop, substep, cfg.tolerances.norm_drift);
    } else {
      step_free(psi, h, free_prop, substep, cfg.tolerances.norm_drift);
    }
  };
  auto field = [&]() {
    return use_qed ? qed::qed_velocity(qpsi, eps) : velocity_field(psi, eps);
  };
  auto current_density = [&]() {
    return use_qed ? qed::qed_density_currents(qpsi).first : density(psi);
  };
  auto current_norm = [&]() { return use_qed ? qed::qed_norm(qpsi) : norm(psi); };

  TrajectoryEnsemble ens =
      sample_initial(density(fermions), cfg.sampling.samples, cfg.sampling.seed);
  const std::vector<double> initial = ens.unwrapped;
  const double norm0 = current_norm();
  const int axes = ens.axes();
  const std::size_t record = std::min(cfg.sampling.record, ens.samples);

  std::vector<std::string> names{"sample", "t"}, units{"1", "time"};
  for (int g = 0; g < axes; ++g) {
    names.push_back("x" + std::to_string(g + 1));
    units.push_back("length");
  }
  CsvTable traj(names, units);
  traj.comment("trajectories of the first " + std::to_string(record) + " of " +
               std::to_string(ens.samples) + " samples, seed " +
               std::to_string(cfg.sampling.seed) + ", positions wrapped into [0, L)");
  auto record_rows = [&]() {
    for (std::size_t i = 0; i < record; ++i) {
      std::vector<double> row{static_cast<double>(i), ens.time};
      for (int g = 0; g < axes; ++g) row.push_back(ens.wrapped[i * axes + g]);
      traj.row(row);
    }
    const std::vector<double> ce = ensemble_centroids(ens);
    const std::vector<double> cd = centroids(current_density());
    for (int g = 0; g < axes; ++g) {
      r.centroid_gap = std::max(r.centroid_gap,
                                std::abs(periodic_delta(ce[g], cd[g], cfg.grid.length)));
    }
    r.norm_drift = std::max(r.norm_drift, std::abs(current_norm() - norm0));
  };

  GuidedRun guided(advance, field);
  record_rows();
  for (long step = 1; step <= r.steps; ++step) {
    guided.step(ens, r.dt, cfg.sampling.velocity_scale);
    if (is_snapshot(step, r.steps, cfg.integrator.snapshot_stride)) record_rows();
  }

  const DensityField rho1 = current_density();
  r.equivariance = equivariance_test(ens, rho1, cfg.sampling.seed,
                                     cfg.sampling.baseline_repetitions,
                                     cfg.tolerances.equivariance_factor);
  r.max_speed = ens.max_speed;
  r.max_grid_speed = guided.max_grid_speed();
  r.grid_violations = guided.grid_violations();
  r.speed_violations = ens.speed_violations;
  r.node_events = ens.node_events;
  if (cfg.omega() == 1 && cfg.grid.dim == 1) {
    r.order_preserved = order_preserved(initial, ens.unwrapped);
  }

  const auto& eq = r.equivariance;
  for (int g = 0; g < axes; ++g) {
    r.checks.push_back(make_check("equivariance KS axis " + std::to_string(g + 1) +
                                      " / (factor * baseline p95)",
                                  eq.ks[g] / (eq.factor * eq.ks_baseline_p95[g]), 1.0));
  }
  r.checks.push_back(make_check("equivariance chi2 / (factor * baseline p95)",
                                eq.chi2 / (eq.factor * eq.chi2_baseline_p95), 1.0));
  r.checks.push_back(make_check("speed bound post-interpolation (max |v_k|)", r.max_speed,
                                1.0 + 1e-3));
  r.checks.push_back(make_check("speed bound pre-interpolation (violations)",
                                static_cast<double>(r.grid_violations), 0.0));
  if (r.order_preserved) {
    r.checks.push_back(make_check("trajectory order preserved (1 = violated)",
                                  *r.order_preserved ? 0.0 : 1.0, 0.0));
  }
  r.checks.push_back(make_check("ensemble centroid tracks density centroid (<= 2h)",
                                r.centroid_gap, 2.0 * cfg.grid.spacing()));
  r.checks.push_back(make_check("norm drift", r.norm_drift, cfg.tolerances.norm_drift));

  r.files.emplace_back("trajectories.csv", traj.str());
  json j = {{"samples", eq.samples},
            {"seed", cfg.sampling.seed},
            {"dt", r.dt},
            {"steps", r.steps},
            {"time", ens.time},
            {"velocity_scale", cfg.sampling.velocity_scale},
            {"dynamics", use_qed ? "qed" : "free"},
            {"ks", eq.ks},
            {"ks_baseline_p95", eq.ks_baseline_p95},
            {"chi2", eq.chi2},
            {"chi2_baseline_p95", eq.chi2_baseline_p95},
            {"bins_per_axis", eq.bins_per_axis},
            {"baseline_repetitions", eq.repetitions},
            {"factor", eq.factor},
            {"pass", eq.pass},
            {"max_speed_post_interpolation", r.max_speed},
            {"max_speed_grid", r.max_grid_speed},
            {"grid_speed_violations", r.grid_violations},
            {"node_events", r.node_events},
            {"order_preserved", r.order_preserved ? json(*r.order_preserved) : json(nullptr)},
            {"centroid_gap", r.centroid_gap},
            {"checks", checks_json(r.checks)}};
  r.files.emplace_back("equivariance.json", j.dump(2) + "\n");
  return r;
}

RunManifest run(RunConfig cfg, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  if (options.seed) cfg.sampling.seed = *options.seed;
  RunManifest m;
  m.experiment = experiment_name(cfg.experiment);
  if (!options.out_dir.empty()) {
    m.out_dir = options.out_dir;
  } else if (const char* env = std::getenv("BELLSIM_OUT_DIR"); env && *env) {
    m.out_dir = env;
  } else {
    m.out_dir = cfg.output_dir;
  }
  cfg.output_dir = m.out_dir;
  const std::filesystem::path dir(m.out_dir);
  std::filesystem::create_directories(dir);

  std::vector<OutputFile> files;
  json extra = json::object();
  try {
    switch (cfg.experiment) {
      case Experiment::check_algebra:
        m.checks = run_check_algebra(&files);
        break;
      case Experiment::fock_verify:
        m.checks = run_fock_verify(cfg.fock, &files);
        break;
      case Experiment::evolve: {
        DynamicsResult r = run_evolve(cfg);
        m.checks = r.checks;
        files = std::move(r.files);
        json snaps = json::array();
        for (const auto& s : r.snapshots) {
          snaps.push_back({{"step", s.step}, {"norm", s.norm},
                           {"continuity_residual", s.continuity ? json(*s.continuity) : json(nullptr)}});
        }
        extra["snapshots"] = snaps;
        break;
      }
      case Experiment::qed: {
        QedResult r = run_qed(cfg);
        m.checks = r.checks;
        files = std::move(r.files);
        json snaps = json::array();
        for (const auto& s : r.snapshots) {
          snaps.push_back({{"step", s.step}, {"norm", s.norm},
                           {"continuity_residual", s.continuity ? json(*s.continuity) : json(nullptr)}});
        }
        extra["snapshots"] = snaps;
        break;
      }
      case Experiment::trajectories: {
        TrajectoryResult r = run_trajectories(cfg);
        m.checks = r.checks;
        files = std::move(r.files);
        break;
      }
    }
    m.status = all_pass(m.checks) ? "ok" : "checks_failed";
  } catch (const NumericalError& e) {
    m.status = "error";
    m.error = e.what();
    extra["numerical_error"] = {{"step", e.step()},
                                {"norm_before", e.norm_before()},
                                {"norm_after", e.norm_after()}};
  } catch (const std::exception& e) {
    m.status = "error";
    m.error = e.what();
  }

  for (const auto& [name, bytes] : files) {
    try {
      write_atomic(dir / name, bytes);
      m.inventory.push_back({name, bytes.size(), sha256_hex(bytes)});
    } catch (const std::exception& e) {
      m.status = "error";
      m.error += std::string(m.error.empty() ? "" : "; ") + e.what();
    }
  }

  json inventory = json::array();
  for (const auto& e : m.inventory) {
    inventory.push_back({{"file", e.file}, {"bytes", e.bytes}, {"sha256", e.sha256}});
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  m.document = {{"code_version", kVersion},
                {"schema_version", kSchemaVersion},
                {"experiment", m.experiment},
                {"config", to_json(cfg)},
                {"status", m.status},
                {"error", m.error.empty() ? json(nullptr) : json(m.error)},
                {"checks", checks_json(m.checks)},
                {"inventory", inventory},
                {"timing", {{"wall_seconds", wall}}}};
  for (auto it = extra.begin(); it != extra.end(); ++it) m.document[it.key()] = it.value();
  write_atomic(dir / "manifest.json", m.document.dump(2) + "\n");
  return m;
}

}  // namespace bellsim
