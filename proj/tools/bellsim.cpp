#include <omp.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bellsim/config.hpp"
#include "bellsim/csv.hpp"
#include "bellsim/runner.hpp"

using namespace bellsim;

namespace {

void print_table(const std::vector<CheckResult>& checks) {
  std::size_t width = 8;
  for (const auto& c : checks) width = std::max(width, c.name.size());
  for (const auto& c : checks) {
    std::printf("%-4s  %-*s  residual %-12s tol %s\n", c.pass ? "PASS" : "FAIL",
                static_cast<int>(width), c.name.c_str(), format_double(c.residual).c_str(),
                format_double(c.tolerance).c_str());
  }
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(ConfigErrorKind::type_mismatch, "", std::string("invalid JSON: ") + e.what());
  }
}

void apply_thread_override() {
  if (const char* env = std::getenv("BELLSIM_THREADS"); env && *env) {
    const int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bellsim: pilot-wave dynamics for the free Dirac field and its QED extension"};
  app.set_version_flag("--version", std::string("bellsim ") + kVersion + " (config/report schema " +
                                        std::to_string(kSchemaVersion) + ")");
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "run configuration (JSON)");
  app.add_option("--seed", seed, "override sampling.seed");
  app.add_option("--out", out_dir, "output directory (default: $BELLSIM_OUT_DIR, then output.dir)");
  app.fallthrough();

  auto* algebra = app.add_subcommand("check-algebra", "verify the Dirac matrix algebra and spinors");

  auto* fock = app.add_subcommand("fock-verify", "verify the truncated Fock-space identities");
  std::optional<int> modes;
  std::optional<double> mass, length;
  std::optional<int> grid_points;
  std::string report = "table";
  fock->add_option("--modes", modes, "n_max: momenta n * 2 pi / L for |n| <= n_max");
  fock->add_option("--mass", mass, "fermion mass m");
  fock->add_option("--length", length, "box length L");
  fock->add_option("--grid-points", grid_points, "spatial sampling points for field operators");
  fock->add_option("--report", report, "stdout format")->check(CLI::IsMember({"json", "table"}));

  auto* evolve = app.add_subcommand("evolve", "evolve the configuration amplitude");
  auto* traj = app.add_subcommand("trajectories", "integrate guided trajectories and test equivariance");
  std::optional<long long> samples;
  traj->add_option("--samples", samples, "ensemble size M");
  auto* qed = app.add_subcommand("qed", "evolve the photon-dressed amplitude");

  CLI11_PARSE(app, argc, argv);
  apply_thread_override();

  try {
    nlohmann::json raw = nlohmann::json::object();
    const bool needs_config = evolve->parsed() || traj->parsed() || qed->parsed();
    if (!config_path.empty()) {
      raw = read_json(config_path);
    } else if (needs_config) {
      std::cerr << "error: --config is required for this subcommand\n";
      return 2;
    }
    std::string kind = algebra->parsed() ? "check-algebra"
                       : fock->parsed()  ? "fock-verify"
                       : evolve->parsed() ? "evolve"
                       : traj->parsed()   ? "trajectories"
                                          : "qed";
    raw["experiment"] = kind;
    if (samples) raw["sampling"]["M"] = *samples;
    if (fock->parsed()) {
      if (modes) raw["fock"]["n_max"] = *modes;
      if (mass) raw["fock"]["m"] = *mass;
      if (length) raw["fock"]["L"] = *length;
      if (grid_points) raw["fock"]["grid_points"] = *grid_points;
    }
    const RunConfig cfg = parse_config(raw);
    RunOptions opts;
    opts.out_dir = out_dir;
    opts.seed = seed;
    const RunManifest m = run(cfg, opts);

    if (fock->parsed() && report == "json") {
      nlohmann::json j = {{"experiment", m.experiment},
                          {"checks", checks_json(m.checks)},
                          {"status", m.status}};
      std::cout << j.dump(2) << "\n";
    } else {
      print_table(m.checks);
      std::printf("status: %s\n", m.status.c_str());
      if (!m.error.empty()) std::printf("error: %s\n", m.error.c_str());
      std::printf("manifest: %s/manifest.json\n", m.out_dir.c_str());
    }
    return m.exit_code();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
