#include <doctest.h>

#include <omp.h>

#include "bellsim/free_evolution.hpp"
#include "bellsim/guidance.hpp"
#include "bellsim/rng.hpp"
#include "bellsim/stats.hpp"

using namespace bellsim;

namespace {

PacketSpec packet(double center, double width, double p, int spin = 1) {
  PacketSpec s;
  s.center = {center, 0.0, 0.0};
  s.width = width;
  s.momentum = {p, 0.0, 0.0};
  s.spin = spin;
  return s;
}

DensityField gaussian_density(const GridSpec& g, double c, double sigma) {
  DensityField rho{g, 1, std::vector<double>(g.n)};
  for (int x = 0; x < g.n; ++x) {
    const double d = periodic_delta(g.coordinate(x), c, g.length);
    rho.rho[x] = std::exp(-d * d / (2 * sigma * sigma));
  }
  return rho;
}

struct Guided {
  ConfigAmplitude psi;
  TrajectoryEnsemble ens;
  std::vector<double> initial;
};

// Free packet run with guided trajectories; returns the final state.
Guided guided_run(const GridSpec& g, const std::vector<PacketSpec>& packets,
                  std::size_t samples, int steps, double dt, double scale = 1.0) {
  Guided out{init_amplitude(g, 1.0, packets), {}, {}};
  FreePropagator prop(g, out.psi.omega, 1.0);
  out.ens = sample_initial(density(out.psi), samples, 7);
  out.initial = out.ens.unwrapped;
  GuidedRun run([&](double h) { prop.propagate(out.psi, h); },
                [&] { return velocity_field(out.psi); });
  for (int s = 0; s < steps; ++s) run.step(out.ens, dt, scale);
  CHECK(run.grid_violations() == 0);
  CHECK(run.max_grid_speed() <= 1.0 + kSpeedRoundoff);
  return out;
}

}  // namespace

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using C = PhiloxCounter;
  CHECK(philox4x32_10(C{0, 0, 0, 0}, {0, 0}) ==
        C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32_10(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                      {0xffffffffu, 0xffffffffu}) ==
        C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32_10(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                      {0xa4093822u, 0x299f31d0u}) ==
        C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("counter streams: deterministic, distinct, uniform") {
  CounterRng a(5, 3), b(5, 3), c(5, 4), d(6, 3);
  for (int i = 0; i < 10; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
    CHECK(x != d.next_u64());
  }
  CounterRng r(1, 0);
  double sum = 0.0, lo = 1.0, hi = 0.0;
  const int n = 100000;
  bool in_range = true;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    in_range = in_range && u >= 0.0 && u < 1.0;
    sum += u;
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(in_range);
  CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(lo < 1e-3);
  CHECK(hi > 1 - 1e-3);
}

TEST_CASE("statistics helpers") {
  using namespace stats;
  CHECK(nearest_rank({3, 1, 2, 5, 4, 6, 8, 7, 10, 9}, 0.95) == 10);
  CHECK(nearest_rank({3, 1, 2, 5, 4, 6, 8, 7, 10, 9}, 0.5) == 5);
  CHECK(nearest_rank({3, 1, 2, 5, 4, 6, 8, 7, 10, 9}, 0.1) == 1);
  CHECK(chi_square({10, 20}, {15, 15}) == doctest::Approx(10.0 / 3.0));
  // The two small bins pool into one with expected 2, observed 2.
  CHECK(chi_square({2, 0, 18}, {1, 1, 18}) == doctest::Approx(0.0));

  const int m = 1000;
  const std::vector<double> cells(10, 1.0);
  std::vector<double> strat(m);
  for (int i = 0; i < m; ++i) strat[i] = (i + 0.5) / m * 5.0;
  CHECK(ks_distance(strat, cells, 5.0) == doctest::Approx(0.5 / m));
  CHECK(ks_distance(std::vector<double>(m, 0.0), cells, 5.0) == doctest::Approx(1.0));
  // Piecewise-linear CDF: all mass in cell 2 of 4.
  std::vector<double> one_cell(m);
  for (int i = 0; i < m; ++i) one_cell[i] = 2.0 + (i + 0.5) / m;
  CHECK(ks_distance(one_cell, {0, 0, 1, 0}, 4.0) == doctest::Approx(0.5 / m));
}

TEST_CASE("velocity field: plane wave and nodes") {
  const GridSpec g{1, 32, 8.0};
  const double p = 2 * kPi * 3 / 8.0;
  const auto psi = init_amplitude(g, 1.0, {packet(0, -1, p)});
  const auto v = velocity_field(psi);
  for (int x = 0; x < 32; ++x) {
    CHECK(v.valid[x]);
    CHECK(v.v[0][x] == doctest::Approx(p / std::hypot(p, 1.0)).epsilon(1e-12));
  }
  CHECK(v.violations == 0);
  CHECK(v.masked == 0);

  DensityField rho{g, 1, std::vector<double>(32, 1.0)};
  CurrentField j{g, 1, {std::vector<double>(32, 0.5)}};
  rho.rho[4] = 0.0;
  rho.rho[5] = 1e-13;
  j.j[0][6] = 1.0 + 1e-13;
  j.j[0][7] = 1.1;
  const auto f = velocity_field(rho, j, 1e-12);
  CHECK(!f.valid[4]);
  CHECK(!f.valid[5]);
  CHECK(f.masked == 2);
  CHECK(f.violations == 1);
  CHECK(f.max_speed == doctest::Approx(1.1));
}

TEST_CASE("interpolation: exact for linear data, renormalized over masked corners") {
  const GridSpec g{2, 8, 4.0};
  VelocityField f;
  f.grid = g;
  f.omega = 1;
  f.v.assign(2, std::vector<double>(64));
  f.valid.assign(64, 1);
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b) {
      f.v[0][a * 8 + b] = 0.1 * a;
      f.v[1][a * 8 + b] = 0.05 * b;
    }
  double out[2];
  const double x[2] = {1.3, 2.2};  // cells (2, 4) with fractions 0.6, 0.4
  REQUIRE(interpolate_velocity(f, x, out));
  CHECK(out[0] == doctest::Approx(0.1 * 2.6));
  CHECK(out[1] == doctest::Approx(0.05 * 4.4));
  // Mask the two corners with a = 2: only a = 3 remains.
  f.valid[2 * 8 + 4] = f.valid[2 * 8 + 5] = 0;
  REQUIRE(interpolate_velocity(f, x, out));
  CHECK(out[0] == doctest::Approx(0.3));
  f.valid[3 * 8 + 4] = f.valid[3 * 8 + 5] = 0;
  CHECK(!interpolate_velocity(f, x, out));
}

TEST_CASE("sampling: moments, determinism and thread independence") {
  const GridSpec g{1, 128, 40.0};
  const double c = 17.0, sigma = 2.0;
  const auto rho = gaussian_density(g, c, sigma);
  const std::size_t m = 20000;
  const auto ens = sample_initial(rho, m, 99);
  double mean = 0.0, var = 0.0;
  for (double x : ens.wrapped) mean += x;
  mean /= m;
  for (double x : ens.wrapped) var += (x - mean) * (x - mean);
  var /= m - 1;
  // Cell jitter adds h^2/12 to the variance.
  const double h = g.spacing();
  const double want_var = sigma * sigma + h * h / 12.0;
  CHECK(std::abs(mean - c) < 3.0 * sigma / std::sqrt(double(m)));
  CHECK(std::abs(var - want_var) < 3.0 * want_var * std::sqrt(2.0 / (m - 1)));

  const auto again = sample_initial(rho, m, 99);
  CHECK(again.wrapped == ens.wrapped);
  const auto other = sample_initial(rho, m, 100);
  CHECK(other.wrapped != ens.wrapped);
  const int threads = omp_get_max_threads();
  omp_set_num_threads(3);
  const auto threaded = sample_initial(rho, m, 99);
  omp_set_num_threads(threads);
  CHECK(threaded.wrapped == ens.wrapped);
  CHECK_THROWS_AS(sample_initial(DensityField{g, 1, std::vector<double>(128, 0.0)}, 10, 1),
                  DomainError);
}

TEST_CASE("constant velocity: RK4 displacement is exact and wraps") {
  const GridSpec g{1, 32, 8.0};
  const double p = 2 * kPi * 2 / 8.0;
  const double v = p / std::hypot(p, 1.0);
  const auto out = guided_run(g, {packet(0, -1, p)}, 200, 50, 0.1);
  for (std::size_t i = 0; i < 200; ++i) {
    CHECK(out.ens.unwrapped[i] - out.initial[i] == doctest::Approx(5.0 * v).epsilon(1e-12));
    CHECK(out.ens.wrapped[i] == doctest::Approx(wrap(out.ens.unwrapped[i], 8.0)));
  }
  CHECK(out.ens.time == doctest::Approx(5.0));
  CHECK(out.ens.node_events == 0);
}

TEST_CASE("node hold-and-clamp: a sample inside a masked region keeps moving") {
  const GridSpec g{1, 8, 8.0};
  VelocityField f;
  f.grid = g;
  f.omega = 1;
  f.v.assign(1, std::vector<double>(8, 0.5));
  f.valid.assign(8, 1);
  f.valid[3] = f.valid[4] = 0;
  TrajectoryEnsemble ens;
  ens.grid = g;
  ens.omega = 1;
  ens.samples = 1;
  ens.wrapped = ens.unwrapped = {2.5};
  ens.last_velocity = {0.0};
  for (int s = 0; s < 10; ++s) advance_ensemble(ens, {&f, &f, &f}, 0.2);
  CHECK(ens.node_events > 0);
  CHECK(ens.unwrapped[0] == doctest::Approx(3.5));
  CHECK(ens.max_speed <= 1.0);
}

TEST_CASE("order preservation helper") {
  CHECK(order_preserved({0, 1, 2}, {0.5, 1.5, 2.5}));
  CHECK(!order_preserved({0, 1, 2}, {2.5, 1.5, 3.0}));
}

TEST_CASE("guided packet: equivariance holds, halved velocity fails, order kept") {
  const GridSpec g{1, 64, 20.0};
  const double dt = default_dt(g, 1.0);
  const int steps = 800;
  const auto good = guided_run(g, {packet(5, 1.0, 2.0)}, 4000, steps, dt);
  const auto rho = density(good.psi);
  const auto rep = equivariance_test(good.ens, rho, 11, 60);
  INFO("ks " << rep.ks[0] << " p95 " << rep.ks_baseline_p95[0]);
  CHECK(rep.pass);
  CHECK(rep.samples == 4000);
  CHECK(rep.bins_per_axis == 16);
  CHECK(order_preserved(good.initial, good.ens.unwrapped));
  CHECK(good.ens.max_speed <= 1.0 + 1e-3);
  CHECK(good.ens.speed_violations == 0);

  double mean = 0.0;
  for (double x : good.ens.unwrapped) mean += x;
  mean /= 4000;
  CHECK(std::abs(wrap(mean, 20.0) - circular_centroid(rho, 0)) < 2 * g.spacing());

  const auto slow = guided_run(g, {packet(5, 1.0, 2.0)}, 4000, steps, dt, 0.5);
  CHECK(!equivariance_test(slow.ens, density(slow.psi), 11, 60).pass);

  TrajectoryEnsemble tiny = good.ens;
  tiny.samples = 10;
  tiny.wrapped.resize(10);
  CHECK_THROWS_AS(equivariance_test(tiny, rho, 1), DomainError);
}

TEST_CASE("two-fermion guided run: no speed violations, equivariant in both axes") {
  const GridSpec g{1, 32, 12.0};
  const auto out = guided_run(g, {packet(3, 1.0, 1.0), packet(8, 1.0, -1.0, 2)}, 2000,
                              200, default_dt(g, 1.0));
  const auto rep = equivariance_test(out.ens, density(out.psi), 5, 60);
  REQUIRE(rep.ks.size() == 2);
  CHECK(rep.pass);
  CHECK(out.ens.max_speed <= 1.0 + 1e-3);
  CHECK(out.ens.speed_violations == 0);
}
