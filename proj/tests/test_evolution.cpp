#include <doctest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "bellsim/free_evolution.hpp"
#include "bellsim/observables.hpp"

using namespace bellsim;
using dirac::EnergySign;

namespace {

GridSpec grid1(int n, double l) { return GridSpec{1, n, l}; }

PacketSpec packet(double center, double width, double p, int spin = 1,
                  EnergySign sign = EnergySign::positive, bool project = true) {
  PacketSpec s;
  s.center = {center, 0.0, 0.0};
  s.width = width;
  s.momentum = {p, 0.0, 0.0};
  s.spin = spin;
  s.sign = sign;
  s.project = project;
  return s;
}

// Dense one-particle Dirac Hamiltonian on a 1D periodic grid, index a*N + x,
// built from an explicit DFT matrix with wavenumbers 2 pi k / L, k in
// [-N/2, N/2) (the Nyquist row carries -pi/h).
Eigen::MatrixXcd dense_h(int n, double l, double m) {
  const auto& d = dirac::dirac_set();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(4 * n, 4 * n);
  for (int kk = -n / 2; kk < n / 2; ++kk) {
    const double k = 2.0 * kPi * kk / l;
    const Eigen::Matrix4cd hk = k * d.alpha[0] + m * d.beta;
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) {
        const cplx ph = std::exp(kI * (k * (x - y) * l / n)) / double(n);
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) h(a * n + x, b * n + y) += ph * hk(a, b);
      }
  }
  return h;
}

Eigen::MatrixXcd expm_hermitian(const Eigen::MatrixXcd& h, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  Eigen::VectorXcd ph(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i)
    ph[i] = std::exp(-kI * (es.eigenvalues()[i] * t));
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

void fill_random(ConfigAmplitude& psi, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g;
  for (auto& c : psi.data) c = cplx(g(gen), g(gen));
}

double max_diff(const ConfigAmplitude& a, const ConfigAmplitude& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

double max_abs(const ConfigAmplitude& a) {
  double m = 0.0;
  for (const auto& c : a.data) m = std::max(m, std::abs(c));
  return m;
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_NOTHROW(grid1(8, 1.0).validate());
  CHECK_THROWS_AS(grid1(7, 1.0).validate(), DomainError);
  CHECK_THROWS_AS(grid1(4, 1.0).validate(), DomainError);
  CHECK_THROWS_AS(grid1(48, 1.0).validate(), DomainError);
  CHECK_THROWS_AS(grid1(8, 0.0).validate(), DomainError);
  CHECK_THROWS_AS((GridSpec{4, 8, 1.0}.validate()), DomainError);
  CHECK(grid1(8, 4.0).wavenumber(4) == doctest::Approx(-2 * kPi));
  CHECK(grid1(8, 4.0).wavenumber(3) == doctest::Approx(1.5 * kPi));
  CHECK(periodic_delta(0.1, 9.9, 10.0) == doctest::Approx(0.2));
  CHECK(wrap(-0.5, 10.0) == doctest::Approx(9.5));
}

TEST_CASE("memory budget guard") {
  const GridSpec g{3, 64, 10.0};
  CHECK_THROWS_AS(ConfigAmplitude(g, 2, 1.0), ResourceError);
  CHECK_THROWS_AS(ConfigAmplitude(grid1(64, 10.0), 2, 1.0, 1000), ResourceError);
  CHECK(amplitude_bytes(g, 40) == std::numeric_limits<std::size_t>::max());
  CHECK(amplitude_bytes(grid1(8, 1.0), 2) == 16 * 64 * sizeof(cplx));
}

TEST_CASE("FFT round trip and normalization") {
  FftPlan plan(2, 8, 3);
  std::vector<cplx> x(3 * 64);
  std::mt19937_64 gen(2);
  std::normal_distribution<double> g;
  for (auto& c : x) c = cplx(g(gen), g(gen));
  auto y = x;
  plan.forward(y.data());
  // Zero mode of block 1 is the plain sum.
  cplx sum = 0.0;
  for (int i = 0; i < 64; ++i) sum += x[64 + i];
  CHECK(std::abs(y[64] - sum) < 1e-12);
  plan.backward(y.data());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(x[i] - y[i]) < 1e-14);
}

TEST_CASE("init_amplitude: normalization, antisymmetry and degenerate input") {
  const auto g = grid1(32, 10.0);
  const auto psi = init_amplitude(g, 1.0, {packet(3, 1, 1), packet(7, 1, -1)});
  CHECK(norm(psi) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(antisymmetry_deviation(psi) < 1e-15);
  CHECK(max_diff(exchange(exchange(psi, 0, 1), 0, 1), psi) == 0.0);
  CHECK_THROWS_AS(init_amplitude(g, 1.0, {packet(3, 1, 1), packet(3, 1, 1)}),
                  DegenerateInputError);
  CHECK_THROWS_AS(init_amplitude(g, 1.0, {}), DomainError);
  const auto pw = single_particle_state(g, 1.0, packet(3, -1, 2.0 * kPi / 10.0));
  CHECK(pw.size() == 128);
  CHECK_THROWS_AS(exchange(psi, 0, 2), DomainError);
}

TEST_CASE("spin-orthogonal packets: one-particle marginal is the mean density") {
  const auto g = grid1(32, 10.0);
  const auto a = packet(4, 1.0, 0.8, 1, EnergySign::positive, false);
  const auto b = packet(4, 1.0, 0.8, 2, EnergySign::positive, false);
  const auto psi = init_amplitude(g, 1.0, {a, b});
  const auto rho = density(psi);
  const auto phi_a = single_particle_state(g, 1.0, a);
  const auto phi_b = single_particle_state(g, 1.0, b);
  for (int axis = 0; axis < 2; ++axis) {
    const auto m = marginal(rho, axis);
    for (int x = 0; x < 32; ++x) {
      double ra = 0.0, rb = 0.0;
      for (int s = 0; s < 4; ++s) {
        ra += std::norm(phi_a[s * 32 + x]);
        rb += std::norm(phi_b[s * 32 + x]);
      }
      CHECK(m[x] == doctest::Approx(0.5 * (ra + rb) * g.spacing()).epsilon(1e-12));
    }
  }
}

TEST_CASE("plane waves evolve by exp(-+ i E t) over 100 steps") {
  const auto g = grid1(32, 8.0);
  const double m = 0.7;
  for (auto sign : {EnergySign::positive, EnergySign::negative}) {
    for (int n : {0, 3, -5}) {
      const double p = 2.0 * kPi * n / g.length;
      auto pk = packet(0, -1, p, 2, sign);
      auto psi = init_amplitude(g, m, {pk});
      const auto psi0 = psi;
      FreePropagator prop(g, 1, m);
      const double dt = 0.013;
      for (int s = 0; s < 100; ++s) step_free(psi, dt, prop, s);
      const double e = std::sqrt(p * p + m * m);
      const cplx phase = std::exp((sign == EnergySign::positive ? -kI : kI) * (e * 100 * dt));
      double err = 0.0;
      for (std::size_t i = 0; i < psi.data.size(); ++i)
        err = std::max(err, std::abs(psi.data[i] - phase * psi0.data[i]));
      CHECK(err / max_abs(psi0) <= 1e-10);
      CHECK(psi.time == doctest::Approx(1.3));
      CHECK(prop.energy(psi) ==
            doctest::Approx(sign == EnergySign::positive ? e : -e).epsilon(1e-12));
    }
  }
}

TEST_CASE("omega = 2 propagation equals dense exact diagonalization") {
  const int n = 8;
  const double l = 5.0, m = 1.1, t = 0.37;
  const auto g = grid1(n, l);
  const Eigen::MatrixXcd h1 = dense_h(n, l, m);
  // Two-particle H on index (a0 a1 x0 x1) = ((a0*4 + a1)*N + x0)*N + x1.
  const int d1 = 4 * n, dim = d1 * d1;
  auto index = [&](int a0, int a1, int x0, int x1) { return ((a0 * 4 + a1) * n + x0) * n + x1; };
  Eigen::MatrixXcd h2 = Eigen::MatrixXcd::Zero(dim, dim);
  for (int a0 = 0; a0 < 4; ++a0)
    for (int a1 = 0; a1 < 4; ++a1)
      for (int x0 = 0; x0 < n; ++x0)
        for (int x1 = 0; x1 < n; ++x1)
          for (int b = 0; b < 4; ++b)
            for (int y = 0; y < n; ++y) {
              h2(index(a0, a1, x0, x1), index(b, a1, y, x1)) += h1(a0 * n + x0, b * n + y);
              h2(index(a0, a1, x0, x1), index(a0, b, x0, y)) += h1(a1 * n + x1, b * n + y);
            }
  const Eigen::MatrixXcd u = expm_hermitian(h2, t);

  ConfigAmplitude psi(g, 2, m);
  fill_random(psi, 9);
  Eigen::VectorXcd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = psi.data[i];
  const Eigen::VectorXcd want = u * v;
  FreePropagator(g, 2, m).propagate(psi, t);
  double err = 0.0;
  for (int i = 0; i < dim; ++i) err = std::max(err, std::abs(psi.data[i] - want[i]));
  CHECK(err <= 1e-10 * want.cwiseAbs().maxCoeff());
}

TEST_CASE("omega = 3 propagation equals U (x) U (x) U") {
  const int n = 8, d1 = 32;
  const double l = 6.0, m = 0.5, t = 0.81;
  const auto g = grid1(n, l);
  const Eigen::MatrixXcd u = expm_hermitian(dense_h(n, l, m), t);
  ConfigAmplitude psi(g, 3, m);
  fill_random(psi, 4);
  // Index (a0 a1 a2 x0 x1 x2); one-particle index a*N + x per slot.
  auto flat = [&](const int* a, const int* x) {
    return ((a[0] * 4 + a[1]) * 4 + a[2]) * 512 + (x[0] * n + x[1]) * n + x[2];
  };
  std::vector<cplx> cur(psi.data);
  for (int slot = 0; slot < 3; ++slot) {
    std::vector<cplx> next(cur.size(), 0.0);
    int a[3], x[3];
    for (a[0] = 0; a[0] < 4; ++a[0]) for (a[1] = 0; a[1] < 4; ++a[1]) for (a[2] = 0; a[2] < 4; ++a[2])
    for (x[0] = 0; x[0] < n; ++x[0]) for (x[1] = 0; x[1] < n; ++x[1]) for (x[2] = 0; x[2] < n; ++x[2]) {
      const int row = a[slot] * n + x[slot];
      int b[3] = {a[0], a[1], a[2]}, y[3] = {x[0], x[1], x[2]};
      cplx acc = 0.0;
      for (int col = 0; col < d1; ++col) {
        b[slot] = col / n;
        y[slot] = col % n;
        acc += u(row, col) * cur[flat(b, y)];
      }
      next[flat(a, x)] = acc;
    }
    cur.swap(next);
  }
  FreePropagator(g, 3, m).propagate(psi, t);
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < cur.size(); ++i) {
    err = std::max(err, std::abs(psi.data[i] - cur[i]));
    scale = std::max(scale, std::abs(cur[i]));
  }
  CHECK(err <= 1e-10 * scale);
}

TEST_CASE("property: propagation is unitary, composes, and commutes with exchange") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> ud(0.01, 2.0);
  for (int draw = 0; draw < 10; ++draw) {
    const GridSpec g{1 + draw % 2, 8, ud(gen) * 5};
    const double m = ud(gen), t1 = ud(gen), t2 = ud(gen);
    ConfigAmplitude psi(g, 2, m);
    fill_random(psi, draw);
    FreePropagator prop(g, 2, m);
    const double n0 = norm(psi);
    auto a = psi, b = psi;
    prop.propagate(a, t1);
    prop.propagate(a, t2);
    prop.propagate(b, t1 + t2);
    CHECK(max_diff(a, b) <= 1e-11 * max_abs(b));
    CHECK(norm(a) == doctest::Approx(n0).epsilon(1e-12));
    auto c = exchange(psi, 0, 1);
    prop.propagate(c, t1);
    auto e = psi;
    prop.propagate(e, t1);
    CHECK(max_diff(c, exchange(e, 0, 1)) <= 1e-12 * max_abs(e));
  }
}

TEST_CASE("omega = 2, N = 64: norm, antisymmetry and energy over 1000 steps") {
  const auto g = grid1(64, 20.0);
  auto psi = init_amplitude(g, 1.0, {packet(6, 1, 1.5), packet(13, 1, -1, 2)});
  FreePropagator prop(g, 2, 1.0);
  const double e0 = prop.energy(psi);
  const double dt = default_dt(g, 1.0);
  double drift = 0.0, anti = 0.0;
  for (int s = 0; s < 1000; ++s) {
    step_free(psi, dt, prop, s);
    drift = std::max(drift, std::abs(norm(psi) - 1.0));
    if (s % 100 == 99) anti = std::max(anti, antisymmetry_deviation(psi));
  }
  CHECK(drift <= 1e-6);
  CHECK(anti <= 1e-8);
  CHECK(std::abs(prop.energy(psi) - e0) <= 1e-10 * std::abs(e0));
}

TEST_CASE("default_dt") {
  const auto g = grid1(64, 20.0);
  const double emax = std::sqrt(std::pow(kPi * 64 / 20.0, 2) + 1.0);
  CHECK(default_dt(g, 1.0) == doctest::Approx(2 * kPi / emax / 200));
}

TEST_CASE("instability detector reports the step") {
  const auto g = grid1(16, 5.0);
  auto psi = init_amplitude(g, 1.0, {packet(2, 1, 0)});
  FreePropagator prop(g, 1, 1.0);
  try {
    step_free(psi, 0.01, prop, 42, -1.0);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(e.step() == 42);
    CHECK(e.norm_before() == doctest::Approx(1.0));
  }
  ConfigAmplitude wrong(g, 2, 1.0);
  CHECK_THROWS_AS(prop.propagate(wrong, 0.1), DomainError);
}

TEST_CASE("densities: uniform plane wave, Gaussian envelope, Pauli zero") {
  const auto g = grid1(32, 8.0);
  const auto pw = init_amplitude(g, 1.0, {packet(0, -1, 2 * kPi * 2 / 8.0)});
  for (double r : density(pw).rho) CHECK(r == doctest::Approx(1.0 / 8.0).epsilon(1e-12));

  const double sigma = 0.9, c = 3.0;
  const auto gp = init_amplitude(g, 1.0, {packet(c, sigma, 0.4, 1, EnergySign::positive, false)});
  const auto rho = density(gp);
  CHECK(integrate(rho) == doctest::Approx(1.0).epsilon(1e-13));
  double z = 0.0;
  for (int x = 0; x < 32; ++x) {
    const double d = periodic_delta(g.coordinate(x), c, g.length);
    z += std::exp(-d * d / (2 * sigma * sigma)) * g.spacing();
  }
  for (int x = 0; x < 32; ++x) {
    const double d = periodic_delta(g.coordinate(x), c, g.length);
    CHECK(rho.rho[x] == doctest::Approx(std::exp(-d * d / (2 * sigma * sigma)) / z).epsilon(1e-12));
  }
  CHECK(circular_centroid(rho, 0) == doctest::Approx(c).epsilon(1e-6));

  const auto two = init_amplitude(g, 1.0, {packet(3, 1, 0.5), packet(5, 1, -0.5)});
  // Equal spinor indices vanish at coincident points; mixed ones need not.
  double same = 0.0, mixed = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int x = 0; x < 32; ++x) {
        const double v = std::abs(two.at(a * 4 + b, x * 32 + x));
        (a == b ? same : mixed) = std::max(a == b ? same : mixed, v);
      }
  CHECK(same == 0.0);
  CHECK(mixed > 1e-3);
}

TEST_CASE("currents: j = rho * (+-p/E), zero at rest, bound |j| <= rho") {
  const auto g = grid1(32, 8.0);
  const double m = 1.3;
  for (auto sign : {EnergySign::positive, EnergySign::negative}) {
    for (int n : {0, 1, 4}) {
      const double p = 2 * kPi * n / 8.0;
      const auto psi = init_amplitude(g, m, {packet(0, -1, p, 1, sign)});
      const auto rho = density(psi);
      const auto j = currents(psi);
      const double v = (sign == EnergySign::positive ? 1.0 : -1.0) * p / std::hypot(p, m);
      for (int x = 0; x < 32; ++x) CHECK(j.j[0][x] == doctest::Approx(v * rho.rho[x]).epsilon(1e-12));
      CHECK(current_bound_excess(rho, j) <= 1e-15);
    }
  }
  const auto two = init_amplitude(g, m, {packet(2, 0.6, 3.0), packet(6, 0.4, -2.0, 2)});
  CHECK(current_bound_excess(density(two), currents(two)) <= 1e-15);
}

TEST_CASE("continuity: exact for a plane wave") {
  const auto g = grid1(32, 8.0);
  auto psi = init_amplitude(g, 1.0, {packet(0, -1, 2 * kPi * 3 / 8.0)});
  const auto psi0 = psi;
  FreePropagator(g, 1, 1.0).propagate(psi, 0.01);
  CHECK(continuity_residual(psi0, psi) <= 1e-10);
}

TEST_CASE("continuity residual falls at least 4x under (dt/2, 2N) refinement") {
  auto residual = [](int n, double dt) {
    const auto g = grid1(n, 20.0);
    auto psi = init_amplitude(g, 1.0, {packet(6, 0.5, 2.0)});
    FreePropagator prop(g, 1, 1.0);
    double worst = 0.0;
    for (int s = 0; s < 20; ++s) {
      const auto before = psi;
      prop.propagate(psi, dt);
      worst = std::max(worst, continuity_residual(before, psi));
    }
    return worst;
  };
  const double coarse = residual(64, 1e-3), fine = residual(128, 5e-4);
  INFO("coarse " << coarse << " fine " << fine);
  CHECK(coarse / fine >= 4.0);
}

TEST_CASE("packet group velocity within 2% of p/E") {
  const auto g = grid1(256, 80.0);
  const double m = 1.0, p = 1.0;
  auto psi = init_amplitude(g, m, {packet(20, 4.0, p)});
  FreePropagator prop(g, 1, m);
  const double c0 = circular_centroid(density(psi), 0);
  const double t = 20.0;
  prop.propagate(psi, t);
  const double v = periodic_delta(circular_centroid(density(psi), 0), c0, g.length) / t;
  const double want = p / std::hypot(p, m);
  INFO("v " << v << " p/E " << want);
  CHECK(std::abs(v - want) <= 0.02 * want);
}
