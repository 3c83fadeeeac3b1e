#include "bellsim/guidance.hpp"

#include <algorithm>
#include <cmath>

#include "bellsim/rng.hpp"
#include "bellsim/stats.hpp"

namespace bellsim {
namespace {

std::vector<double> cumulative(const std::vector<double>& rho) {
  std::vector<double> cum(rho.size());
  CompensatedSum acc;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    acc.add(rho[i]);
    cum[i] = acc.value();
  }
  return cum;
}

// Draws one configuration into x (axes values).
void draw(const std::vector<double>& cum, const GridSpec& grid, int axes,
          CounterRng& rng, double* x) {
  const double u = rng.uniform() * cum.back();
  std::size_t site = static_cast<std::size_t>(
      std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
  site = std::min(site, cum.size() - 1);
  const double h = grid.spacing();
  std::size_t rem = site;
  std::vector<int> idx(axes);
  for (int g = axes - 1; g >= 0; --g) {
    idx[g] = static_cast<int>(rem % grid.n);
    rem /= grid.n;
  }
  for (int g = 0; g < axes; ++g) {
    x[g] = wrap((idx[g] + rng.uniform() - 0.5) * h, grid.length);
  }
}

int bins_for(int axes, int n) {
  const int b = axes == 1 ? 16 : axes == 2 ? 8 : 4;
  return std::min(b, n);
}

// Cell index of a position in the shifted coordinate y = x + h/2.
int shifted_cell(double x, const GridSpec& grid) {
  const double y = wrap(x + 0.5 * grid.spacing(), grid.length);
  return std::clamp(static_cast<int>(std::floor(y / grid.spacing())), 0, grid.n - 1);
}

struct Statistics {
  std::vector<double> ks;
  double chi2;
};

Statistics statistics(const std::vector<double>& positions, std::size_t samples,
                      int axes, const GridSpec& grid,
                      const std::vector<std::vector<double>>& marginals,
                      const std::vector<double>& expected_bins, int bins) {
  Statistics out;
  const double h = grid.spacing();
  std::vector<double> col(samples);
  for (int g = 0; g < axes; ++g) {
    for (std::size_t i = 0; i < samples; ++i) {
      col[i] = wrap(positions[i * axes + g] + 0.5 * h, grid.length);
    }
    out.ks.push_back(stats::ks_distance(col, marginals[g], grid.length));
  }
  std::vector<double> observed(expected_bins.size(), 0.0);
  for (std::size_t i = 0; i < samples; ++i) {
    std::size_t b = 0;
    for (int g = 0; g < axes; ++g) {
      b = b * bins + shifted_cell(positions[i * axes + g], grid) * bins / grid.n;
    }
    observed[b] += 1.0;
  }
  out.chi2 = stats::chi_square(observed, expected_bins);
  return out;
}

}  // namespace

VelocityField velocity_field(const DensityField& rho, const CurrentField& j,
                             double node_eps) {
  VelocityField out;
  out.grid = rho.grid;
  out.omega = rho.omega;
  const int d = rho.grid.dim;
  const std::size_t sites = rho.rho.size();
  const double rmax = *std::max_element(rho.rho.begin(), rho.rho.end());
  const double threshold = node_eps * rmax;
  out.v.assign(j.j.size(), std::vector<double>(sites, 0.0));
  out.valid.assign(sites, 0);
  for (std::size_t s = 0; s < sites; ++s) {
    if (!(rho.rho[s] >= threshold) || rho.rho[s] <= 0.0) {
      ++out.masked;
      continue;
    }
    out.valid[s] = 1;
    for (int k = 0; k < rho.omega; ++k) {
      double speed2 = 0.0;
      for (int a = 0; a < d; ++a) {
        const double v = j.j[k * d + a][s] / rho.rho[s];
        out.v[k * d + a][s] = v;
        speed2 += v * v;
      }
      const double speed = std::sqrt(speed2);
      out.max_speed = std::max(out.max_speed, speed);
      if (speed > 1.0 + kSpeedRoundoff) ++out.violations;
    }
  }
  return out;
}

VelocityField velocity_field(const ConfigAmplitude& psi, double node_eps) {
  return velocity_field(density(psi), currents(psi), node_eps);
}

TrajectoryEnsemble sample_initial(const DensityField& rho, std::size_t samples,
                                  std::uint64_t seed, std::uint64_t stream_base) {
  TrajectoryEnsemble ens;
  ens.grid = rho.grid;
  ens.omega = rho.omega;
  ens.seed = seed;
  ens.samples = samples;
  const int axes = rho.axes();
  ens.wrapped.resize(samples * axes);
  ens.last_velocity.assign(samples * axes, 0.0);
  const std::vector<double> cum = cumulative(rho.rho);
  if (!(cum.back() > 0.0)) throw DomainError("sample_initial: zero density");
  #pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < samples; ++i) {
    CounterRng rng(seed, stream_base + i);
    draw(cum, rho.grid, axes, rng, &ens.wrapped[i * axes]);
  }
  ens.unwrapped = ens.wrapped;
  return ens;
}

bool interpolate_velocity(const VelocityField& field, const double* x, double* out) {
  const GridSpec& g = field.grid;
  const int axes = field.axes();
  const double h = g.spacing();
  std::vector<int> lo(axes);
  std::vector<double> frac(axes);
  for (int a = 0; a < axes; ++a) {
    const double u = wrap(x[a], g.length) / h;
    const double f = std::floor(u);
    lo[a] = static_cast<int>(f) % g.n;
    frac[a] = u - f;
  }
  const std::size_t comps = field.v.size();
  for (std::size_t c = 0; c < comps; ++c) out[c] = 0.0;
  double wsum = 0.0;
  for (int corner = 0; corner < (1 << axes); ++corner) {
    std::size_t site = 0;
    double w = 1.0;
    for (int a = 0; a < axes; ++a) {
      const bool up = (corner >> (axes - 1 - a)) & 1;
      const int idx = up ? (lo[a] + 1) % g.n : lo[a];
      site = site * g.n + idx;
      w *= up ? frac[a] : 1.0 - frac[a];
    }
    if (!field.valid[site] || w == 0.0) continue;
    wsum += w;
    for (std::size_t c = 0; c < comps; ++c) out[c] += w * field.v[c][site];
  }
  if (!(wsum > 0.0)) return false;
  for (std::size_t c = 0; c < comps; ++c) out[c] /= wsum;
  return true;
}

void advance_ensemble(TrajectoryEnsemble& ens, const StepFields& fields, double dt,
                      double velocity_scale) {
  const int axes = ens.axes();
  const int d = ens.grid.dim;
  const double len = ens.grid.length;
  std::size_t node_events = 0, violations = 0;
  double max_speed = ens.max_speed;
  #pragma omp parallel for schedule(static) reduction(+ : node_events, violations) \
      reduction(max : max_speed)
  for (std::size_t i = 0; i < ens.samples; ++i) {
    double* last = &ens.last_velocity[i * axes];
    std::vector<double> x0(ens.unwrapped.begin() + i * axes,
                           ens.unwrapped.begin() + (i + 1) * axes);
    std::vector<double> k[4], probe(axes);
    const VelocityField* stage_field[4] = {fields.start, fields.mid, fields.mid, fields.end};
    const double stage_offset[4] = {0.0, 0.5, 0.5, 1.0};
    for (int s = 0; s < 4; ++s) {
      k[s].assign(axes, 0.0);
      for (int a = 0; a < axes; ++a) {
        probe[a] = s == 0 ? x0[a] : x0[a] + stage_offset[s] * dt * k[s - 1][a];
      }
      if (interpolate_velocity(*stage_field[s], probe.data(), k[s].data())) {
        for (int a = 0; a < axes; ++a) last[a] = k[s][a];
      } else {
        // Inside a node region: hold the last valid velocity, clamped to |v| <= 1.
        ++node_events;
        for (int p = 0; p < ens.omega; ++p) {
          double sp = 0.0;
          for (int a = 0; a < d; ++a) sp += last[p * d + a] * last[p * d + a];
          sp = std::sqrt(sp);
          const double scale = sp > 1.0 ? 1.0 / sp : 1.0;
          for (int a = 0; a < d; ++a) k[s][p * d + a] = last[p * d + a] * scale;
        }
      }
      for (int p = 0; p < ens.omega; ++p) {
        double sp = 0.0;
        for (int a = 0; a < d; ++a) sp += k[s][p * d + a] * k[s][p * d + a];
        sp = std::sqrt(sp);
        max_speed = std::max(max_speed, sp);
        if (sp > 1.0 + 1e-3) ++violations;
      }
      for (int a = 0; a < axes; ++a) k[s][a] *= velocity_scale;
    }
    for (int a = 0; a < axes; ++a) {
      const double x = x0[a] + dt / 6.0 * (k[0][a] + 2.0 * k[1][a] + 2.0 * k[2][a] + k[3][a]);
      ens.unwrapped[i * axes + a] = x;
      ens.wrapped[i * axes + a] = wrap(x, len);
    }
  }
  ens.node_events += node_events;
  ens.speed_violations += violations;
  ens.max_speed = max_speed;
  ens.time += dt;
}

GuidedRun::GuidedRun(std::function<void(double)> advance,
                     std::function<VelocityField()> field)
    : advance_(std::move(advance)), field_(std::move(field)) {}

void GuidedRun::observe(const VelocityField& f) {
  max_grid_speed_ = std::max(max_grid_speed_, f.max_speed);
  grid_violations_ += f.violations;
}

void GuidedRun::step(TrajectoryEnsemble& ens, double dt, double velocity_scale) {
  if (!have_start_) {
    start_ = field_();
    observe(start_);
    have_start_ = true;
  }
  advance_(0.5 * dt);
  const VelocityField mid = field_();
  observe(mid);
  advance_(0.5 * dt);
  VelocityField end = field_();
  observe(end);
  advance_ensemble(ens, {&start_, &mid, &end}, dt, velocity_scale);
  start_ = std::move(end);
}

bool order_preserved(const std::vector<double>& initial, const std::vector<double>& final_) {
  std::vector<std::size_t> idx(initial.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return initial[a] < initial[b]; });
  for (std::size_t i = 1; i < idx.size(); ++i) {
    if (initial[idx[i]] == initial[idx[i - 1]]) continue;
    if (!(final_[idx[i]] > final_[idx[i - 1]])) return false;
  }
  return true;
}

EquivarianceReport equivariance_test(const TrajectoryEnsemble& ens,
                                     const DensityField& rho, std::uint64_t seed,
                                     int repetitions, double factor) {
  if (ens.samples < 1000) {
    throw DomainError("equivariance_test: needs at least 1000 samples");
  }
  if (repetitions < 1) throw DomainError("equivariance_test: repetitions must be >= 1");
  const int axes = rho.axes();
  const GridSpec& g = rho.grid;
  EquivarianceReport rep;
  rep.samples = ens.samples;
  rep.repetitions = repetitions;
  rep.factor = factor;
  const int bins = bins_for(axes, g.n);
  rep.bins_per_axis = bins;

  std::vector<std::vector<double>> marginals;
  for (int a = 0; a < axes; ++a) marginals.push_back(marginal(rho, a));
  std::size_t nbins = 1;
  for (int a = 0; a < axes; ++a) nbins *= bins;
  std::vector<CompensatedSum> exp_acc(nbins);
  for (std::size_t s = 0; s < rho.rho.size(); ++s) {
    std::size_t rem = s, b = 0, mult = 1;
    for (int a = axes - 1; a >= 0; --a) {
      b += (rem % g.n) * bins / g.n * mult;
      mult *= bins;
      rem /= g.n;
    }
    exp_acc[b].add(rho.rho[s]);
  }
  const double total = compensated_sum(rho.rho);
  std::vector<double> expected(nbins);
  for (std::size_t b = 0; b < nbins; ++b) {
    expected[b] = exp_acc[b].value() / total * static_cast<double>(ens.samples);
  }

  const Statistics observed =
      statistics(ens.wrapped, ens.samples, axes, g, marginals, expected, bins);
  rep.ks = observed.ks;
  rep.chi2 = observed.chi2;

  std::vector<std::vector<double>> ks_base(axes);
  std::vector<double> chi_base;
  for (int r = 0; r < repetitions; ++r) {
    const TrajectoryEnsemble fresh =
        sample_initial(rho, ens.samples, seed, (static_cast<std::uint64_t>(r) + 1) << 40);
    const Statistics s =
        statistics(fresh.wrapped, fresh.samples, axes, g, marginals, expected, bins);
    for (int a = 0; a < axes; ++a) ks_base[a].push_back(s.ks[a]);
    chi_base.push_back(s.chi2);
  }
  rep.pass = true;
  for (int a = 0; a < axes; ++a) {
    rep.ks_baseline_p95.push_back(stats::nearest_rank(ks_base[a], 0.95));
    if (!(rep.ks[a] <= factor * rep.ks_baseline_p95[a])) rep.pass = false;
  }
  rep.chi2_baseline_p95 = stats::nearest_rank(chi_base, 0.95);
  if (!(rep.chi2 <= factor * rep.chi2_baseline_p95)) rep.pass = false;
  return rep;
}

}  // namespace bellsim
