#include "nlslab/sde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "nlslab/errors.hpp"
#include "nlslab/norms.hpp"
#include "nlslab/parallel.hpp"

namespace nlslab {

namespace {

long long step_count(double T, double dt) {
  return std::max<long long>(1, static_cast<long long>(std::ceil(T / dt - 1e-9)));
}

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

Moments moments(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

double z_score(double value, double se) {
  if (se > 0.0) return value / se;
  return value == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), value);
}

void require_paths(const std::vector<SdePath>& paths, bool rates) {
  if (paths.size() < 2) throw InsufficientData("Monte Carlo residuals need at least two paths");
  const std::size_t records = paths.front().times.size();
  for (const auto& p : paths) {
    if (p.times.size() != records || p.times != paths.front().times) {
      throw InvalidArgument("paths must share one record grid");
    }
    if (rates && p.int_mass_rate.size() != records) {
      throw InvalidArgument("paths were sampled without rate integrals");
    }
  }
}

}  // namespace

void SdeConfig::validate() const {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw InvalidArgument("coupling alpha must lie in [0, 1)");
  flow_config().validate();
  dissipation_params().validate();
}

FlowConfig SdeConfig::flow_config() const {
  FlowConfig f;
  f.q = q;
  f.dt = dt;
  f.dealias_factor = dealias_factor;
  f.scheme = scheme;
  return f;
}

DissipationParams SdeConfig::dissipation_params() const {
  DissipationParams p = dissipation;
  p.q = q;
  return p;
}

SdePropagator::SdePropagator(std::shared_ptr<const Lattice> lattice, SdeConfig config, NoiseProfile noise)
    : config_((config.validate(), config)),
      noise_(std::move(noise)),
      flow_(lattice, config.flow_config()),
      damping_(config.dissipation_params()) {
  if (noise_.amplitudes.size() != lattice->size()) throw LatticeMismatch("noise profile does not match the lattice");
  beta_.resize(lattice->size());
  for (std::size_t n = 0; n < lattice->size(); ++n) {
    const double lam = lattice->eigenvalue(n);
    beta_[n] = lam > 0.0 ? config_.alpha * std::pow(lam, damping_.s - 1.0) : 0.0;
  }
}

double SdePropagator::ou_step(SpectralField& u, double h, RandomStream& rng) {
  const auto& lam = flow_.lattice().eigenvalues();
  const double alpha = config_.alpha;
  double martingale = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n) {
    const double beta = beta_[n];
    const Complex z = u[n] * damped_phase(lam[n], beta, h);
    // Two draws per mode keep the stream position independent of the profile.
    const double re = rng.normal();
    const double im = rng.normal();
    const double a = noise_.amplitudes[n];
    if (a > 0.0 && alpha > 0.0) {
      const double var = alpha * a * a * (beta > 0.0 ? -std::expm1(-2.0 * beta * h) / (2.0 * beta) : h);
      const double sd = std::sqrt(0.5 * var);
      const Complex xi(sd * re, sd * im);
      martingale += (std::conj(z) * xi).real() + 0.5 * (std::norm(xi) - var);
      u[n] = z + xi;
    } else {
      u[n] = z;
    }
  }
  return martingale;
}

void SdePropagator::damping_step(SpectralField& u, double h) {
  const double rate = config_.alpha * damping_.c_ds;
  if (!(rate > 0.0)) return;
  // rho is homogeneous of degree 3k in u, so the flow of du/dt = -alpha C rho(u) u
  // is u(t) = (1 + 3k alpha C rho(u0) t)^{-1/(3k)} u0.
  const double power = 3.0 * damping_.k_tilde;
  const double rho = damping_norm(u, damping_);
  const double factor = std::exp(-std::log1p(power * rate * rho * h) / power);
  for (auto& z : u.coeffs()) z *= factor;
}

double SdePropagator::step(SpectralField& u, double h, RandomStream& rng) {
  double martingale = 0.0;
  if (flow_.config().scheme == SplittingScheme::strang) {
    damping_step(u, 0.5 * h);
    martingale += ou_step(u, 0.5 * h, rng);
    if (config_.hamiltonian) flow_.nonlinear_substep(u, h);
    martingale += ou_step(u, 0.5 * h, rng);
    damping_step(u, 0.5 * h);
  } else {
    if (config_.hamiltonian) flow_.nonlinear_substep(u, h);
    martingale += ou_step(u, h, rng);
    damping_step(u, h);
  }
  return martingale;
}

SpectralField sde_step(const SpectralField& u, const SdeConfig& config, const NoiseProfile& noise, RandomStream& rng) {
  SdePropagator prop(u.lattice_ptr(), config, noise);
  SpectralField out = u;
  prop.step(out, config.dt, rng);
  return out;
}

SdePath sample_path(SdePropagator& prop, const SpectralField& u0, double T, RandomStream& rng,
                    const SdeObservers& observers) {
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("path horizon must be positive");
  if (!(u0.lattice() == prop.lattice())) throw LatticeMismatch("initial datum and propagator use different lattices");
  const long long n = step_count(T, prop.config().dt);
  const double h = T / static_cast<double>(n);
  const long long stride =
      observers.every > 0.0 ? std::max<long long>(1, std::llround(observers.every / h)) : n;

  std::optional<RateEvaluator> rates;
  RateEvaluator::Rates r_prev;
  if (observers.rates) {
    rates.emplace(u0.lattice_ptr(), prop.config().dissipation_params(), prop.hamiltonian().grid().points());
    r_prev = rates->evaluate(u0);
  }
  double int_mass = 0.0, int_energy = 0.0, int_l2q = 0.0, martingale = 0.0;

  SdePath path;
  auto record = [&](double t, const SpectralField& u) {
    path.times.push_back(t);
    path.mass.push_back(mass(u));
    path.energy.push_back(prop.hamiltonian().energy(u));
    if (observers.rates) {
      path.int_mass_rate.push_back(int_mass);
      path.int_energy_rate.push_back(int_energy);
      path.int_lebesgue_2q.push_back(int_l2q);
    }
    path.mass_martingale.push_back(martingale);
    std::vector<double> hs;
    hs.reserve(observers.sobolev_orders.size());
    for (double s : observers.sobolev_orders) hs.push_back(sobolev_norm(u, s));
    path.hs_norms.push_back(std::move(hs));
    if (observers.keep_fields) path.fields.push_back(u);
  };

  SpectralField u = u0;
  record(0.0, u);
  for (long long i = 1; i <= n; ++i) {
    martingale += prop.step(u, h, rng);
    if (rates) {
      const auto r = rates->evaluate(u);
      int_mass += 0.5 * h * (r_prev.mass_rate + r.mass_rate);
      int_energy += 0.5 * h * (r_prev.energy_rate + r.energy_rate);
      int_l2q += 0.5 * h * (r_prev.lebesgue_2q + r.lebesgue_2q);
      r_prev = r;
    }
    if (i % stride == 0 || i == n) record(static_cast<double>(i) * h, u);
  }
  path.final_state = std::move(u);
  return path;
}

std::vector<SdePath> sample_paths(const SpectralField& u0, double T, const SdeConfig& config,
                                  const NoiseProfile& noise, std::uint64_t seed, std::size_t paths,
                                  const SdeObservers& observers, int workers) {
  std::vector<SdePath> out(paths);
  parallel_for(paths, workers, [&](std::size_t i) {
    SdePropagator prop(u0.lattice_ptr(), config, noise);
    RandomStream rng = RandomStream::derive(seed, i);
    out[i] = sample_path(prop, u0, T, rng, observers);
  });
  return out;
}

ItoMassReport ito_mass_residual(const std::vector<SdePath>& paths, const SdeConfig& config, const NoiseProfile& noise,
                                const Lattice& lattice) {
  require_paths(paths, true);
  const double a0 = noise.sum(lattice, 0.0);
  const auto& times = paths.front().times;
  ItoMassReport rep;
  rep.pass = true;
  std::vector<double> x(paths.size()), y(paths.size());
  for (std::size_t j = 0; j < times.size(); ++j) {
    for (std::size_t p = 0; p < paths.size(); ++p) {
      const auto& path = paths[p];
      x[p] = path.mass[j] + config.alpha * path.int_mass_rate[j] - path.mass[0] - 0.5 * config.alpha * a0 * times[j];
      y[p] = x[p] - path.mass_martingale[j];
    }
    const auto mx = moments(x);
    const auto my = moments(y);
    rep.residual.push_back({times[j], mx.mean, mx.se});
    rep.bias.push_back({times[j], my.mean, my.se});
    const double z = std::abs(z_score(mx.mean, mx.se));
    rep.max_abs_z = std::max(rep.max_abs_z, z);
    if (!(z <= 3.0)) rep.pass = false;
  }
  return rep;
}

ItoEnergyReport ito_energy_check(const std::vector<SdePath>& paths, const SdeConfig& config,
                                 const NoiseProfile& noise, const Lattice& lattice) {
  require_paths(paths, true);
  const int d = lattice.dimension();
  const double a1 = noise.sum(lattice, 1.0);
  const double a_sogge = noise.sum(lattice, 0.5 * (d - 1));
  const double a_torus = noise.sum(lattice, 0.0) * std::pow(2.0 * std::numbers::pi, -d);
  const double a_exact = (config.q + 1) * a_torus;
  const double alpha = config.alpha;
  const auto& times = paths.front().times;

  ItoEnergyReport rep;
  rep.pass = true;
  std::vector<double> m(paths.size()), mt(paths.size()), r(paths.size());
  for (std::size_t j = 0; j < times.size(); ++j) {
    for (std::size_t p = 0; p < paths.size(); ++p) {
      const auto& path = paths[p];
      const double lhs = path.energy[j] + alpha * path.int_energy_rate[j] - path.energy[0];
      const double base = 0.5 * alpha * a1 * times[j];
      const double pot = path.int_lebesgue_2q[j];
      m[p] = lhs - base - 0.5 * alpha * a_sogge * pot;
      mt[p] = lhs - base - 0.5 * alpha * a_torus * pot;
      r[p] = lhs - base - 0.5 * alpha * a_exact * pot;
    }
    const auto mm = moments(m), mmt = moments(mt), mr = moments(r);
    rep.margin.push_back({times[j], mm.mean, mm.se});
    rep.margin_torus.push_back({times[j], mmt.mean, mmt.se});
    rep.residual.push_back({times[j], mr.mean, mr.se});
    rep.max_margin_z = std::max(rep.max_margin_z, z_score(mm.mean, mm.se));
    rep.max_residual_z = std::max(rep.max_residual_z, std::abs(z_score(mr.mean, mr.se)));
  }
  rep.pass = rep.max_margin_z <= 3.0 && rep.max_residual_z <= 3.0;
  return rep;
}

}  // namespace nlslab
