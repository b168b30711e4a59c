#include "nlslab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "nlslab/errors.hpp"
#include "nlslab/norms.hpp"

namespace nlslab {

namespace {

constexpr int kMaxCollocationIterations = 60;
constexpr int kMaxSplitDepth = 16;

long long step_count(double T, double dt) {
  const double ratio = std::abs(T) / dt;
  return std::max<long long>(1, static_cast<long long>(std::ceil(ratio - 1e-9)));
}

double l2(const std::vector<Complex>& v) {
  double acc = 0.0;
  for (const auto& z : v) acc += std::norm(z);
  return std::sqrt(acc);
}

}  // namespace

void FlowConfig::validate() const {
  if (q < 1) throw InvalidArgument("nonlinearity exponent q must be a positive integer");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("time step must be positive and finite");
  if (dealias_factor < 0) throw InvalidArgument("dealias factor must be nonnegative");
}

NlsPropagator::NlsPropagator(std::shared_ptr<const Lattice> lattice, FlowConfig config)
    : lattice_(std::move(lattice)),
      config_(config),
      grid_(lattice_, (config.validate(), dealiased_points(*lattice_, config.q, config.dealias_factor))) {
  const std::size_t n = lattice_->size();
  k1_.resize(n);
  k2_.resize(n);
  n1_.resize(n);
  n2_.resize(n);
  stage_.resize(n);
}

void NlsPropagator::nonlinear_term(std::span<const Complex> u, std::span<Complex> out) {
  grid_.synthesize(u);
  auto buf = grid_.buffer();
  const int q = config_.q;
  for (auto& z : buf) {
    const double a = std::norm(z);
    double w = a;
    for (int j = 1; j < q; ++j) w *= a;
    z *= w;
  }
  for (const auto& z : buf) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      double norm2 = 0.0;
      for (const auto& c : u) norm2 += std::norm(c);
      throw Overflow("nonlinear term overflowed", std::sqrt(norm2));
    }
  }
  grid_.analyze(out);
}

SpectralField NlsPropagator::nonlinear_term(const SpectralField& u) {
  SpectralField out(lattice_);
  nonlinear_term(u.coeffs(), out.coeffs());
  return out;
}

void NlsPropagator::linear_substep(SpectralField& u, double h) const {
  const auto& lam = lattice_->eigenvalues();
  for (std::size_t n = 0; n < u.size(); ++n) u[n] *= damped_phase(lam[n], 0.0, h);
}

// Two-stage Gauss-Legendre collocation for du/dt = -i P_N(|u|^{2q} u), solved
// by fixed-point iteration. Leaves u untouched and returns false when the
// iteration does not contract.
bool NlsPropagator::collocation(std::vector<Complex>& u, double h) {
  constexpr double r = std::numbers::sqrt3 / 6.0;
  constexpr double a11 = 0.25, a12 = 0.25 - r, a21 = 0.25 + r, a22 = 0.25;
  const Complex minus_i{0.0, -1.0};
  const std::size_t n = u.size();

  auto rhs = [&](std::vector<Complex>& out) {
    nonlinear_term(stage_, out);
    for (auto& z : out) z *= minus_i;
  };

  std::copy(u.begin(), u.end(), stage_.begin());
  rhs(k1_);
  k2_ = k1_;
  const double scale = l2(u);
  if (scale == 0.0) return true;

  double previous = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int it = 0; it < kMaxCollocationIterations; ++it) {
    for (std::size_t j = 0; j < n; ++j) stage_[j] = u[j] + h * (a11 * k1_[j] + a12 * k2_[j]);
    rhs(n1_);
    for (std::size_t j = 0; j < n; ++j) stage_[j] = u[j] + h * (a21 * k1_[j] + a22 * k2_[j]);
    rhs(n2_);
    double diff = 0.0;
    for (std::size_t j = 0; j < n; ++j) diff += std::norm(n1_[j] - k1_[j]) + std::norm(n2_[j] - k2_[j]);
    diff = std::sqrt(diff) * std::abs(h);
    std::swap(k1_, n1_);
    std::swap(k2_, n2_);
    if (diff <= 1e-15 * scale) {
      converged = true;
      break;
    }
    if (it >= 2 && diff > 0.5 * previous) {
      // Stalled at round-off is fine; stalled above it means no contraction.
      if (diff <= 1e-13 * scale) converged = true;
      break;
    }
    previous = diff;
  }
  if (!converged) return false;
  for (std::size_t j = 0; j < n; ++j) u[j] += 0.5 * h * (k1_[j] + k2_[j]);
  return true;
}

void NlsPropagator::nonlinear_recursive(std::vector<Complex>& u, double h, int depth) {
  if (collocation(u, h)) return;
  if (depth >= kMaxSplitDepth) {
    throw NoConvergence("nonlinear substep did not converge after " + std::to_string(depth) + " halvings");
  }
  nonlinear_recursive(u, 0.5 * h, depth + 1);
  nonlinear_recursive(u, 0.5 * h, depth + 1);
}

void NlsPropagator::nonlinear_substep(SpectralField& u, double h) { nonlinear_recursive(u.data(), h, 0); }

void NlsPropagator::step(SpectralField& u, double h) {
  if (config_.scheme == SplittingScheme::strang) {
    linear_substep(u, 0.5 * h);
    nonlinear_substep(u, h);
    linear_substep(u, 0.5 * h);
  } else {
    nonlinear_substep(u, h);
    linear_substep(u, h);
  }
}

double NlsPropagator::potential(const SpectralField& u) {
  grid_.synthesize(u.coeffs());
  const double p = 2.0 * config_.q + 2.0;
  double acc = 0.0;
  for (const auto& z : grid_.buffer()) {
    const double a = std::norm(z);
    double w = a;
    for (int j = 0; j < config_.q; ++j) w *= a;
    acc += w;
  }
  if (!std::isfinite(acc)) throw Overflow("potential energy overflowed", sobolev_norm(u, 0.0));
  return acc * grid_.cell_volume() / p;
}

double NlsPropagator::energy(const SpectralField& u) {
  return 0.5 * std::pow(sobolev_seminorm(u, 1.0), 2) + potential(u);
}

double mass(const SpectralField& u) {
  double acc = 0.0;
  for (const auto& z : u.coeffs()) acc += std::norm(z);
  return 0.5 * acc;
}

double energy(const SpectralField& u, int q, int points) {
  const Lattice& lat = u.lattice();
  if (points <= 0) points = dealiased_points(lat, q);
  if (points <= (2 * q + 2) * lat.max_component()) {
    throw UnderResolved("energy quadrature needs more than " + std::to_string((2 * q + 2) * lat.max_component()) +
                        " points per axis");
  }
  const double p = 2.0 * q + 2.0;
  return 0.5 * std::pow(sobolev_seminorm(u, 1.0), 2) + std::pow(lebesgue_norm(u, p, points), p) / p;
}

SpectralField nonlinear_term(const SpectralField& u, int q, int dealias_factor) {
  FlowConfig cfg;
  cfg.q = q;
  cfg.dealias_factor = dealias_factor;
  NlsPropagator prop(u.lattice_ptr(), cfg);
  return prop.nonlinear_term(u);
}

SpectralField step(const SpectralField& u, const FlowConfig& config) {
  NlsPropagator prop(u.lattice_ptr(), config);
  SpectralField out = u;
  prop.step(out, config.dt);
  return out;
}

long long integrate(NlsPropagator& prop, SpectralField& u, double T,
                    const std::function<bool(long long, double, const SpectralField&)>& visit) {
  if (!(T >= 0.0) || !std::isfinite(T)) throw InvalidArgument("integrate expects a finite nonnegative horizon");
  if (!visit(0, 0.0, u)) return 0;
  if (T == 0.0) return 0;
  const long long n = step_count(T, prop.config().dt);
  const double h = T / static_cast<double>(n);
  for (long long i = 1; i <= n; ++i) {
    prop.step(u, h);
    if (!visit(i, (i == n) ? T : static_cast<double>(i) * h, u)) return i;
  }
  return n;
}

Trajectory flow(NlsPropagator& prop, const SpectralField& u0, double T, const ObserverSpec& observers) {
  if (T < 0.0) {
    Trajectory tr = flow(prop, conjugate(u0), -T, observers);
    for (auto& t : tr.times) t = -t;
    for (auto& f : tr.fields) f = conjugate(f);
    *tr.final_state = conjugate(*tr.final_state);
    return tr;
  }
  Trajectory tr;
  const long long n = T == 0.0 ? 0 : step_count(T, prop.config().dt);
  const double h = n > 0 ? T / static_cast<double>(n) : 0.0;
  const long long stride =
      observers.every > 0.0 && n > 0 ? std::max<long long>(1, std::llround(observers.every / h)) : std::max<long long>(n, 1);

  auto record = [&](double t, const SpectralField& u) {
    tr.times.push_back(t);
    tr.mass.push_back(mass(u));
    tr.energy.push_back(prop.energy(u));
    std::vector<double> hs;
    for (double s : observers.sobolev_orders) hs.push_back(sobolev_norm(u, s));
    tr.hs_norms.push_back(std::move(hs));
    if (observers.keep_fields) tr.fields.push_back(u);
  };

  SpectralField u = u0;
  integrate(prop, u, T, [&](long long i, double t, const SpectralField& v) {
    if (i % stride == 0 || i == n) record(t, v);
    return true;
  });
  tr.final_state = std::move(u);
  return tr;
}

Trajectory flow(const SpectralField& u0, double T, const FlowConfig& config, const ObserverSpec& observers) {
  NlsPropagator prop(u0.lattice_ptr(), config);
  return flow(prop, u0, T, observers);
}

double LwpParams::gamma(int q) const {
  const double rr = resolved_r(q);
  const double g = 1.0 - 2.0 * q / rr;
  if (!(g > 0.0 && g < 1.0)) throw InvalidArgument("Strichartz exponent r must exceed 2q so that gamma lies in (0, 1)");
  return g;
}

double LwpParams::space_exponent(int q, int dimension) const {
  const double inv_p = 0.5 - 2.0 / (dimension * resolved_r(q));
  return inv_p <= 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / inv_p;
}

double increment_time(double R, const LwpParams& lwp, int q) {
  if (!(R > 0.0)) throw InvalidArgument("increment radius must be positive");
  if (!(lwp.c0 > 0.0)) throw InvalidArgument("increment constant c0 must be positive");
  const double g = lwp.gamma(q);
  const double log_bound =
      -((2.0 * q + 2.0) * std::log(2.0) + 2.0 * q * std::log(R) + (2.0 * q + 1.0) * std::log(lwp.c0));
  return std::exp(log_bound / g);
}

IncrementReport increment_check(const SpectralField& u0, double s, const LwpParams& lwp, const FlowConfig& config) {
  IncrementReport rep;
  rep.radius = sobolev_norm(u0, s);
  if (rep.radius == 0.0) return rep;
  const int q = config.q;
  rep.time = increment_time(rep.radius, lwp, q);

  FlowConfig cfg = config;
  const long long n = std::max<long long>(32, step_count(rep.time, config.dt));
  cfg.dt = rep.time / static_cast<double>(n);
  NlsPropagator prop(u0.lattice_ptr(), cfg);

  const double r = lwp.resolved_r(q);
  const double sigma = s - 1.0 / r;
  const double p = lwp.space_exponent(q, u0.lattice().dimension());
  const int points = prop.grid().points();
  double sup = 0.0, integral = 0.0, previous = 0.0;
  SpectralField u = u0;
  integrate(prop, u, rep.time, [&](long long i, double, const SpectralField& v) {
    sup = std::max(sup, sobolev_norm(v, s));
    const double w = std::pow(lebesgue_norm(to_physical(bessel_potential(v, sigma), points), p), r);
    if (i > 0) integral += 0.5 * (previous + w) * cfg.dt;
    previous = w;
    return true;
  });
  rep.sup_ratio = sup / rep.radius;
  rep.y_ratio = (sup + std::pow(integral, 1.0 / r)) / rep.radius;
  rep.violated = rep.sup_ratio > 2.0 * lwp.c0;
  return rep;
}

double GapCurve::sup() const {
  double m = 0.0;
  for (double g : gaps) m = std::max(m, g);
  return m;
}

GapCurve galerkin_gap(const SpectralField& u0, double coarse_cutoff, double fine_cutoff, double s_prime, double T,
                      const FlowConfig& config, int records) {
  if (!(coarse_cutoff < fine_cutoff)) throw InvalidArgument("coarse cutoff must be below the fine cutoff");
  if (fine_cutoff > u0.lattice().cutoff()) throw InvalidArgument("initial datum does not resolve the fine lattice");
  if (!(T >= 0.0)) throw InvalidArgument("gap horizon must be nonnegative");
  if (records < 1) records = 1;
  const int d = u0.lattice().dimension();
  auto fine = Lattice::make(d, fine_cutoff);
  auto coarse = Lattice::make(d, coarse_cutoff);
  SpectralField uf = transfer(u0, fine);
  SpectralField uc = transfer(u0, coarse);
  NlsPropagator pf(fine, config), pc(coarse, config);

  GapCurve curve;
  auto record = [&](double t) {
    curve.times.push_back(t);
    curve.gaps.push_back(sobolev_norm(uf - transfer(uc, fine), s_prime));
  };
  record(0.0);
  if (T == 0.0) return curve;
  const long long n = step_count(T, config.dt);
  const double h = T / static_cast<double>(n);
  int next = 1;
  for (long long i = 1; i <= n; ++i) {
    pf.step(uf, h);
    pc.step(uc, h);
    while (next <= records && i == static_cast<long long>(std::llround(static_cast<double>(n) * next / records))) {
      record(static_cast<double>(i) * h);
      ++next;
    }
  }
  return curve;
}

}  // namespace nlslab
