#include "nlslab/dissipation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nlslab/errors.hpp"
#include "nlslab/flow.hpp"
#include "nlslab/norms.hpp"

namespace nlslab {

namespace {

double int_power(double a, int n) {
  double w = 1.0;
  for (int j = 0; j < n; ++j) w *= a;
  return w;
}

}  // namespace

void DissipationParams::validate() const {
  if (!std::isfinite(s)) throw InvalidArgument("dissipation order s must be finite");
  if (!(k_tilde >= 1.0)) throw InvalidArgument("k_tilde must be at least 1");
  if (!(c_ds >= 0.0)) throw InvalidArgument("damping constant must be nonnegative");
  if (!(eta > 0.0 && eta < s)) throw InvalidArgument("eta must lie in (0, s)");
  if (q < 1) throw InvalidArgument("nonlinearity exponent q must be a positive integer");
}

double damping_norm(const SpectralField& u, const DissipationParams& p) {
  const double x = sobolev_norm(u, p.s_minus());
  const double rho = std::pow(x, 3.0 * p.k_tilde);
  if (!std::isfinite(rho)) throw Overflow("damping norm overflowed", x);
  return rho;
}

SpectralField apply_dissipation(const SpectralField& u, const DissipationParams& p) {
  p.validate();
  SpectralField out = frac_laplacian(u, p.s - 1.0);
  const double rho = damping_norm(u, p);
  if (p.c_ds > 0.0) {
    for (std::size_t n = 0; n < u.size(); ++n) out[n] += p.c_ds * rho * u[n];
  }
  return out;
}

double mass_rate(const SpectralField& u, const DissipationParams& p) {
  p.validate();
  const double l2 = sobolev_norm(u, 0.0);
  return std::pow(sobolev_seminorm(u, p.s - 1.0), 2) + p.c_ds * damping_norm(u, p) * l2 * l2;
}

RateEvaluator::RateEvaluator(std::shared_ptr<const Lattice> lattice, DissipationParams params, int points)
    : params_(params),
      grid_(lattice, points > 0 ? points : dealiased_points(*lattice, params.q)),
      values_(grid_.grid_size()),
      scratch_(lattice) {
  params_.validate();
  if (grid_.points() <= (2 * params_.q + 2) * lattice->max_component()) {
    throw UnderResolved("rate quadrature needs more than " +
                        std::to_string((2 * params_.q + 2) * lattice->max_component()) + " points per axis");
  }
}

RateEvaluator::Rates RateEvaluator::evaluate(const SpectralField& u) {
  const DissipationParams& p = params_;
  const int q = p.q;
  Rates r;
  const double rho = damping_norm(u, p);
  const double l2sq = std::pow(sobolev_norm(u, 0.0), 2);

  grid_.synthesize(u.coeffs());
  std::copy(grid_.buffer().begin(), grid_.buffer().end(), values_.begin());
  const auto& lam = u.lattice().eigenvalues();
  for (std::size_t n = 0; n < u.size(); ++n) scratch_[n] = lam[n] > 0.0 ? std::pow(lam[n], p.s - 1.0) * u[n] : Complex{};
  grid_.synthesize(scratch_.coeffs());

  double sum_2q = 0.0, sum_2q2 = 0.0, pairing = 0.0;
  auto g = grid_.buffer();
  for (std::size_t j = 0; j < values_.size(); ++j) {
    const double a = std::norm(values_[j]);
    const double w = int_power(a, q);
    sum_2q += w;
    sum_2q2 += w * a;
    pairing += w * (g[j] * std::conj(values_[j])).real();
  }
  const double cell = grid_.cell_volume();
  r.lebesgue_2q = sum_2q * cell;
  r.lebesgue_2q2 = sum_2q2 * cell;
  pairing *= cell;
  if (!std::isfinite(pairing) || !std::isfinite(r.lebesgue_2q2)) {
    throw Overflow("rate quadrature overflowed", std::sqrt(l2sq));
  }

  const double h1 = std::pow(sobolev_seminorm(u, 1.0), 2);
  r.mass_rate = std::pow(sobolev_seminorm(u, p.s - 1.0), 2) + p.c_ds * rho * l2sq;
  r.energy_rate = std::pow(sobolev_seminorm(u, p.s), 2) + p.c_ds * rho * (r.lebesgue_2q2 + h1) + pairing;
  r.coercive_rate =
      0.5 * std::pow(sobolev_seminorm(u, p.s), 2) + p.c_ds * rho * r.lebesgue_2q2 + 0.5 * p.c_ds * rho * l2sq;
  return r;
}

double energy_rate(const SpectralField& u, const DissipationParams& p, int points) {
  RateEvaluator ev(u.lattice_ptr(), p, points);
  return ev.evaluate(u).energy_rate;
}

double coercive_rate(const SpectralField& u, const DissipationParams& p, int points) {
  RateEvaluator ev(u.lattice_ptr(), p, points);
  return ev.evaluate(u).coercive_rate;
}

int cordoba_points(const Lattice& lattice, double q) {
  return std::max(fft_friendly_size(4 * (2 * lattice.max_component() + 1)), dealiased_points(lattice, q));
}

CordobaTerms cordoba_terms(const SpectralField& f, double gamma, double q, int points) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidArgument("Cordoba exponent gamma must lie in (0, 1]");
  if (!(q >= 1.0)) throw InvalidArgument("Cordoba power q must be at least 1");
  if (points <= 0) points = cordoba_points(f.lattice(), q);
  GridTransform grid(f.lattice_ptr(), points);
  const double cell = grid.cell_volume();

  grid.synthesize(f.coeffs());
  std::vector<Complex> values(grid.buffer().begin(), grid.buffer().end());
  grid.synthesize(frac_laplacian(f, gamma).coeffs());
  CordobaTerms t;
  auto g = grid.buffer();
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double a = std::abs(values[j]);
    t.lhs += std::pow(a, 2.0 * q) * (values[j] * std::conj(g[j])).real();
  }
  t.lhs *= cell;

  auto buf = grid.buffer();
  for (std::size_t j = 0; j < values.size(); ++j) buf[j] = std::pow(std::abs(values[j]), q + 1.0);
  grid.analyze_full();
  double acc = 0.0;
  for (std::size_t j = 0; j < buf.size(); ++j) {
    const Wavevector k = grid.grid_wavevector(j);
    const double lambda = double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2];
    if (lambda > 0.0) acc += std::pow(lambda, gamma) * std::norm(buf[j]);
  }
  t.rhs = acc / (q + 1.0);
  return t;
}

double cordoba_gap(const SpectralField& f, double gamma, double q, int points) {
  return cordoba_terms(f, gamma, q, points).gap();
}

CoercivityReport coercivity_gap(const std::vector<SpectralField>& corpus, const DissipationParams& p, int points) {
  p.validate();
  CoercivityReport rep;
  rep.fields = corpus.size();
  rep.supercritical_regime = p.s > 2.0;
  rep.beta = (4.0 * p.q + 2.0) / (3.0 * p.k_tilde + 2.0);
  if (!(rep.beta > 0.0 && rep.beta < 1.0)) {
    throw InvalidArgument("k_tilde must exceed 4q/3 for the Young split to have an exponent in (0, 1)");
  }
  if (corpus.empty()) return rep;
  RateEvaluator ev(corpus.front().lattice_ptr(), p, points);
  for (const auto& u : corpus) {
    const auto r = ev.evaluate(u);
    rep.K = std::max(rep.K, r.coercive_rate - r.energy_rate);

    // Cauchy-Schwarz and Young on the pairing, written with the (s-2)/2 split.
    const double pairing = r.energy_rate - std::pow(sobolev_seminorm(u, p.s), 2) -
                           p.c_ds * damping_norm(u, p) * (r.lebesgue_2q2 + std::pow(sobolev_seminorm(u, 1.0), 2));
    const SpectralField nl = nonlinear_term(u, p.q);
    const double bound = -0.5 * std::pow(sobolev_seminorm(u, p.s), 2) - 0.5 * std::pow(sobolev_seminorm(nl, p.s - 2.0), 2);
    const bool step_a = pairing >= bound - 1e-10 * (std::abs(bound) + std::abs(pairing));

    // z^beta <= (1 - beta) + beta z with z = ||u||^2 ||u||_{H^{s-eta}}^{3k}.
    const double z = std::pow(sobolev_norm(u, 0.0), 2) * damping_norm(u, p);
    const double lhs = std::pow(z, rep.beta);
    const double rhs = (1.0 - rep.beta) + rep.beta * z;
    const bool step_b = lhs <= rhs + 1e-12 * (1.0 + rhs);
    if (!step_a || !step_b) ++rep.violations;
  }
  return rep;
}

}  // namespace nlslab
