#include "nlslab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlslab/dissipation.hpp"
#include "nlslab/errors.hpp"
#include "nlslab/flow.hpp"
#include "nlslab/norms.hpp"

namespace nlslab {

namespace {

double z_score(double diff, double se) {
  if (se > 0.0) return diff / se;
  return diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> collect(const EmpiricalMeasure& mu, const Observable& f) {
  std::vector<double> out;
  out.reserve(mu.samples.size());
  for (const auto& r : mu.samples) out.push_back(f(r));
  return out;
}

}  // namespace

EmpiricalMeasure kb_sample(const std::shared_ptr<const Lattice>& lattice, const SdeConfig& config,
                           const NoiseProfile& noise, double horizon, double burn_in, double thin, RandomStream& rng,
                           const KbOptions& options) {
  if (!(thin > 0.0) || !(burn_in >= 0.0)) throw InvalidArgument("thin must be positive and burn-in nonnegative");
  if (!(horizon >= burn_in + 10.0 * thin)) throw InvalidArgument("horizon must cover burn-in plus ten thinning intervals");
  SdePropagator prop(lattice, config, noise);
  RateEvaluator rates(lattice, config.dissipation_params(), prop.hamiltonian().grid().points());

  const long long n = std::max<long long>(1, static_cast<long long>(std::ceil(horizon / config.dt - 1e-9)));
  const double h = horizon / static_cast<double>(n);
  const long long stride = std::max<long long>(1, std::llround(thin / h));
  const long long first = static_cast<long long>(std::ceil(burn_in / h - 1e-9));

  EmpiricalMeasure mu;
  mu.burn_in = burn_in;
  mu.thin = static_cast<double>(stride) * h;
  mu.alpha = config.alpha;
  mu.modes = lattice->size();
  mu.sobolev_orders = options.sobolev_orders;
  mu.samples.reserve(static_cast<std::size_t>((n - first) / stride + 1));

  SpectralField u(lattice);
  for (long long i = 1; i <= n; ++i) {
    prop.step(u, h, rng);
    if (i < first || i % stride != 0) continue;
    const auto r = rates.evaluate(u);
    KbRecord rec;
    rec.time = static_cast<double>(i) * h;
    rec.mass = mass(u);
    rec.energy = 0.5 * std::pow(sobolev_seminorm(u, 1.0), 2) + r.lebesgue_2q2 / (2.0 * config.q + 2.0);
    rec.mass_rate = r.mass_rate;
    rec.energy_rate = r.energy_rate;
    rec.coercive_rate = r.coercive_rate;
    for (double s : options.sobolev_orders) rec.hs_norms.push_back(sobolev_norm(u, s));
    mu.samples.push_back(std::move(rec));
    if (options.keep_fields) mu.fields.push_back(u);
  }
  if (mu.samples.size() < 2) throw InsufficientData("empirical measure needs at least two samples");
  return mu;
}

namespace observables {
Observable mass() {
  return [](const KbRecord& r) { return r.mass; };
}
Observable energy() {
  return [](const KbRecord& r) { return r.energy; };
}
Observable mass_rate() {
  return [](const KbRecord& r) { return r.mass_rate; };
}
Observable energy_rate() {
  return [](const KbRecord& r) { return r.energy_rate; };
}
Observable coercive_rate() {
  return [](const KbRecord& r) { return r.coercive_rate; };
}
Observable l2_norm() {
  return [](const KbRecord& r) { return std::sqrt(r.l2_squared()); };
}
Observable sobolev(std::size_t order_index) {
  return [order_index](const KbRecord& r) { return r.hs_norms.at(order_index); };
}
}  // namespace observables

Estimate batch_means(const std::vector<double>& values, std::size_t batches) {
  if (batches < 2) throw InvalidArgument("batch means need at least two batches");
  if (values.size() < batches) throw InsufficientData("fewer samples than batches");
  const std::size_t b = values.size() / batches;
  // Drop the earliest remainder so every batch has equal length.
  const std::size_t offset = values.size() - b * batches;
  std::vector<double> means(batches, 0.0);
  for (std::size_t j = 0; j < batches; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < b; ++i) acc += values[offset + j * b + i];
    means[j] = acc / static_cast<double>(b);
  }
  Estimate e;
  e.samples = values.size();
  e.batches = batches;
  // The point estimate uses every sample so it does not depend on their order.
  for (double v : values) e.mean += v;
  e.mean /= static_cast<double>(values.size());
  double centre = 0.0;
  for (double m : means) centre += m;
  centre /= static_cast<double>(batches);
  double ss = 0.0, lag = 0.0;
  for (std::size_t j = 0; j < batches; ++j) {
    ss += (means[j] - centre) * (means[j] - centre);
    if (j + 1 < batches) lag += (means[j] - centre) * (means[j + 1] - centre);
  }
  e.se = std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
  e.warning = ss > 0.0 && lag / ss > 0.5;
  return e;
}

Estimate moment(const EmpiricalMeasure& mu, const Observable& f) {
  if (mu.samples.size() < 20) throw InsufficientData("moment estimates need at least 20 samples");
  return batch_means(collect(mu, f));
}

IdentityReport check_stationary_identity(const EmpiricalMeasure& mu, const NoiseProfile& noise,
                                         const Lattice& lattice) {
  const Estimate e = moment(mu, observables::mass_rate());
  IdentityReport rep;
  rep.estimate = e.mean;
  rep.se = e.se;
  rep.target = 0.5 * noise.sum(lattice, 0.0);
  rep.z = z_score(rep.estimate - rep.target, rep.se);
  rep.pass = std::abs(rep.z) <= 3.0;
  return rep;
}

IdentityReport stationarity_check(const EmpiricalMeasure& mu, const Observable& f) {
  const auto values = collect(mu, f);
  if (values.size() < 40) throw InsufficientData("two-window test needs at least 40 samples");
  const std::size_t half = values.size() / 2;
  const Estimate a = batch_means({values.begin(), values.begin() + half}, 10);
  const Estimate b = batch_means({values.begin() + half, values.end()}, 10);
  IdentityReport rep;
  rep.estimate = b.mean;
  rep.target = a.mean;
  rep.se = std::hypot(a.se, b.se);
  rep.z = z_score(b.mean - a.mean, rep.se);
  rep.pass = std::abs(rep.z) <= 2.5758293035489;
  return rep;
}

BoundedFamilyReport check_energy_moment(const std::vector<Estimate>& estimates) {
  if (estimates.empty()) throw InsufficientData("bounded-family check needs at least one estimate");
  BoundedFamilyReport rep;
  for (const auto& e : estimates) rep.estimates.push_back(e.mean);
  rep.median = median(rep.estimates);
  rep.max = *std::max_element(rep.estimates.begin(), rep.estimates.end());
  rep.pass = rep.max <= 2.0 * rep.median;
  return rep;
}

double CutoffSpec::operator()(double x) const {
  if (x <= 1.0) return 1.0;
  if (x >= 2.0) return 0.0;
  const double a = std::exp(-1.0 / (2.0 - x));
  const double b = std::exp(-1.0 / (x - 1.0));
  return a / (a + b);
}

TailCurve tail_moment(const EmpiricalMeasure& mu, std::vector<double> radii, const CutoffSpec& cutoff) {
  if (mu.samples.empty()) throw InsufficientData("tail moment needs samples");
  std::vector<double> x;
  for (const auto& r : mu.samples) x.push_back(r.l2_squared());
  if (radii.empty()) {
    const double lo = median(x), hi = *std::max_element(x.begin(), x.end());
    if (lo > 0.0) {
      for (int j = 0; j < 8; ++j) radii.push_back(lo * std::pow(hi / lo, j / 7.0));
    } else {
      radii = {1.0, 2.0, 4.0, 8.0};
    }
  }
  for (double R : radii) {
    if (!(R > 0.0)) throw InvalidArgument("tail radii must be positive");
  }
  TailCurve curve;
  curve.radii = radii;
  for (double R : radii) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += mu.samples[i].mass_rate * (1.0 - cutoff.at_radius(x[i], R));
    curve.values.push_back(acc / static_cast<double>(x.size()));
  }
  std::vector<double> lx, ly;
  for (std::size_t j = 0; j < radii.size(); ++j) {
    if (curve.values[j] > 0.0) {
      lx.push_back(std::log(radii[j]));
      ly.push_back(std::log(curve.values[j]));
    }
  }
  if (lx.size() < 3) {
    curve.resolution_floor = true;
    curve.pass = true;
    return curve;
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t j = 0; j < lx.size(); ++j) {
    mx += lx[j] / n;
    my += ly[j] / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t j = 0; j < lx.size(); ++j) {
    sxy += (lx[j] - mx) * (ly[j] - my);
    sxx += (lx[j] - mx) * (lx[j] - mx);
  }
  curve.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  curve.pass = curve.slope <= -0.7;
  return curve;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InsufficientData("Kolmogorov-Smirnov needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsResult res;
  res.statistic = d;
  const double ne = std::sqrt(na * nb / (na + nb));
  const double lambda = (ne + 0.12 + 0.11 / ne) * d;
  if (lambda < 0.2) return res;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-17) break;
  }
  res.p_value = std::clamp(sum, 0.0, 1.0);
  return res;
}

std::vector<InviscidRow> inviscid_compare(const std::vector<EmpiricalMeasure>& measures,
                                          const std::vector<std::pair<std::string, Observable>>& observables) {
  if (measures.size() < 3) throw InvalidArgument("inviscid comparison needs at least three couplings");
  for (const auto& m : measures) {
    if (m.modes != measures.front().modes) throw LatticeMismatch("inviscid comparison needs a common lattice");
  }
  std::vector<const EmpiricalMeasure*> order;
  for (const auto& m : measures) order.push_back(&m);
  std::stable_sort(order.begin(), order.end(), [](auto* x, auto* y) { return x->alpha > y->alpha; });

  std::vector<InviscidRow> rows;
  for (const auto& [name, f] : observables) {
    InviscidRow row;
    row.observable = name;
    for (auto* m : order) row.alphas.push_back(m->alpha);
    for (std::size_t j = 0; j + 1 < order.size(); ++j) {
      row.distances.push_back(ks_two_sample(collect(*order[j], f), collect(*order[j + 1], f)));
    }
    row.cauchy_decreasing = true;
    for (std::size_t j = 0; j + 1 < row.distances.size(); ++j) {
      if (!(row.distances[j + 1].statistic < row.distances[j].statistic)) row.cauchy_decreasing = false;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

L2Histogram l2_histogram(const EmpiricalMeasure& mu, std::size_t bins) {
  if (mu.samples.size() < 200) throw InsufficientData("L2 histogram needs at least 200 samples");
  if (bins < 1) throw InvalidArgument("histogram needs at least one bin");
  const auto values = collect(mu, observables::l2_norm());
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;

  auto fill = [&](std::size_t nb) {
    std::vector<std::size_t> counts(nb, 0);
    const double width = (hi - lo) / static_cast<double>(nb);
    for (double v : values) {
      std::size_t k = width > 0.0 ? static_cast<std::size_t>((v - lo) / width) : 0;
      counts[std::min(k, nb - 1)]++;
    }
    return counts;
  };

  L2Histogram h;
  h.counts = fill(bins);
  for (std::size_t k = 0; k <= bins; ++k) h.edges.push_back(lo + (hi - lo) * static_cast<double>(k) / bins);
  const auto fine = bins >= 50 ? h.counts : fill(50);
  h.max_bin_fraction =
      static_cast<double>(*std::max_element(fine.begin(), fine.end())) / static_cast<double>(values.size());
  h.atom = h.max_bin_fraction > 0.2;
  return h;
}

}  // namespace nlslab
