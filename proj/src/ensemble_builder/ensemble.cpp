#include "nlslab/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlslab/errors.hpp"
#include "nlslab/norms.hpp"
#include "nlslab/parallel.hpp"

namespace nlslab {

namespace {

constexpr double kTimeSlack = 1e-12;

long long last_index_within(const OrbitTrace& orbit, double t) {
  const long long n = static_cast<long long>(std::floor(t / orbit.h * (1.0 + kTimeSlack) + kTimeSlack));
  return std::min<long long>(n, static_cast<long long>(orbit.norms.size()) - 1);
}

}  // namespace

void EnsembleSpec::validate(int dimension, int q, double s_max) const {
  const double critical = 0.5 * dimension - 1.0 / q;
  if (!(s_prime > critical && s_prime <= s_max)) {
    throw InvalidArgument("s' must lie in (" + std::to_string(critical) + ", " + std::to_string(s_max) + "]");
  }
  if (!(a_floor > 0.0)) throw InvalidArgument("a-floor must be positive");
  if (!(k_tilde > 0.0)) throw InvalidArgument("k~ must be positive");
  if (j_max < 1) throw InvalidArgument("j_max must be at least 1");
  if (!(c_env > 0.0)) throw InvalidArgument("envelope constant must be positive");
  if (step_budget < 1) throw InvalidArgument("step budget must be positive");
  lwp.gamma(q);
}

double EnsembleSpec::checkpoint_spacing(int i, int j, int q) const {
  return increment_time(static_cast<double>(i) * j, lwp, q);
}

OrbitTrace trace_orbit(const SpectralField& u0, double s_prime, double horizon, const FlowConfig& config,
                       long long step_budget) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("orbit horizon must be positive");
  const long long n = std::max<long long>(1, static_cast<long long>(std::ceil(horizon / config.dt - 1e-9)));
  if (n > step_budget) throw BudgetExceeded("orbit needs more steps than the budget allows", n);
  OrbitTrace orbit;
  orbit.h = horizon / static_cast<double>(n);
  orbit.norms.reserve(static_cast<std::size_t>(n) + 1);
  NlsPropagator prop(u0.lattice_ptr(), config);
  SpectralField u = u0;
  orbit.norms.push_back(sobolev_norm(u, s_prime));
  for (long long k = 0; k < n; ++k) {
    prop.step(u, orbit.h);
    orbit.norms.push_back(sobolev_norm(u, s_prime));
  }
  return orbit;
}

Membership member_sigma_ij(const OrbitTrace& orbit, const EnsembleSpec& spec, int i, int j, int q) {
  if (i < 1 || j < 1) throw InvalidArgument("levels i and j must be positive");
  const double H = spec.horizon(j);
  if (H > orbit.horizon() * (1.0 + kTimeSlack)) throw InvalidArgument("orbit is shorter than the j horizon");
  const double T0 = spec.checkpoint_spacing(i, j, q);
  const double bound = static_cast<double>(i) * j;
  Membership m;
  m.binding_j = j;
  auto check = [&](long long l, long long idx) {
    if (orbit.norms[idx] > bound) {
      m.member = false;
      m.violating_l = l;
      m.violating_norm = orbit.norms[idx];
      m.violating_time = static_cast<double>(idx) * orbit.h;
      return false;
    }
    return true;
  };
  const long long last = last_index_within(orbit, H);
  if (T0 <= orbit.h) {
    m.resolution_limited = T0 < orbit.h;
    for (long long n = 0; n <= last; ++n) {
      if (!check(n, n)) break;
    }
  } else {
    const long long L = static_cast<long long>(std::floor(H / T0 * (1.0 + kTimeSlack)));
    for (long long l = 0; l <= L; ++l) {
      const long long idx = std::min(last, std::llround(static_cast<double>(l) * T0 / orbit.h));
      if (!check(l, idx)) break;
    }
  }
  return m;
}

Membership member_sigma_ij(const SpectralField& u0, const EnsembleSpec& spec, int i, int j, const FlowConfig& config) {
  return member_sigma_ij(trace_orbit(u0, spec.s_prime, spec.horizon(j), config, spec.step_budget), spec, i, j,
                         config.q);
}

Membership member_sigma_i(const OrbitTrace& orbit, const EnsembleSpec& spec, int i, int q) {
  Membership best;
  double least_slack = std::numeric_limits<double>::infinity();
  bool limited = false;
  for (int j = 1; j <= spec.j_max; ++j) {
    Membership m = member_sigma_ij(orbit, spec, i, j, q);
    limited = limited || m.resolution_limited;
    if (!m.member) {
      m.resolution_limited = limited;
      return m;
    }
    const long long last = last_index_within(orbit, spec.horizon(j));
    const double peak = *std::max_element(orbit.norms.begin(), orbit.norms.begin() + last + 1);
    const double slack = 1.0 - peak / (static_cast<double>(i) * j);
    if (slack < least_slack) {
      least_slack = slack;
      best = m;
    }
  }
  best.resolution_limited = limited;
  return best;
}

Membership member_sigma_i(const SpectralField& u0, const EnsembleSpec& spec, int i, const FlowConfig& config) {
  return member_sigma_i(trace_orbit(u0, spec.s_prime, spec.horizon(spec.j_max), config, spec.step_budget), spec, i,
                        config.q);
}

std::vector<LevelRecord> ensemble_levels(const std::vector<SpectralField>& samples, const EnsembleSpec& spec,
                                         const std::vector<int>& levels, const FlowConfig& config, int workers) {
  std::vector<LevelRecord> out(samples.size());
  parallel_for(samples.size(), workers, [&](std::size_t k) {
    const auto orbit = trace_orbit(samples[k], spec.s_prime, spec.horizon(spec.j_max), config, spec.step_budget);
    LevelRecord& rec = out[k];
    rec.l2_norm = sobolev_norm(samples[k], 0.0);
    for (int i : levels) {
      const Membership m = member_sigma_i(orbit, spec, i, config.q);
      rec.fails.push_back(!m.member);
      rec.resolution_limited = rec.resolution_limited || m.resolution_limited;
    }
  });
  return out;
}

ComplementTable complement_table(const std::vector<LevelRecord>& records, const std::vector<int>& levels,
                                 double a_floor, double k_tilde) {
  std::vector<const LevelRecord*> kept;
  for (const auto& r : records) {
    if (r.l2_norm > a_floor) kept.push_back(&r);
  }
  if (kept.size() < 50) throw InsufficientData("complement measure needs at least 50 samples above the a-floor");

  ComplementTable table;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    ComplementRow row;
    row.i = levels[k];
    row.samples = kept.size();
    for (const auto* r : kept) {
      row.failures += r->fails.at(k) ? 1 : 0;
      table.resolution_limited = table.resolution_limited || r->resolution_limited;
    }
    row.fraction = static_cast<double>(row.failures) / static_cast<double>(row.samples);
    table.rows.push_back(row);
  }
  for (std::size_t k = 1; k < table.rows.size(); ++k) {
    if (table.rows[k].i > table.rows[k - 1].i && table.rows[k].fraction > table.rows[k - 1].fraction) {
      table.monotone = false;
    }
  }

  std::vector<double> lx, ly;
  double c = 0.0;
  for (const auto& row : table.rows) {
    if (row.fraction > 0.0 && row.fraction < 1.0) {
      if (lx.empty()) c = row.fraction * std::pow(row.i, 2.0 * k_tilde);
      lx.push_back(std::log(static_cast<double>(row.i)));
      ly.push_back(std::log(row.fraction));
    }
  }
  for (auto& row : table.rows) row.bound = c * std::pow(row.i, -2.0 * k_tilde);
  if (lx.size() < 2) {
    table.resolution_floor = true;
  } else {
    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
      mx += lx[k] / n;
      my += ly[k] / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
      sxy += (lx[k] - mx) * (ly[k] - my);
      sxx += (lx[k] - mx) * (lx[k] - mx);
    }
    table.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  table.pass = table.monotone && (table.resolution_floor || table.slope <= -2.0 * k_tilde + 1.0);
  return table;
}

ComplementTable complement_measure(const std::vector<SpectralField>& samples, const EnsembleSpec& spec,
                                   const std::vector<int>& levels, const FlowConfig& config, int workers) {
  return complement_table(ensemble_levels(samples, spec, levels, config, workers), levels, spec.a_floor, spec.k_tilde);
}

int member_level(const OrbitTrace& orbit, const EnsembleSpec& spec, const std::vector<int>& levels, int q) {
  std::vector<int> sorted = levels;
  std::sort(sorted.begin(), sorted.end());
  for (int i : sorted) {
    if (member_sigma_i(orbit, spec, i, q).member) return i;
  }
  return 0;
}

EnvelopeReport growth_envelope(const OrbitTrace& orbit, const EnsembleSpec& spec, int i, double T, int records) {
  if (T > orbit.horizon() * (1.0 + kTimeSlack)) throw InvalidArgument("orbit is shorter than the envelope horizon");
  if (i < 1) throw InvalidArgument("level must be positive");
  EnvelopeReport rep;
  const long long last = last_index_within(orbit, T);
  const long long stride = std::max<long long>(1, last / std::max(1, records));
  for (long long n = 0; n <= last; ++n) {
    const double t = static_cast<double>(n) * orbit.h;
    const double ratio = orbit.norms[n] / (spec.c_env * i * std::pow(1.0 + t, 1.0 / spec.k_tilde));
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    if (n % stride == 0 || n == last) {
      rep.times.push_back(t);
      rep.ratios.push_back(ratio);
    }
  }
  rep.pass = rep.max_ratio <= 1.0;
  return rep;
}

EnvelopeReport growth_envelope(const SpectralField& u0, const EnsembleSpec& spec, int i, double T,
                               const FlowConfig& config, int records) {
  return growth_envelope(trace_orbit(u0, spec.s_prime, T, config, spec.step_budget), spec, i, T, records);
}

double calibrate_envelope(const std::vector<SpectralField>& corpus, const EnsembleSpec& spec, const FlowConfig& config,
                          int workers) {
  std::vector<double> ratios(corpus.size(), 0.0);
  parallel_for(corpus.size(), workers, [&](std::size_t k) {
    ratios[k] = increment_check(corpus[k], spec.s_prime, spec.lwp, config).sup_ratio;
  });
  double c0 = 1.0;
  for (double r : ratios) c0 = std::max(c0, r);
  return 2.0 * c0;
}

LimitProbe ensemble_limit_probe(const SpectralField& u0, const EnsembleSpec& spec, int i,
                                const std::vector<double>& cutoffs, const FlowConfig& config) {
  if (cutoffs.empty()) throw InvalidArgument("limit probe needs at least one cutoff");
  LimitProbe probe;
  probe.cutoffs = cutoffs;
  std::sort(probe.cutoffs.begin(), probe.cutoffs.end());
  if (probe.cutoffs.back() > u0.lattice().cutoff()) {
    throw InvalidArgument("largest cutoff exceeds the lattice of the datum");
  }
  const int d = u0.lattice().dimension();
  for (double cut : probe.cutoffs) {
    const SpectralField v = transfer(u0, Lattice::make(d, cut));
    probe.member.push_back(member_sigma_i(v, spec, i, config).member);
  }
  probe.stable_from = probe.member.size() - 1;
  while (probe.stable_from > 0 && probe.member[probe.stable_from - 1] == probe.member.back()) --probe.stable_from;
  return probe;
}

}  // namespace nlslab
