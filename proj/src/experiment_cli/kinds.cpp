#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "internal.hpp"
#include "nlslab/ensemble.hpp"
#include "nlslab/measure.hpp"
#include "nlslab/norms.hpp"
#include "nlslab/parallel.hpp"

namespace nlslab::detail {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

CheckRow row(std::string check, std::string tag, double target, double estimate, double se, bool pass,
             std::string note = {}) {
  CheckRow r;
  r.check = std::move(check);
  r.tag = std::move(tag);
  r.target = target;
  r.estimate = estimate;
  r.se = se;
  r.pass = pass;
  r.note = std::move(note);
  return r;
}

CheckRow soft(CheckRow r) {
  r.soft = true;
  return r;
}

std::string cell_label(double alpha, double cutoff) { return "alpha=" + num(alpha) + ",cutoff=" + num(cutoff); }

// ---- flow ------------------------------------------------------------------

ItemResult run_flow(const ExperimentConfig& c) {
  ItemResult item;
  item.id = "flow";
  const SpectralField u0 = initial_datum(c);
  const bool plane = c.initial == "plane_wave";
  ObserverSpec obs;
  obs.every = c.every;
  obs.sobolev_orders = c.sobolev_orders;
  obs.keep_fields = plane;
  const Trajectory tr = flow(u0, c.T, flow_config(c), obs);

  Table& t = item.tables["flow"];
  t.header = {"tag", "t", "mass", "energy"};
  for (double s : c.sobolev_orders) t.header.push_back("H^" + num(s));
  const double m0 = tr.mass.front();
  const double e0 = tr.energy.front();
  double mass_drift = 0.0;
  double energy_drift = 0.0;
  for (std::size_t n = 0; n < tr.times.size(); ++n) {
    std::vector<std::string> r = {"conservation", num(tr.times[n]), num(tr.mass[n]), num(tr.energy[n])};
    for (double h : tr.hs_norms[n]) r.push_back(num(h));
    t.rows.push_back(std::move(r));
    mass_drift = std::max(mass_drift, std::abs(tr.mass[n] - m0) / (m0 > 0.0 ? m0 : 1.0));
    energy_drift = std::max(energy_drift, std::abs(tr.energy[n] - e0) / (std::abs(e0) > 0.0 ? std::abs(e0) : 1.0));
  }
  item.checks.push_back(row("mass_drift", "conservation", 1e-8, mass_drift, kNaN, mass_drift < 1e-8,
                            "relative; absolute when the mass is zero"));
  item.checks.push_back(soft(row("energy_drift", "conservation", 1e-4, energy_drift, kNaN, energy_drift < 1e-4,
                                 "splitting error, not conserved exactly")));

  if (plane) {
    const Lattice& lat = u0.lattice();
    const std::size_t idx = *lat.index_of({c.initial_mode, 0, 0});
    const double omega = lat.eigenvalue(idx) + std::pow(c.initial_amplitude, 2.0 * c.q);
    Table& pw = item.tables["plane_wave_error"];
    pw.header = {"tag", "t", "error"};
    double worst = 0.0;
    for (std::size_t n = 0; n < tr.times.size(); ++n) {
      SpectralField exact = std::polar(1.0, -omega * tr.times[n]) * u0;
      const double err = sobolev_norm(tr.fields[n] - exact, 0.0);
      worst = std::max(worst, err);
      pw.rows.push_back({"plane_wave", num(tr.times[n]), num(err)});
    }
    item.checks.push_back(row("plane_wave_error", "plane_wave", 1e-8, worst, kNaN, worst < 1e-8, "L^2 error"));
  }
  return item;
}

// ---- sde -------------------------------------------------------------------

ItemResult run_sde(const ExperimentConfig& c, int workers) {
  ItemResult item;
  item.id = "sde";
  const SpectralField u0 = initial_datum(c);
  const auto& lat = u0.lattice_ptr();
  const SdeConfig cfg = sde_config(c, c.alpha);
  const NoiseProfile noise = noise_profile(c, *lat);
  SdeObservers obs;
  obs.every = c.every;
  obs.rates = true;
  obs.sobolev_orders = c.sobolev_orders;
  const auto paths = sample_paths(u0, c.T, cfg, noise, c.seed, static_cast<std::size_t>(c.paths), obs, workers);
  const auto mass = ito_mass_residual(paths, cfg, noise, *lat);
  const auto energy = ito_energy_check(paths, cfg, noise, *lat);

  Table& tm = item.tables["ito_mass"];
  tm.header = {"tag", "t", "residual", "se", "z", "bias", "bias_se"};
  for (std::size_t n = 0; n < mass.residual.size(); ++n) {
    const auto& r = mass.residual[n];
    const double z = r.se > 0.0 ? r.value / r.se : 0.0;
    tm.rows.push_back({"estimate1", num(r.time), num(r.value), num(r.se), num(z), num(mass.bias[n].value),
                       num(mass.bias[n].se)});
  }
  Table& te = item.tables["ito_energy"];
  te.header = {"tag", "t", "margin", "margin_se", "margin_torus", "margin_torus_se", "residual", "residual_se"};
  for (std::size_t n = 0; n < energy.margin.size(); ++n) {
    te.rows.push_back({"estimate2", num(energy.margin[n].time), num(energy.margin[n].value),
                       num(energy.margin[n].se), num(energy.margin_torus[n].value), num(energy.margin_torus[n].se),
                       num(energy.residual[n].value), num(energy.residual[n].se)});
  }
  Table& tp = item.tables["paths"];
  tp.header = {"tag", "path", "t", "mass", "energy"};
  for (std::size_t p = 0; p < paths.size(); ++p) {
    for (std::size_t n = 0; n < paths[p].times.size(); ++n) {
      tp.rows.push_back({"estimate1", std::to_string(p), num(paths[p].times[n]), num(paths[p].mass[n]),
                         num(paths[p].energy[n])});
    }
  }
  item.checks.push_back(row("estimate1_mass_identity", "estimate1", 3.0, mass.max_abs_z, kNaN, mass.pass,
                            "max |residual| / SE over record times"));
  item.checks.push_back(row("estimate2_energy_inequality", "estimate2", 3.0, energy.max_margin_z, kNaN, energy.pass,
                            "max margin z; exact-identity max |z| " + num(energy.max_residual_z)));
  return item;
}

// ---- kb and inviscid ---------------------------------------------------------

struct Cell {
  double alpha;
  double cutoff;
  std::size_t index;
};

std::vector<Cell> kb_cells(const ExperimentConfig& c) {
  std::vector<Cell> cells;
  for (double a : c.alphas()) {
    for (double L : c.cutoffs()) cells.push_back({a, L, cells.size()});
  }
  return cells;
}

EmpiricalMeasure sample_cell(const ExperimentConfig& c, const Cell& cell) {
  auto lat = make_lattice(c, cell.cutoff);
  RandomStream rng = RandomStream::derive(c.seed, kCellStream + cell.index);
  KbOptions opts;
  opts.sobolev_orders = c.sobolev_orders;
  return kb_sample(lat, sde_config(c, cell.alpha), noise_profile(c, *lat), c.horizon, c.burn_in, c.thin, rng, opts);
}

void identity_rows(const ExperimentConfig& c, const Cell& cell, const EmpiricalMeasure& mu, ItemResult& item) {
  auto lat = make_lattice(c, cell.cutoff);
  const auto ident = check_stationary_identity(mu, noise_profile(c, *lat), *lat);
  const auto label = cell_label(cell.alpha, cell.cutoff);
  Table& t = item.tables["kb"];
  t.header = {"tag", "alpha", "cutoff", "modes", "observable", "estimate", "se", "target", "z", "pass"};
  t.rows.push_back({"estimate3", num(cell.alpha), num(cell.cutoff), std::to_string(mu.modes), "mass_rate",
                    num(ident.estimate), num(ident.se), num(ident.target), num(ident.z), ident.pass ? "1" : "0"});
  item.checks.push_back(row("estimate3_stationary[" + label + "]", "estimate3", ident.target, ident.estimate,
                            ident.se, ident.pass, "z " + num(ident.z)));
  const auto st = stationarity_check(mu, observables::mass());
  item.checks.push_back(soft(row("stationarity[" + label + "]", "estimate3", 0.0, st.estimate, st.se, st.pass,
                                 "mass mean difference between halves, z " + num(st.z))));
}

ItemResult run_kb_cell(const ExperimentConfig& c, const Cell& cell) {
  ItemResult item;
  item.id = "cell" + std::to_string(cell.index);
  const auto mu = sample_cell(c, cell);
  const auto label = cell_label(cell.alpha, cell.cutoff);
  identity_rows(c, cell, mu, item);

  const auto e0 = moment(mu, observables::coercive_rate());
  Table& t = item.tables["kb"];
  t.rows.push_back({"estimate4", num(cell.alpha), num(cell.cutoff), std::to_string(mu.modes), "coercive_rate",
                    num(e0.mean), num(e0.se), "nan", "nan", "nan"});
  item.payload["e0"] = {{"mean", e0.mean}, {"se", e0.se}, {"samples", e0.samples}, {"batches", e0.batches}};
  if (e0.warning) {
    item.checks.push_back(soft(row("batch_correlation[" + label + "]", "estimate4", 0.5, e0.mean, e0.se, false,
                                   "lag-1 correlation of batch means above 0.5")));
  }

  const auto tail = tail_moment(mu, c.R_list);
  Table& tt = item.tables["tail"];
  tt.header = {"tag", "alpha", "cutoff", "R", "value"};
  for (std::size_t n = 0; n < tail.radii.size(); ++n) {
    tt.rows.push_back({"estimate5", num(cell.alpha), num(cell.cutoff), num(tail.radii[n]), num(tail.values[n])});
  }
  auto tail_row = row("estimate5_tail[" + label + "]", "estimate5", -1.0, tail.slope, kNaN, tail.pass,
                      "slope tolerance 0.3");
  if (tail.resolution_floor) {
    tail_row.pass = false;
    tail_row.note = "resolution floor: fewer than 3 nonzero tail values";
    tail_row = soft(tail_row);
  }
  item.checks.push_back(tail_row);

  const auto hist = l2_histogram(mu, static_cast<std::size_t>(c.bins));
  Table& th = item.tables["l2_histogram"];
  th.header = {"tag", "alpha", "cutoff", "lo", "hi", "count"};
  for (std::size_t n = 0; n < hist.counts.size(); ++n) {
    th.rows.push_back({"estimate3", num(cell.alpha), num(cell.cutoff), num(hist.edges[n]), num(hist.edges[n + 1]),
                       std::to_string(hist.counts[n])});
  }
  item.checks.push_back(soft(row("l2_atom[" + label + "]", "estimate3", 0.2, hist.max_bin_fraction, kNaN, !hist.atom,
                                 "largest bin fraction of ||u||_{L^2}")));
  return item;
}

ItemResult run_inviscid_cell(const ExperimentConfig& c, const Cell& cell) {
  ItemResult item;
  item.id = "alpha" + std::to_string(cell.index);
  const auto mu = sample_cell(c, cell);
  identity_rows(c, cell, mu, item);
  std::vector<double> mass, energy;
  for (const auto& r : mu.samples) {
    mass.push_back(r.mass);
    energy.push_back(r.energy);
  }
  item.payload = {{"alpha", cell.alpha}, {"modes", mu.modes}, {"mass", mass}, {"energy", energy}};
  return item;
}

// ---- ensemble ----------------------------------------------------------------

ItemResult run_ensemble(const ExperimentConfig& c, int workers) {
  ItemResult item;
  item.id = "ensemble";
  auto lat = make_lattice(c, c.cutoff);
  RandomStream rng = RandomStream::derive(c.seed, kCorpusStream);
  KbOptions opts;
  opts.keep_fields = true;
  const double horizon = c.burn_in + c.thin * c.corpus;
  auto mu = kb_sample(lat, sde_config(c, c.alpha), noise_profile(c, *lat), horizon, c.burn_in, c.thin, rng, opts);
  if (mu.fields.size() < static_cast<std::size_t>(c.corpus)) {
    throw InsufficientData("ensemble corpus came out with " + std::to_string(mu.fields.size()) + " samples");
  }
  mu.fields.erase(mu.fields.begin() + c.corpus, mu.fields.end());

  EnsembleSpec spec;
  spec.s_prime = c.s_prime;
  spec.k_tilde = c.k_tilde;
  spec.j_max = c.j_max;
  const FlowConfig fc = flow_config(c);
  const auto levels = c.levels();
  const auto records = ensemble_levels(mu.fields, spec, levels, fc, workers);

  Table& t = item.tables["complement"];
  t.header = {"tag", "a_floor", "i", "samples", "failures", "fraction", "bound"};
  std::vector<double> slopes;
  bool any_floor = false;
  for (double a : c.a_floors()) {
    const auto table = complement_table(records, levels, a, c.k_tilde);
    for (const auto& r : table.rows) {
      t.rows.push_back({"complement", num(a), std::to_string(r.i), std::to_string(r.samples),
                        std::to_string(r.failures), num(r.fraction), num(r.bound)});
    }
    auto check = row("complement_slope[a=" + num(a) + "]", "complement", -2.0 * c.k_tilde + 1.0, table.slope, kNaN,
                     table.pass, table.monotone ? "nonincreasing in i" : "not monotone in i");
    if (table.resolution_limited) check.note += "; checkpoints below the step, every step checked";
    if (table.resolution_floor) {
      check.pass = false;
      check.note = "resolution floor: fewer than two unsaturated levels";
      check = soft(check);
      any_floor = true;
    }
    item.checks.push_back(check);
    slopes.push_back(table.slope);
  }
  if (slopes.size() >= 2) {
    const auto [lo, hi] = std::minmax_element(slopes.begin(), slopes.end());
    auto check = row("complement_a_sweep", "complement", 0.5, *hi - *lo, kNaN, *hi - *lo < 0.5,
                     "slope spread over the a-floor sweep");
    if (any_floor) check = soft(check);
    item.checks.push_back(check);
  }

  const std::size_t g = static_cast<std::size_t>(c.growth_samples);
  const std::vector<SpectralField> calibration(mu.fields.begin(), mu.fields.begin() + g / 2);
  spec.c_env = calibrate_envelope(calibration, spec, fc, workers);
  const double orbit_T = std::max(spec.horizon(spec.j_max), c.envelope_T);
  struct Growth {
    int level = 0;
    double max_ratio = 0.0;
    bool pass = true;
  };
  std::vector<Growth> out(g - g / 2);
  parallel_for(out.size(), workers, [&](std::size_t n) {
    const auto orbit = trace_orbit(mu.fields[g / 2 + n], spec.s_prime, orbit_T, fc, spec.step_budget);
    out[n].level = member_level(orbit, spec, levels, c.q);
    if (out[n].level == 0) return;
    const auto env = growth_envelope(orbit, spec, out[n].level, c.envelope_T);
    out[n].max_ratio = env.max_ratio;
    out[n].pass = env.pass;
  });
  Table& tg = item.tables["growth"];
  tg.header = {"tag", "sample", "level", "c_env", "max_ratio", "pass"};
  std::size_t members = 0;
  std::size_t violations = 0;
  for (std::size_t n = 0; n < out.size(); ++n) {
    if (out[n].level == 0) continue;
    ++members;
    if (!out[n].pass) ++violations;
    tg.rows.push_back({"growth", std::to_string(g / 2 + n), std::to_string(out[n].level), num(spec.c_env),
                       num(out[n].max_ratio), out[n].pass ? "1" : "0"});
  }
  auto check = row("growth_envelope", "growth", 0.0, static_cast<double>(violations), kNaN, violations == 0,
                   std::to_string(members) + " verified members, C_env " + num(spec.c_env));
  if (members == 0) {
    check.pass = false;
    check.note = "no verified member among the held-out samples";
    check = soft(check);
  }
  item.checks.push_back(check);
  return item;
}

// ---- verify ------------------------------------------------------------------

ItemResult from_suite(std::string id, SuiteResult r) {
  ItemResult item;
  item.tables["verify_" + id] = std::move(r.table);
  item.checks = std::move(r.checks);
  item.id = std::move(id);
  return item;
}

}  // namespace

json stream_layout() {
  return {{"derive", "RandomStream::derive(seed, key): splitmix64 counter stream keyed by mix(seed) ^ mix(key + c)"},
          {"sde_path", "key = path index"},
          {"kb_cell", "key = 2^32 + cell index (alpha-major over alpha_list x cutoff_list)"},
          {"ensemble_corpus", "key = 2^33"},
          {"verify_suite", "key = 2^34 + suite index (flow 0, dissipation 1, gap 2)"},
          {"initial_datum", "key = 2^40"}};
}

std::vector<WorkItem> plan(const ExperimentConfig& c) {
  std::vector<WorkItem> items;
  switch (c.kind) {
    case ExperimentKind::flow:
      items.push_back({"flow", [c](int) { return run_flow(c); }});
      break;
    case ExperimentKind::sde:
      items.push_back({"sde", [c](int w) { return run_sde(c, w); }});
      break;
    case ExperimentKind::kb:
      for (const auto& cell : kb_cells(c)) {
        items.push_back({"cell" + std::to_string(cell.index), [c, cell](int) { return run_kb_cell(c, cell); }});
      }
      break;
    case ExperimentKind::inviscid:
      for (const auto& cell : kb_cells(c)) {
        items.push_back(
            {"alpha" + std::to_string(cell.index), [c, cell](int) { return run_inviscid_cell(c, cell); }});
      }
      break;
    case ExperimentKind::ensemble:
      items.push_back({"ensemble", [c](int w) { return run_ensemble(c, w); }});
      break;
    case ExperimentKind::verify:
      if (c.suite == "flow" || c.suite == "all") {
        items.push_back({"flow", [c](int) { return from_suite("flow", verify_flow(c)); }});
      }
      if (c.suite == "dissipation" || c.suite == "all") {
        items.push_back({"dissipation", [c](int w) { return from_suite("dissipation", verify_dissipation(c, w)); }});
      }
      if (c.suite == "gap" || c.suite == "all") {
        items.push_back({"gap", [c](int) { return from_suite("gap", verify_gap(c)); }});
      }
      break;
  }
  return items;
}

void cross_checks(const ExperimentConfig& c, const std::vector<ItemResult>& items, std::map<std::string, Table>& tables,
                  std::vector<CheckRow>& checks) {
  if (c.kind == ExperimentKind::kb && items.size() >= 2) {
    std::vector<Estimate> e0;
    for (const auto& it : items) {
      Estimate e;
      e.mean = it.payload.at("e0").at("mean").get<double>();
      e.se = it.payload.at("e0").at("se").get<double>();
      e0.push_back(e);
    }
    const auto fam = check_energy_moment(e0);
    checks.push_back(row("estimate4_bounded_family", "estimate4", 2.0, fam.median > 0.0 ? fam.max / fam.median : kNaN,
                         kNaN, fam.pass, "max / median of the coercive-rate moments over the grid"));
  }
  if (c.kind == ExperimentKind::inviscid) {
    std::vector<EmpiricalMeasure> measures;
    for (const auto& it : items) {
      EmpiricalMeasure mu;
      mu.alpha = it.payload.at("alpha").get<double>();
      mu.modes = it.payload.at("modes").get<std::size_t>();
      const auto mass = it.payload.at("mass").get<std::vector<double>>();
      const auto energy = it.payload.at("energy").get<std::vector<double>>();
      for (std::size_t n = 0; n < mass.size(); ++n) {
        KbRecord r;
        r.mass = mass[n];
        r.energy = energy[n];
        mu.samples.push_back(r);
      }
      measures.push_back(std::move(mu));
    }
    const auto rows = inviscid_compare(measures, {{"mass", observables::mass()},
                                                  {"energy", observables::energy()},
                                                  {"l2_norm", observables::l2_norm()}});
    Table& t = tables["inviscid"];
    t.header = {"tag", "observable", "alpha_from", "alpha_to", "ks_statistic", "p_value"};
    for (const auto& r : rows) {
      for (std::size_t n = 0; n < r.distances.size(); ++n) {
        t.rows.push_back({"estimate7", r.observable, num(r.alphas[n]), num(r.alphas[n + 1]),
                          num(r.distances[n].statistic), num(r.distances[n].p_value)});
      }
      const double last = r.distances.empty() ? kNaN : r.distances.back().statistic;
      checks.push_back(soft(row("estimate7_cauchy[" + r.observable + "]", "estimate7", 0.0, last, kNaN,
                                r.cauchy_decreasing, "KS distances between consecutive alphas decrease")));
    }
  }
}

std::shared_ptr<const Lattice> make_lattice(const ExperimentConfig& c, double cutoff) {
  return Lattice::make(c.d, cutoff);
}

FlowConfig flow_config(const ExperimentConfig& c) {
  FlowConfig fc;
  fc.q = c.q;
  fc.dt = c.dt;
  fc.dealias_factor = c.dealias_factor;
  fc.scheme = c.scheme == "lie" ? SplittingScheme::lie : SplittingScheme::strang;
  return fc;
}

DissipationParams dissipation_params(const ExperimentConfig& c) {
  DissipationParams p;
  p.s = c.s;
  p.k_tilde = c.k_tilde;
  p.c_ds = c.c_ds;
  p.eta = c.eta;
  p.q = c.q;
  return p;
}

SdeConfig sde_config(const ExperimentConfig& c, double alpha) {
  SdeConfig cfg;
  cfg.alpha = alpha;
  cfg.dt = c.dt;
  cfg.q = c.q;
  cfg.dealias_factor = c.dealias_factor;
  cfg.scheme = c.scheme == "lie" ? SplittingScheme::lie : SplittingScheme::strang;
  cfg.dissipation = dissipation_params(c);
  return cfg;
}

NoiseProfile noise_profile(const ExperimentConfig& c, const Lattice& lattice) {
  return NoiseProfile::power_law(lattice, c.noise_decay, c.noise_amplitude, c.force_mean_mode);
}

}  // namespace nlslab::detail

namespace nlslab {

SpectralField initial_datum(const ExperimentConfig& c) {
  auto lat = detail::make_lattice(c, c.cutoff);
  SpectralField u(lat);
  if (c.initial == "plane_wave") {
    const auto idx = lat->index_of({c.initial_mode, 0, 0});
    if (!idx) throw InvalidArgument("initial_mode lies outside the lattice");
    u[*idx] = c.initial_amplitude * std::pow(2.0 * std::numbers::pi, 0.5 * c.d);
  } else if (c.initial == "gaussian") {
    RandomStream rng = RandomStream::derive(c.seed, detail::kInitialStream);
    u = gaussian_field(lat, rng, c.initial_decay, c.initial_amplitude);
  }
  return u;
}

}  // namespace nlslab
