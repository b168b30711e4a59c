#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nlslab/lattice.hpp"
#include "nlslab/noise.hpp"
#include "nlslab/rng.hpp"
#include "nlslab/sde.hpp"

namespace nlslab {

// Observables of one thinned sample of a long path.
struct KbRecord {
  double time = 0.0;
  double mass = 0.0;           // M = 1/2 ||u||^2
  double energy = 0.0;         // E
  double mass_rate = 0.0;      // (u, L_s u)
  double energy_rate = 0.0;    // (dE, L_s u)
  double coercive_rate = 0.0;  // lower bound functional E_0
  std::vector<double> hs_norms;

  double l2_squared() const { return 2.0 * mass; }
};

// Time-average (Krylov-Bogoliubov) empirical measure of one path from u = 0.
struct EmpiricalMeasure {
  double burn_in = 0.0;
  double thin = 0.0;
  double alpha = 0.0;
  std::size_t modes = 0;
  std::vector<double> sobolev_orders;
  std::vector<KbRecord> samples;
  std::vector<SpectralField> fields;  // only when requested
};

struct KbOptions {
  std::vector<double> sobolev_orders;
  bool keep_fields = false;
};

EmpiricalMeasure kb_sample(const std::shared_ptr<const Lattice>& lattice, const SdeConfig& config,
                           const NoiseProfile& noise, double horizon, double burn_in, double thin, RandomStream& rng,
                           const KbOptions& options = {});

using Observable = std::function<double(const KbRecord&)>;

namespace observables {
Observable mass();
Observable energy();
Observable mass_rate();
Observable energy_rate();
Observable coercive_rate();
Observable l2_norm();
Observable sobolev(std::size_t order_index);
}  // namespace observables

struct Estimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t samples = 0;
  std::size_t batches = 0;
  // Batch means still correlated at lag one, so the SE is likely too small.
  bool warning = false;
};

// Batch-means estimate with 20 batches; needs at least 20 samples.
Estimate moment(const EmpiricalMeasure& mu, const Observable& f);
Estimate batch_means(const std::vector<double>& values, std::size_t batches = 20);

struct IdentityReport {
  double estimate = 0.0;
  double se = 0.0;
  double target = 0.0;
  double z = 0.0;
  bool pass = false;
};

// Stationary mass balance: the mean dissipation rate equals A^0 / 2.
IdentityReport check_stationary_identity(const EmpiricalMeasure& mu, const NoiseProfile& noise,
                                         const Lattice& lattice);

// Two disjoint halves of the sample; passes when the means agree at level 0.01.
IdentityReport stationarity_check(const EmpiricalMeasure& mu, const Observable& f);

struct BoundedFamilyReport {
  std::vector<double> estimates;
  double median = 0.0;
  double max = 0.0;
  bool pass = false;  // max <= 2 median
};

BoundedFamilyReport check_energy_moment(const std::vector<Estimate>& estimates);

// Smooth cutoff: 1 on [0, 1], 0 on [2, inf), built from exp(-1/x) gluing.
struct CutoffSpec {
  double operator()(double x) const;
  double at_radius(double x, double R) const { return (*this)(x / R); }
};

struct TailCurve {
  std::vector<double> radii;
  std::vector<double> values;  // mean of M_rate (1 - chi_R(||u||^2))
  double slope = 0.0;          // least-squares log-log slope over the nonzero values
  bool resolution_floor = false;
  bool pass = false;           // slope <= -0.7 or resolution floor
};

// Empty radii select 8 geometric radii from the median to the maximum of ||u||^2.
TailCurve tail_moment(const EmpiricalMeasure& mu, std::vector<double> radii = {}, const CutoffSpec& cutoff = {});

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov with the asymptotic Kolmogorov p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct InviscidRow {
  std::string observable;
  std::vector<double> alphas;     // decreasing
  std::vector<KsResult> distances;  // between consecutive alphas
  bool cauchy_decreasing = false;
};

std::vector<InviscidRow> inviscid_compare(const std::vector<EmpiricalMeasure>& measures,
                                          const std::vector<std::pair<std::string, Observable>>& observables);

struct L2Histogram {
  std::vector<double> edges;  // bins + 1
  std::vector<std::size_t> counts;
  double max_bin_fraction = 0.0;  // on at least 50 bins
  bool atom = false;              // max_bin_fraction > 0.2
};

L2Histogram l2_histogram(const EmpiricalMeasure& mu, std::size_t bins = 50);

}  // namespace nlslab
