#pragma once

#include <vector>

#include "nlslab/flow.hpp"
#include "nlslab/lattice.hpp"

namespace nlslab {

// Ball sets B^{i,j} = {||u||_{H^{s'}} <= i j} checked along the deterministic
// Galerkin orbit at the checkpoints l T0(i, j), l = 0 .. floor(j^k / T0).
struct EnsembleSpec {
  double s_prime = 1.0;
  double a_floor = 1e-3;  // samples with ||u||_{L^2} <= a are outside E^a
  double k_tilde = 2.0;
  int j_max = 8;
  LwpParams lwp;  // T0(i, j) = increment_time(i j)
  double c_env = 2.0;
  long long step_budget = 50'000'000;  // per orbit

  // s' above the scaling-critical index d/2 - 1/q and at most s_max.
  void validate(int dimension, int q, double s_max) const;
  double checkpoint_spacing(int i, int j, int q) const;
  double horizon(int j) const { return std::pow(static_cast<double>(j), k_tilde); }
};

// H^{s'} norms of the orbit on the step grid t_n = n h, n = 0 .. steps.
struct OrbitTrace {
  double h = 0.0;
  std::vector<double> norms;

  double horizon() const { return h * static_cast<double>(norms.size() - 1); }
};

// Throws BudgetExceeded when the horizon needs more steps than the budget.
OrbitTrace trace_orbit(const SpectralField& u0, double s_prime, double horizon, const FlowConfig& config,
                       long long step_budget);

struct Membership {
  bool member = true;
  int binding_j = 0;         // first violating j, or the j with the least slack
  long long violating_l = -1;  // checkpoint index of the first violation
  double violating_norm = 0.0;
  double violating_time = 0.0;
  // The checkpoint spacing fell below the step, so every step was checked.
  bool resolution_limited = false;
};

Membership member_sigma_ij(const OrbitTrace& orbit, const EnsembleSpec& spec, int i, int j, int q);
Membership member_sigma_ij(const SpectralField& u0, const EnsembleSpec& spec, int i, int j, const FlowConfig& config);
Membership member_sigma_i(const OrbitTrace& orbit, const EnsembleSpec& spec, int i, int q);
Membership member_sigma_i(const SpectralField& u0, const EnsembleSpec& spec, int i, const FlowConfig& config);

// Per-sample outcome for a list of levels, computed from one orbit.
struct LevelRecord {
  double l2_norm = 0.0;
  std::vector<bool> fails;  // parallel to the level list
  bool resolution_limited = false;
};

std::vector<LevelRecord> ensemble_levels(const std::vector<SpectralField>& samples, const EnsembleSpec& spec,
                                         const std::vector<int>& levels, const FlowConfig& config, int workers = 1);

struct ComplementRow {
  int i = 0;
  std::size_t samples = 0;
  std::size_t failures = 0;
  double fraction = 0.0;
  double bound = 0.0;  // C i^{-2k} with C fitted at the first unsaturated level
};

struct ComplementTable {
  std::vector<ComplementRow> rows;
  double slope = 0.0;  // log-log fit over levels with 0 < fraction < 1
  bool monotone = true;
  bool resolution_floor = false;  // fewer than two fitted levels
  bool resolution_limited = false;
  bool pass = false;  // monotone and (slope <= -2k + 1 or resolution floor)
};

// Needs at least 50 samples above the a-floor.
ComplementTable complement_table(const std::vector<LevelRecord>& records, const std::vector<int>& levels,
                                 double a_floor, double k_tilde);
ComplementTable complement_measure(const std::vector<SpectralField>& samples, const EnsembleSpec& spec,
                                   const std::vector<int>& levels, const FlowConfig& config, int workers = 1);

// Smallest level in `levels` at which u0 is a member, or 0.
int member_level(const OrbitTrace& orbit, const EnsembleSpec& spec, const std::vector<int>& levels, int q);

struct EnvelopeReport {
  std::vector<double> times;
  std::vector<double> ratios;  // ||phi^t u0|| / (C_env i (1 + t)^{1/k})
  double max_ratio = 0.0;
  bool pass = true;
};

EnvelopeReport growth_envelope(const SpectralField& u0, const EnsembleSpec& spec, int i, double T,
                               const FlowConfig& config, int records = 64);
EnvelopeReport growth_envelope(const OrbitTrace& orbit, const EnsembleSpec& spec, int i, double T, int records = 64);

// C_env = 2 max(1, c0_hat) with c0_hat the largest increment sup-ratio on the corpus.
double calibrate_envelope(const std::vector<SpectralField>& corpus, const EnsembleSpec& spec, const FlowConfig& config,
                          int workers = 1);

struct LimitProbe {
  std::vector<double> cutoffs;
  std::vector<bool> member;
  std::size_t stable_from = 0;  // membership is constant on cutoffs[stable_from..]
};

LimitProbe ensemble_limit_probe(const SpectralField& u0, const EnsembleSpec& spec, int i,
                                const std::vector<double>& cutoffs, const FlowConfig& config);

}  // namespace nlslab
