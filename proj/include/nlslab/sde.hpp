#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "nlslab/dissipation.hpp"
#include "nlslab/flow.hpp"
#include "nlslab/noise.hpp"
#include "nlslab/rng.hpp"

namespace nlslab {

// du = [i(Lap u - P_N |u|^{2q} u) - alpha L_s u] dt + sqrt(alpha) sum a_k e_k dB_k,
// with complex Brownian B_k whose real and imaginary parts have variance t/2.
struct SdeConfig {
  double alpha = 0.1;
  double dt = 1e-3;
  int q = 1;
  int dealias_factor = 0;
  SplittingScheme scheme = SplittingScheme::strang;
  DissipationParams dissipation;  // its q is overwritten by the q above
  bool hamiltonian = true;        // false drops the |u|^{2q} u term

  void validate() const;
  FlowConfig flow_config() const;
  DissipationParams dissipation_params() const;
};

// One Strang step of length h is
//   D(h/2) -> OU(h/2) -> N(h) -> OU(h/2) -> D(h/2),
// where OU is the exact transition of dz = (-i lambda - alpha lambda^{s-1}) z dt
// + sqrt(alpha) a dB per mode, N is the Hamiltonian nonlinear flow and D is the
// exact flow of du/dt = -alpha C rho(u) u. The Lie variant is N(h) -> OU(h) -> D(h).
// With alpha = 0 and a = 0 the step equals NlsPropagator::step bit for bit.
//
// Holds grid scratch; one instance per thread.
class SdePropagator {
 public:
  SdePropagator(std::shared_ptr<const Lattice> lattice, SdeConfig config, NoiseProfile noise);

  const SdeConfig& config() const { return config_; }
  const NoiseProfile& noise() const { return noise_; }
  const Lattice& lattice() const { return flow_.lattice(); }
  NlsPropagator& hamiltonian() { return flow_; }

  // Returns sum_k Re(conj(z_k) xi_k) + (|xi_k|^2 - Var xi_k) / 2, where z is
  // the state the noise xi is added to. It has zero conditional mean and is the
  // martingale part of the mass increment.
  double ou_step(SpectralField& u, double h, RandomStream& rng);
  void damping_step(SpectralField& u, double h);
  // Returns the summed martingale increments of the two OU halves.
  double step(SpectralField& u, double h, RandomStream& rng);

 private:
  SdeConfig config_;
  NoiseProfile noise_;
  NlsPropagator flow_;
  DissipationParams damping_;
  std::vector<double> beta_;  // alpha lambda^{s-1}, zero on the constant mode
};

struct SdeObservers {
  double every = 0.0;  // record cadence; 0 records the endpoints only
  bool rates = false;  // integrate the dissipation rates every step (trapezoid)
  bool keep_fields = false;
  std::vector<double> sobolev_orders;
};

struct SdePath {
  std::vector<double> times;
  std::vector<double> mass;
  std::vector<double> energy;
  // Cumulative integrals from 0 to each record time; filled when rates are on.
  std::vector<double> int_mass_rate;
  std::vector<double> int_energy_rate;
  std::vector<double> int_lebesgue_2q;
  std::vector<double> mass_martingale;
  std::vector<std::vector<double>> hs_norms;
  std::vector<SpectralField> fields;
  std::optional<SpectralField> final_state;
};

SpectralField sde_step(const SpectralField& u, const SdeConfig& config, const NoiseProfile& noise, RandomStream& rng);

SdePath sample_path(SdePropagator& prop, const SpectralField& u0, double T, RandomStream& rng,
                    const SdeObservers& observers);

// Paths 0..n-1 with streams RandomStream::derive(seed, path).
std::vector<SdePath> sample_paths(const SpectralField& u0, double T, const SdeConfig& config,
                                  const NoiseProfile& noise, std::uint64_t seed, std::size_t paths,
                                  const SdeObservers& observers, int workers = 1);

struct MonteCarloPoint {
  double time = 0.0;
  double value = 0.0;  // ensemble mean
  double se = 0.0;     // standard error of the mean
};

struct ItoMassReport {
  // rho(t) = E M(t) + alpha int E M_rate - M(u0) - alpha A^0 t / 2.
  std::vector<MonteCarloPoint> residual;
  // Same mean with the martingale part subtracted path by path: estimates the
  // discretization bias with a much smaller standard error.
  std::vector<MonteCarloPoint> bias;
  double max_abs_z = 0.0;
  bool pass = false;
};

struct ItoEnergyReport {
  // LHS - RHS of the inequality with the eigenfunction bound A^{(d-1)/2}.
  std::vector<MonteCarloPoint> margin;
  // Same with sum a_k^2 ||e_k||_inf^2 = A^0 (2 pi)^{-d}; can exceed zero since
  // the exact second variation carries a factor q + 1.
  std::vector<MonteCarloPoint> margin_torus;
  // Exact identity with (q + 1) A^0 (2 pi)^{-d}; mean zero up to bias.
  std::vector<MonteCarloPoint> residual;
  double max_margin_z = 0.0;
  double max_residual_z = 0.0;
  bool pass = false;
};

ItoMassReport ito_mass_residual(const std::vector<SdePath>& paths, const SdeConfig& config, const NoiseProfile& noise,
                                const Lattice& lattice);
ItoEnergyReport ito_energy_check(const std::vector<SdePath>& paths, const SdeConfig& config,
                                 const NoiseProfile& noise, const Lattice& lattice);

}  // namespace nlslab
