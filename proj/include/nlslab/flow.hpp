#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "nlslab/lattice.hpp"
#include "nlslab/transform.hpp"

namespace nlslab {

enum class SplittingScheme { strang, lie };

// exp((-beta - i lambda) h). With beta = 0 this is the pure linear phase bit for bit.
inline Complex damped_phase(double lambda, double beta, double h) {
  return std::polar(std::exp(-beta * h), -lambda * h);
}

struct FlowConfig {
  int q = 1;         // nonlinearity |u|^{2q} u
  double dt = 1e-3;  // nondimensional step
  SplittingScheme scheme = SplittingScheme::strang;
  int dealias_factor = 0;  // 0 selects ceil((2q+2)/2)

  void validate() const;
};

// Galerkin NLS  du/dt = i (Lap u - P_N(|u|^{2q} u))  on one lattice.
//
// Splitting: the linear flow is the exact diagonal phase exp(-i lambda h).
// The nonlinear flow du/dt = -i P_N(|u|^{2q} u) is advanced by two-stage
// Gauss-Legendre collocation on the dealiased grid. Collocation conserves the
// L^2 norm exactly, is symmetric, and reproduces plane waves to round-off.
//
// Holds grid scratch; one instance per thread.
class NlsPropagator {
 public:
  NlsPropagator(std::shared_ptr<const Lattice> lattice, FlowConfig config);

  const FlowConfig& config() const { return config_; }
  const Lattice& lattice() const { return *lattice_; }
  const std::shared_ptr<const Lattice>& lattice_ptr() const { return lattice_; }
  GridTransform& grid() { return grid_; }

  // out <- P_N(|u|^{2q} u).
  void nonlinear_term(std::span<const Complex> u, std::span<Complex> out);
  SpectralField nonlinear_term(const SpectralField& u);

  void linear_substep(SpectralField& u, double h) const;
  void nonlinear_substep(SpectralField& u, double h);
  void step(SpectralField& u, double h);

  // (1/(2q+2)) * ||u||_{L^{2q+2}}^{2q+2}, exact on the dealiased grid.
  double potential(const SpectralField& u);
  double energy(const SpectralField& u);

 private:
  std::shared_ptr<const Lattice> lattice_;
  FlowConfig config_;
  GridTransform grid_;
  std::vector<Complex> k1_, k2_, n1_, n2_, stage_;

  bool collocation(std::vector<Complex>& u, double h);
  void nonlinear_recursive(std::vector<Complex>& u, double h, int depth);
};

struct ObserverSpec {
  double every = 0.0;  // record cadence in time units; 0 records the endpoints only
  std::vector<double> sobolev_orders;
  bool keep_fields = false;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> mass;
  std::vector<double> energy;
  std::vector<std::vector<double>> hs_norms;  // [record][order]
  std::vector<SpectralField> fields;
  std::optional<SpectralField> final_state;
};

double mass(const SpectralField& u);
double energy(const SpectralField& u, int q, int points = 0);

SpectralField nonlinear_term(const SpectralField& u, int q, int dealias_factor = 0);
SpectralField step(const SpectralField& u, const FlowConfig& config);

// Flow to time T. The step is shrunk to T/ceil(|T|/dt) so the final time is T.
// Negative T uses phi^{-t}(u) = conj(phi^t(conj u)).
Trajectory flow(const SpectralField& u0, double T, const FlowConfig& config, const ObserverSpec& observers = {});
Trajectory flow(NlsPropagator& prop, const SpectralField& u0, double T, const ObserverSpec& observers = {});

// Visit the orbit on the step grid; the visitor returns false to stop early.
// Returns the number of steps taken.
long long integrate(NlsPropagator& prop, SpectralField& u, double T,
                    const std::function<bool(long long step, double t, const SpectralField& u)>& visit);

// Local well-posedness constants. gamma = 1 - 2q/r must lie in (0, 1).
struct LwpParams {
  double r = 0.0;   // 0 selects r = 4q
  double c0 = 1.0;  // increment constant

  double resolved_r(int q) const { return r > 0.0 ? r : 4.0 * q; }
  double gamma(int q) const;
  // Spatial exponent of the admissible pair 2/r = d(1/2 - 1/p); may be infinite.
  double space_exponent(int q, int dimension) const;
};

// Largest T with T^gamma <= 1 / (2^{2q+2} R^{2q} c0^{2q+1}).
double increment_time(double R, const LwpParams& lwp, int q);

struct IncrementReport {
  double radius = 0.0;      // ||u0||_{H^s}
  double time = 0.0;        // increment_time(radius)
  double sup_ratio = 1.0;   // sup_t ||phi^t u0||_{H^s} / ||u0||_{H^s}
  double y_ratio = 1.0;     // (sup H^s + L^r_t W^{s - 1/r, p}) / ||u0||_{H^s}
  bool violated = false;    // sup_ratio > 2 c0
};

IncrementReport increment_check(const SpectralField& u0, double s, const LwpParams& lwp, const FlowConfig& config);

struct GapCurve {
  std::vector<double> times;
  std::vector<double> gaps;
  double sup() const;
};

// || phi_fine P_fine u0 - phi_coarse P_coarse u0 ||_{H^{s'}} sampled on `records`
// equally spaced times in [0, T]. The fine lattice must not exceed the lattice of u0.
GapCurve galerkin_gap(const SpectralField& u0, double coarse_cutoff, double fine_cutoff, double s_prime, double T,
                      const FlowConfig& config, int records = 8);

}  // namespace nlslab
