#pragma once

#include <memory>
#include <vector>

#include "nlslab/lattice.hpp"
#include "nlslab/transform.hpp"

namespace nlslab {

// L_s u = (-Lap)^{s-1} u + C ||u||_{H^{s-eta}}^{3 k} u.
struct DissipationParams {
  double s = 2.0;
  double k_tilde = 2.0;
  double c_ds = 1.0;  // zero leaves only the linear part
  double eta = 0.1;
  int q = 1;  // nonlinearity exponent of the Hamiltonian part

  void validate() const;
  double s_minus() const { return s - eta; }
};

// ||u||_{H^{s-eta}}^{3 k}; throws Overflow when not representable.
double damping_norm(const SpectralField& u, const DissipationParams& p);

SpectralField apply_dissipation(const SpectralField& u, const DissipationParams& p);

// The rates below use homogeneous seminorms for the Sobolev pieces so that
// they equal the pairings (u, L_s u) and (-Lap u + |u|^{2q} u, L_s u) exactly.

// (u, L_s u) = |u|_{s-1}^2 + C rho ||u||^2.
double mass_rate(const SpectralField& u, const DissipationParams& p);

// |u|_s^2 + C rho (||u||_{L^{2q+2}}^{2q+2} + |u|_1^2) + <(-Lap)^{s-1} u, |u|^{2q} u>.
double energy_rate(const SpectralField& u, const DissipationParams& p, int points = 0);

// Coercive functional: 1/2 |u|_s^2 + C rho ||u||_{L^{2q+2}}^{2q+2} + C/2 rho ||u||^2.
double coercive_rate(const SpectralField& u, const DissipationParams& p, int points = 0);

// Grid-bound evaluator for the rates; one instance per thread.
class RateEvaluator {
 public:
  RateEvaluator(std::shared_ptr<const Lattice> lattice, DissipationParams params, int points = 0);

  struct Rates {
    double mass_rate = 0.0;
    double energy_rate = 0.0;
    double coercive_rate = 0.0;
    double lebesgue_2q = 0.0;   // ||u||_{L^{2q}}^{2q}
    double lebesgue_2q2 = 0.0;  // ||u||_{L^{2q+2}}^{2q+2}
  };

  Rates evaluate(const SpectralField& u);
  const DissipationParams& params() const { return params_; }
  int points() const { return grid_.points(); }

 private:
  DissipationParams params_;
  GridTransform grid_;
  std::vector<Complex> values_;
  SpectralField scratch_;
};

struct CordobaTerms {
  double lhs = 0.0;  // <|f|^{2q} f, (-Lap)^gamma f>
  double rhs = 0.0;  // 1/(q+1) ||(-Lap)^{gamma/2} |f|^{q+1}||^2
  double gap() const { return lhs - rhs; }
};

// Default grid is the larger of factor-4 padding and the exact-product size.
int cordoba_points(const Lattice& lattice, double q);
CordobaTerms cordoba_terms(const SpectralField& f, double gamma, double q, int points = 0);
double cordoba_gap(const SpectralField& f, double gamma, double q, int points = 0);

struct CoercivityReport {
  double K = 0.0;              // smallest K with E0 <= E + K on the corpus
  double beta = 0.0;           // Young exponent from 3k = (4q+2-2 beta)/beta
  long violations = 0;         // fields breaking a numeric step of the chain
  bool supercritical_regime = false;  // s > 2, where the fitted-K route is the one in use
  std::size_t fields = 0;
};

CoercivityReport coercivity_gap(const std::vector<SpectralField>& corpus, const DissipationParams& p, int points = 0);

}  // namespace nlslab
