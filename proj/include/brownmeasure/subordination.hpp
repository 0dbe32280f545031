#pragma once

#include <complex>
#include <span>
#include <vector>

#include "brownmeasure/spectral_model.hpp"

namespace brown {

/// Variance above the diagonal (alpha), below it (beta), and the
/// pseudo-covariance gamma of a triangular elliptic operator. alpha == beta == t
/// is the twisted elliptic case, and gamma == 0 on top of that is circular.
class EllipticParams {
 public:
  /// Throws InvalidArgument unless alpha, beta > 0 and |gamma| <= sqrt(alpha beta) + 1e-12.
  EllipticParams(double alpha, double beta, complex gamma = {});
  static EllipticParams circular(double t, complex gamma = {}) { return {t, t, gamma}; }

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  complex gamma() const noexcept { return gamma_; }
  bool is_elliptic() const noexcept { return alpha_ == beta_; }

  /// Logarithmic mean (alpha - beta) / (log alpha - log beta); alpha when equal.
  double t_eff() const noexcept { return t_eff_; }
  /// 1 / t_eff, evaluated without cancellation as log1p(.)/(alpha - beta).
  double inv_t_eff() const noexcept { return inv_t_eff_; }

  EllipticParams with_gamma(complex gamma) const { return {alpha_, beta_, gamma}; }

 private:
  double alpha_;
  double beta_;
  complex gamma_;
  double t_eff_;
  double inv_t_eff_;
};

struct W0Solution {
  double w = 0.0;
  bool in_domain = false;
};

struct SigmaSolution {
  double sigma = 0.0;  // (alpha - beta) D
  double D = 0.0;
  double eps0 = 0.0;
};

struct EpsilonProfiles {
  std::vector<double> eps1;
  std::vector<double> eps2;
};

/// Solved scalar subordination data at (lambda, eps). Elliptic parameters fill
/// w; triangular ones fill sigma, D and eps0 (eps0 = s(lambda) when eps = 0).
struct SubordinationState {
  complex lambda;
  double eps = 0.0;
  double w = 0.0;
  double sigma = 0.0;
  double D = 0.0;
  double eps0 = 0.0;
  bool in_domain = false;
};

// Each solver has a model-level entry point and one on a prepared
// LocalSpectrum, which callers evaluating many quantities at the same lambda
// use to avoid repeating the per-point factorization.

/// The unique w in (eps, (eps + sqrt(eps^2 + 4t)) / 2] with
/// w = eps + t w phi(h^-1(lambda, w)).
double solve_w_reg(const SpectralModel& model, complex lambda, double t, double eps);
double solve_w_reg(const LocalSpectrum& ls, double t, double eps);

/// w(0; lambda, t): phi(h^-1(lambda, w)) = 1/t inside Xi_t, and (0, false)
/// outside. The boundary phi(|lambda - x0|^-2) == 1/t counts as outside.
W0Solution solve_w0(const SpectralModel& model, complex lambda, double t);
W0Solution solve_w0(const LocalSpectrum& ls, double t);

/// phi(|lambda - x0|^-2) > 1 / t_eff, with +inf (an atom at lambda) inside.
bool in_xi(const SpectralModel& model, complex lambda, const EllipticParams& params);
bool in_xi(const LocalSpectrum& ls, const EllipticParams& params);

/// s(lambda) = w(0; lambda, t_eff).
double solve_s(const SpectralModel& model, complex lambda, const EllipticParams& params);
double solve_s(const LocalSpectrum& ls, const EllipticParams& params);

/// The (sigma, D, eps0) system for alpha != beta and eps > 0:
///   D = phi(h^-1(lambda, eps0)),
///   eps0^2 = eps^2 (alpha - beta)^2 e^sigma / (alpha - beta e^sigma)^2,  sigma = (alpha - beta) D,
/// with 0 < D < (log alpha - log beta) / (alpha - beta).
SigmaSolution solve_sigma_system(const SpectralModel& model, complex lambda, double alpha, double beta,
                                 double eps);
SigmaSolution solve_sigma_system(const LocalSpectrum& ls, double alpha, double beta, double eps);

/// eps1(t), eps2(t) on [0, 1] for a solved sigma system.
EpsilonProfiles epsilon_profiles(const SigmaSolution& sol, double eps, double alpha, double beta,
                                 std::span<const double> grid);

/// q = eps (e^{(alpha - beta) D} - 1) / (alpha - beta e^{(alpha - beta) D}).
double q_eps(double D, double eps, double alpha, double beta);

/// eps0 as a function of D for the sigma system, and its derivative d eps0 / dD.
double sigma_eps0(double D, double eps, double alpha, double beta);
double sigma_eps0_derivative(double D, double eps, double alpha, double beta);

/// Dispatches to the elliptic or triangular solvers.
SubordinationState solve_state(const SpectralModel& model, complex lambda, const EllipticParams& params, double eps);
SubordinationState solve_state(const LocalSpectrum& ls, complex lambda, const EllipticParams& params, double eps);

}  // namespace brown
