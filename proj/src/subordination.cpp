#include "brownmeasure/subordination.hpp"

#include <cmath>
#include <limits>

#include "brownmeasure/error.hpp"
#include "brownmeasure/root_finding.hpp"

namespace brown {

namespace {

constexpr double kResidualTolerance = 1e-12;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(what) + " must be finite and > 0");
}

// (log alpha - log beta) / (alpha - beta), the supremum of D.
double d_max(double alpha, double beta) { return std::log1p((alpha - beta) / beta) / (alpha - beta); }

// alpha - beta e^sigma written through u = Dmax - D, where it equals alpha (1 - e^{-kappa u}).
double sigma_denominator(double u, double alpha, double beta) { return -alpha * std::expm1(-(alpha - beta) * u); }

double eps0_of_u(double u, double eps, double alpha, double beta) {
  const double kappa = alpha - beta;
  const double D = d_max(alpha, beta) - u;
  return eps * kappa * std::exp(0.5 * kappa * D) / sigma_denominator(u, alpha, beta);
}

W0Solution solve_w0_threshold(const LocalSpectrum& ls, double t, double inv_t) {
  const double h0 = ls.h_inv_at_zero();
  if (!(h0 > inv_t)) return {0.0, false};

  // t h_inv(w) - 1 decreases from t h0 - 1 > 0 to a non-positive value at sqrt(t).
  auto f = [&](double w) { return t * ls.h_inv(w) - 1.0; };
  double hi = std::sqrt(t);
  double f_hi = f(hi);
  if (f_hi >= 0.0) return {hi, true};  // all mass at lambda
  double lo = hi;
  double f_lo = f_hi;
  for (int k = 0; f_lo <= 0.0; ++k) {
    if (k > 400 || lo == 0.0) throw NumericalFailure("no lower bracket for w(0)", lo, hi);
    hi = lo;
    f_hi = f_lo;
    lo *= 0.125;
    f_lo = f(lo);
  }
  RootOptions opt;
  opt.abs_floor = 0.0;
  const RootResult r = find_root_bracketed(f, lo, hi, f_lo, f_hi, opt);
  if (std::abs(f(r.root)) > kResidualTolerance) {
    throw NumericalFailure("w(0) residual above tolerance", r.lo, r.hi);
  }
  return {r.root, true};
}

}  // namespace

EllipticParams::EllipticParams(double alpha, double beta, complex gamma) : alpha_(alpha), beta_(beta), gamma_(gamma) {
  require_positive(alpha, "alpha");
  require_positive(beta, "beta");
  if (!std::isfinite(gamma.real()) || !std::isfinite(gamma.imag())) throw InvalidArgument("gamma must be finite");
  if (std::abs(gamma) > std::sqrt(alpha * beta) + 1e-12) {
    throw InvalidArgument("|gamma| must not exceed sqrt(alpha beta)");
  }
  if (alpha == beta) {
    t_eff_ = alpha;
    inv_t_eff_ = 1.0 / alpha;
  } else {
    inv_t_eff_ = d_max(alpha, beta);
    t_eff_ = 1.0 / inv_t_eff_;
  }
}

double solve_w_reg(const LocalSpectrum& ls, double t, double eps) {
  require_positive(t, "t");
  require_positive(eps, "epsilon");
  // 1 - eps/w - t h_inv(w) is increasing; negative at w = eps, and
  // non-negative at the upper end because h_inv(w) <= 1/w^2 there.
  auto g = [&](double w) { return 1.0 - eps / w - t * ls.h_inv(w); };
  const double lo = eps;
  const double hi = 0.5 * (eps + std::sqrt(eps * eps + 4.0 * t));
  const double g_lo = -t * ls.h_inv(eps);
  double g_hi = g(hi);
  if (g_hi < 0.0 && g_hi > -1e-14) g_hi = 0.0;
  const RootResult r = find_root_bracketed(g, lo, hi, g_lo, g_hi);
  const double w = r.root;
  const double residual = w - eps - t * w * ls.h_inv(w);
  if (std::abs(residual) > kResidualTolerance * std::max(1.0, w)) {
    throw NumericalFailure("w(eps) residual above tolerance", r.lo, r.hi);
  }
  return w;
}

double solve_w_reg(const SpectralModel& model, complex lambda, double t, double eps) {
  return with_lambda(lambda, [&] { return solve_w_reg(model.at(lambda), t, eps); });
}

W0Solution solve_w0(const LocalSpectrum& ls, double t) {
  require_positive(t, "t");
  return solve_w0_threshold(ls, t, 1.0 / t);
}

W0Solution solve_w0(const SpectralModel& model, complex lambda, double t) {
  return with_lambda(lambda, [&] { return solve_w0(model.at(lambda), t); });
}

bool in_xi(const LocalSpectrum& ls, const EllipticParams& params) {
  return ls.h_inv_at_zero() > params.inv_t_eff();
}

bool in_xi(const SpectralModel& model, complex lambda, const EllipticParams& params) {
  return in_xi(model.at(lambda), params);
}

double solve_s(const LocalSpectrum& ls, const EllipticParams& params) {
  return solve_w0_threshold(ls, params.t_eff(), params.inv_t_eff()).w;
}

double solve_s(const SpectralModel& model, complex lambda, const EllipticParams& params) {
  return with_lambda(lambda, [&] { return solve_s(model.at(lambda), params); });
}

SigmaSolution solve_sigma_system(const LocalSpectrum& ls, double alpha, double beta, double eps) {
  require_positive(alpha, "alpha");
  require_positive(beta, "beta");
  require_positive(eps, "epsilon");
  if (alpha == beta) throw InvalidArgument("sigma system requires alpha != beta");

  // Unknown u = Dmax - D in (0, Dmax). eps0 falls from +inf to eps as u grows,
  // so D - h_inv(eps0(u)) decreases from Dmax to -h_inv(eps).
  const double dmax = d_max(alpha, beta);
  auto g = [&](double u) { return (dmax - u) - ls.h_inv(eps0_of_u(u, eps, alpha, beta)); };
  RootOptions opt;
  opt.abs_floor = 0.0;
  const RootResult r = find_root_bracketed(g, 0.0, dmax, dmax, -ls.h_inv(eps), opt);

  SigmaSolution sol;
  const double u = r.root;
  sol.D = dmax - u;
  sol.sigma = (alpha - beta) * sol.D;
  sol.eps0 = eps0_of_u(u, eps, alpha, beta);
  if (!(u > 0.0) || !std::isfinite(sol.eps0)) {
    throw NumericalFailure("sigma system root at the pole", r.lo, r.hi);
  }
  if (std::abs(sol.D - ls.h_inv(sol.eps0)) > kResidualTolerance * std::max(1.0, sol.D)) {
    throw NumericalFailure("sigma system residual above tolerance", r.lo, r.hi);
  }
  return sol;
}

SigmaSolution solve_sigma_system(const SpectralModel& model, complex lambda, double alpha, double beta,
                                 double eps) {
  return with_lambda(lambda, [&] { return solve_sigma_system(model.at(lambda), alpha, beta, eps); });
}

EpsilonProfiles epsilon_profiles(const SigmaSolution& sol, double eps, double alpha, double beta,
                                 std::span<const double> grid) {
  if (alpha == beta) throw InvalidArgument("epsilon profiles require alpha != beta");
  const double sigma = (alpha - beta) * sol.D;
  const double c = eps * (alpha - beta) / sigma_denominator(d_max(alpha, beta) - sol.D, alpha, beta);
  EpsilonProfiles out;
  out.eps1.reserve(grid.size());
  out.eps2.reserve(grid.size());
  for (const double t : grid) {
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("profile grid points must lie in [0, 1]");
    out.eps1.push_back(c * std::exp((1.0 - t) * sigma));
    out.eps2.push_back(c * std::exp(t * sigma));
  }
  return out;
}

double q_eps(double D, double eps, double alpha, double beta) {
  if (alpha == beta) return eps * D / (1.0 - alpha * D);
  const double u = d_max(alpha, beta) - D;
  return eps * std::expm1((alpha - beta) * D) / sigma_denominator(u, alpha, beta);
}

double sigma_eps0(double D, double eps, double alpha, double beta) {
  if (alpha == beta) throw InvalidArgument("sigma system requires alpha != beta");
  return eps0_of_u(d_max(alpha, beta) - D, eps, alpha, beta);
}

double sigma_eps0_derivative(double D, double eps, double alpha, double beta) {
  const double kappa = alpha - beta;
  const double e = std::exp(kappa * D);
  const double denom = sigma_denominator(d_max(alpha, beta) - D, alpha, beta);
  return sigma_eps0(D, eps, alpha, beta) * kappa * (alpha + beta * e) / (2.0 * denom);
}

SubordinationState solve_state(const LocalSpectrum& ls, complex lambda, const EllipticParams& params, double eps) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw InvalidArgument("epsilon must be finite and >= 0");
  SubordinationState st;
  st.lambda = lambda;
  st.eps = eps;
  st.in_domain = in_xi(ls, params);
  const double alpha = params.alpha();
  const double beta = params.beta();

  if (params.is_elliptic()) {
    st.w = eps > 0.0 ? solve_w_reg(ls, alpha, eps) : solve_w0(ls, alpha).w;
    st.eps0 = st.w;
    st.D = eps > 0.0 ? ls.h_inv(st.w) : (st.in_domain ? params.inv_t_eff() : ls.h_inv_at_zero());
    return st;
  }

  if (eps > 0.0) {
    const SigmaSolution sol = solve_sigma_system(ls, alpha, beta, eps);
    st.sigma = sol.sigma;
    st.D = sol.D;
    st.eps0 = sol.eps0;
  } else {
    st.eps0 = solve_s(ls, params);
    st.D = st.in_domain ? params.inv_t_eff() : ls.h_inv_at_zero();
    st.sigma = (alpha - beta) * st.D;
  }
  return st;
}

SubordinationState solve_state(const SpectralModel& model, complex lambda, const EllipticParams& params, double eps) {
  return with_lambda(lambda, [&] { return solve_state(model.at(lambda), lambda, params, eps); });
}

}  // namespace brown
