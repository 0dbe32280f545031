#include "brownmeasure/brown_measure.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "brownmeasure/error.hpp"
#include "brownmeasure/parallel.hpp"

namespace brown {

namespace {

// (1/pi)(|cross|^2 / (h_inv_sq + extra) + s^2 hk_inv) at regularizer s.
double density_formula(const LocalSpectrum& ls, double s, double extra) {
  const TraceBundle b = ls.traces(s);
  return (std::norm(b.cross) / (b.h_inv_sq + extra) + s * s * b.hk_inv) / std::numbers::pi;
}

}  // namespace

double density_circ(const LocalSpectrum& ls, double t) {
  const W0Solution w0 = solve_w0(ls, t);
  if (!w0.in_domain) return 0.0;
  return density_formula(ls, w0.w, 0.0);
}

double density_circ(const SpectralModel& model, complex lambda, double t) {
  return with_lambda(lambda, [&] { return density_circ(model.at(lambda), t); });
}

double density_circ_reg(const LocalSpectrum& ls, double t, double eps) {
  const double w = solve_w_reg(ls, t, eps);
  return density_formula(ls, w, eps / (2.0 * t * w * w * w));
}

double density_circ_reg(const SpectralModel& model, complex lambda, double t, double eps) {
  return with_lambda(lambda, [&] { return density_circ_reg(model.at(lambda), t, eps); });
}

double density_tri(const LocalSpectrum& ls, double alpha, double beta) {
  const EllipticParams params(alpha, beta);
  if (!in_xi(ls, params)) return 0.0;
  return density_formula(ls, solve_s(ls, params), 0.0);
}

double density_tri(const SpectralModel& model, complex lambda, double alpha, double beta) {
  return with_lambda(lambda, [&] { return density_tri(model.at(lambda), alpha, beta); });
}

double density_tri_reg(const LocalSpectrum& ls, double alpha, double beta, double eps) {
  if (alpha == beta) return density_circ_reg(ls, alpha, eps);
  const SigmaSolution sol = solve_sigma_system(ls, alpha, beta, eps);
  const double e_prime = sigma_eps0_derivative(sol.D, eps, alpha, beta);
  return density_formula(ls, sol.eps0, 1.0 / (2.0 * sol.eps0 * e_prime));
}

double density_tri_reg(const SpectralModel& model, complex lambda, double alpha, double beta, double eps) {
  return with_lambda(lambda, [&] { return density_tri_reg(model.at(lambda), alpha, beta, eps); });
}

double density(const LocalSpectrum& ls, const EllipticParams& params, double eps) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw InvalidArgument("epsilon must be finite and >= 0");
  if (params.is_elliptic()) {
    return eps > 0.0 ? density_circ_reg(ls, params.alpha(), eps) : density_circ(ls, params.alpha());
  }
  return eps > 0.0 ? density_tri_reg(ls, params.alpha(), params.beta(), eps)
                   : density_tri(ls, params.alpha(), params.beta());
}

double density(const SpectralModel& model, complex lambda, const EllipticParams& params, double eps) {
  return with_lambda(lambda, [&] { return density(model.at(lambda), params, eps); });
}

FkDeterminant fk_determinant(const LocalSpectrum& ls, double t) {
  const W0Solution w0 = solve_w0(ls, t);
  FkDeterminant out;
  if (w0.in_domain) {
    out.log_value = 0.5 * (ls.log_det_h(w0.w) - w0.w * w0.w / t);
  } else {
    if (ls.on_atom()) {
      out.degenerate = true;
      out.log_value = -std::numeric_limits<double>::infinity();
      return out;
    }
    out.log_value = 0.5 * ls.log_det_h(0.0);
  }
  out.value = std::exp(out.log_value);
  return out;
}

FkDeterminant fk_determinant(const SpectralModel& model, complex lambda, double t) {
  return with_lambda(lambda, [&] { return fk_determinant(model.at(lambda), t); });
}

DensityGrid fill_grid(const SpectralModel& model, const EllipticParams& params, double eps, const GridBounds& bounds,
                      std::size_t nx, std::size_t ny, unsigned threads) {
  if (nx < 2 || ny < 2) throw InvalidArgument("grid needs at least 2 cells per axis");
  DensityGrid grid(bounds, nx, ny);
  grid.params = params;
  grid.epsilon = eps;
  parallel_for(ny, threads, [&](std::size_t j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const complex lambda = grid.center(i, j);
      try {
        grid.at(i, j) = density(model.at(lambda), params, eps);
      } catch (const NumericalFailure& e) {
        throw NumericalFailure(std::string(e.what()) + " in cell (" + std::to_string(i) + "," + std::to_string(j) +
                               ")")
            .at(lambda);
      }
    }
  });
  grid.update_mass();
  return grid;
}

}  // namespace brown
