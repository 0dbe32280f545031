#pragma once

#include "brownmeasure/density_grid.hpp"
#include "brownmeasure/spectral_model.hpp"
#include "brownmeasure/subordination.hpp"

namespace brown {

/// Brown density of x0 + c_t; zero outside Xi_t.
double density_circ(const SpectralModel& model, complex lambda, double t);
double density_circ(const LocalSpectrum& ls, double t);

/// Regularized density of x0 + c_t at eps > 0, evaluated at w(eps; lambda, t).
double density_circ_reg(const SpectralModel& model, complex lambda, double t, double eps);
double density_circ_reg(const LocalSpectrum& ls, double t, double eps);

/// Brown density of x0 + g_{alpha beta, 0} (alpha != beta) at s(lambda); zero outside Xi.
double density_tri(const SpectralModel& model, complex lambda, double alpha, double beta);
double density_tri(const LocalSpectrum& ls, double alpha, double beta);

/// Regularized density of x0 + g_{alpha beta, 0} at eps > 0: (1/pi) dbar of
/// p0 at the solved eps0, with d eps0 / d lambda-bar eliminated through the
/// sigma system. Reduces to density_circ_reg when alpha -> beta.
double density_tri_reg(const SpectralModel& model, complex lambda, double alpha, double beta, double eps);
double density_tri_reg(const LocalSpectrum& ls, double alpha, double beta, double eps);

/// Picks the circular/triangular and plain/regularized formula from params and eps.
double density(const LocalSpectrum& ls, const EllipticParams& params, double eps);
double density(const SpectralModel& model, complex lambda, const EllipticParams& params, double eps);

struct FkDeterminant {
  double value = 0.0;      // Delta(x0 + c_t - lambda)
  double log_value = 0.0;  // log Delta; -inf when degenerate
  bool degenerate = false; // log of zero: an atom at lambda outside Xi_t
};

FkDeterminant fk_determinant(const SpectralModel& model, complex lambda, double t);
FkDeterminant fk_determinant(const LocalSpectrum& ls, double t);

/// Density at every cell centre, computed on `threads` workers (0 = auto).
DensityGrid fill_grid(const SpectralModel& model, const EllipticParams& params, double eps, const GridBounds& bounds,
                      std::size_t nx, std::size_t ny, unsigned threads = 0);

}  // namespace brown
