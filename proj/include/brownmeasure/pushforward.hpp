#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "brownmeasure/density_grid.hpp"
#include "brownmeasure/spectral_model.hpp"
#include "brownmeasure/subordination.hpp"

namespace brown {

/// Phi(lambda) = lambda + gamma p0(lambda, r(lambda)), where r is s(lambda)
/// (eps = 0), w(eps; lambda, t) for the elliptic kind and eps0(lambda, eps)
/// for the triangular kind.
class PushforwardMap {
 public:
  enum class Kind { Triangular, Elliptic };

  PushforwardMap(SpectralModel model, EllipticParams params, double eps = 0.0);

  const SpectralModel& model() const noexcept { return model_; }
  const EllipticParams& params() const noexcept { return params_; }
  double epsilon() const noexcept { return eps_; }
  Kind kind() const noexcept { return kind_; }

  /// The regularizer r(lambda) that enters p0.
  double regularizer(const LocalSpectrum& ls) const;

 private:
  SpectralModel model_;
  EllipticParams params_;
  double eps_;
  Kind kind_;
};

complex phi(const PushforwardMap& map, complex lambda);

/// Solves phi(lambda) = z for eps > 0 by a damped fixed-point iteration with a
/// Newton fallback. The result satisfies |phi(lambda) - z| <= 1e-10 max(1, |z|).
complex phi_inverse(const PushforwardMap& map, complex z);

struct Jacobian {
  Eigen::Matrix2d matrix;  // d(Re, Im phi) / d(Re, Im lambda)
  double det = 0.0;
  bool singular = false;   // |det| < 1e-8
};

/// Central differences with step h (h <= 0 selects 1e-5 max(1, |lambda|)).
Jacobian jacobian(const PushforwardMap& map, complex lambda, double h = 0.0);

struct SingularPoint {
  complex lambda;
  double det = 0.0;
};

struct SingularScan {
  std::vector<SingularPoint> points;  // |det| < 1e-6
  std::size_t scanned = 0;            // cells whose stencil lies inside Xi
};

/// Jacobian determinant at the n x n cell centres of `bounds` whose
/// difference stencil lies in Xi; requires an eps = 0 map.
SingularScan singular_scan(const PushforwardMap& map, const GridBounds& bounds, std::size_t n, unsigned threads = 0);

enum class Deposit {
  /// Maps the four corners of every source cell and spreads its mass over the
  /// image quadrilateral by exact overlap with the target bins. Folded or
  /// degenerate images fall back to Point.
  CellImage,
  /// All of a cell's mass goes to the bin containing phi(centre).
  Point,
};

struct TransportOptions {
  Deposit deposit = Deposit::CellImage;
  unsigned threads = 0;
  double max_lost_fraction = 0.01;
};

struct TransportedGrid {
  std::vector<std::pair<complex, double>> points;  // (phi(centre), cell mass) per source cell with mass
  DensityGrid binned;
  double source_mass = 0.0;
  double lost_mass = 0.0;  // source mass that landed outside the target window
  std::size_t point_fallbacks = 0;

  double lost_fraction() const noexcept { return source_mass > 0.0 ? lost_mass / source_mass : 0.0; }
};

/// Moves the mass of every source cell to its image under phi and bins it on
/// the target window. Throws InvalidArgument when the lost fraction exceeds
/// options.max_lost_fraction. The result does not depend on the thread count.
TransportedGrid transport(const PushforwardMap& map, const DensityGrid& source, const GridBounds& target,
                          std::size_t nx, std::size_t ny, const TransportOptions& options = {});

}  // namespace brown
