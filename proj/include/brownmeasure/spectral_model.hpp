#pragma once

#include <complex>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace brown {

using complex = std::complex<double>;

/// Absolute distance below which a point is said to sit on an atom.
inline constexpr double kCoincidenceTolerance = 1e-14;

struct SpectralNode {
  complex location;
  double weight = 0.0;
};

/// Trace functionals of h = |lambda - x0|^2 + s^2 and k = |(lambda - x0)^*|^2 + s^2.
struct TraceBundle {
  double h_inv = 0.0;     // phi(h^-1)
  double h_inv_sq = 0.0;  // phi(h^-2)
  double hk_inv = 0.0;    // phi(h^-1 k^-1)
  complex cross;          // phi((lambda - x0) h^-2)
  complex p0;             // phi((lambda - x0)^* k^-1)
};

/// Everything about x0 - lambda that the trace functionals need, prepared once
/// per point lambda so that the regularizer s can be varied cheaply.
///
/// For a normal x0 the data are the squared distances |lambda - z_i|^2 with
/// their weights. For a matrix x0 they come from the SVD
/// lambda - A = U diag(sigma) V^*: squared singular values, the diagonal of
/// M = V^* U, and the mixing weights |M_ij|^2 that couple h and k.
class LocalSpectrum {
 public:
  LocalSpectrum() = default;

  static LocalSpectrum from_nodes(complex lambda, std::span<const SpectralNode> nodes);
  static LocalSpectrum from_matrix(complex lambda, const Eigen::MatrixXcd& a);

  /// phi(h^-1) at regularizer s; s may be 0 only when no distance vanishes.
  double h_inv(double s) const;
  /// phi(h^-2).
  double h_inv_sq(double s) const;
  /// The full bundle at regularizer s >= 0.
  TraceBundle traces(double s) const;
  /// phi((lambda - x0)^* k^-1) at regularizer s >= 0.
  complex p0(double s) const;
  /// phi(log h) = integral of log(u^2 + s^2) d mu_{|x0 - lambda|}(u); -inf when s = 0 on an atom.
  double log_det_h(double s) const;
  /// phi(|lambda - x0|^-2); +inf when lambda lies on an atom.
  double h_inv_at_zero() const;
  bool on_atom() const noexcept { return on_atom_; }

  std::size_t size() const noexcept { return dist2_.size(); }

 private:
  std::vector<double> dist2_;
  std::vector<double> weight_;
  std::vector<complex> coupling_;  // (lambda - z_i) or sigma_i M_ii
  Eigen::MatrixXd mixing_;         // |M_ij|^2 / N; empty when x0 is normal
  bool on_atom_ = false;
};

/// The *-distribution of x0, in one of three representations.
///
/// Measure variants hold atoms and quadrature nodes of an absolutely
/// continuous part; both enter every trace as weighted point masses, so the
/// accuracy of the continuous part is whatever the supplied quadrature gives.
/// Heavy-tailed spectral measures need a truncation chosen by the caller.
class SpectralModel {
 public:
  enum class Variant { SelfAdjoint, NormalPlane, DenseMatrix };

  /// Real atoms and quadrature nodes, (location, weight) pairs.
  static SpectralModel self_adjoint(std::vector<std::pair<double, double>> atoms,
                                    std::vector<std::pair<double, double>> abscont = {});
  static SpectralModel normal_plane(std::vector<SpectralNode> atoms, std::vector<SpectralNode> abscont = {});
  /// Normalized trace tr/N on an N x N matrix.
  static SpectralModel dense_matrix(Eigen::MatrixXcd entries);
  /// x0 = 0.
  static SpectralModel zero();

  Variant variant() const noexcept { return variant_; }
  bool is_matrix() const noexcept { return variant_ == Variant::DenseMatrix; }

  std::span<const SpectralNode> atoms() const noexcept { return atoms_; }
  std::span<const SpectralNode> abscont() const noexcept { return abscont_; }
  /// Atoms followed by quadrature nodes.
  std::span<const SpectralNode> nodes() const noexcept { return nodes_; }
  const Eigen::MatrixXcd& matrix() const noexcept { return matrix_; }

  /// Entrywise complex conjugate x0 -> conj(x0).
  SpectralModel conjugate() const;

  LocalSpectrum at(complex lambda) const;

 private:
  SpectralModel() = default;
  void validate_measure() const;

  Variant variant_ = Variant::NormalPlane;
  std::vector<SpectralNode> atoms_;
  std::vector<SpectralNode> abscont_;
  std::vector<SpectralNode> nodes_;
  Eigen::MatrixXcd matrix_;
};

/// Trace functionals at (lambda, s); requires s > 0 and finite lambda.
TraceBundle trace_bundle(const SpectralModel& model, complex lambda, double s);

/// phi(|lambda - x0|^-2) as the s -> 0 limit of phi(h^-1); +inf on an atom
/// (distance at most kCoincidenceTolerance).
double h_inv_at_zero(const SpectralModel& model, complex lambda);

void require_finite(complex lambda, const char* what);

}  // namespace brown
