#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "brownmeasure/density_grid.hpp"
#include "brownmeasure/spectral_model.hpp"
#include "brownmeasure/subordination.hpp"

namespace brown {

/// splitmix64 finalizer; used to derive generator seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of the independent stream for sample `index` of a run seeded with `seed`.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Standard normals by Box-Muller on a std::mt19937_64, so that the sequence
/// for a given seed is the same on every platform.
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : gen_(splitmix64(seed)) {}
  double operator()();

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Real covariance of (Re a_ij, Im a_ij, Re a_ji, Im a_ji), i < j.
Eigen::Matrix4d pair_covariance(const EllipticParams& params, std::size_t n);
/// Lower-triangular L with L L^T = pair_covariance.
Eigen::Matrix4d pair_factor(const EllipticParams& params, std::size_t n);
/// Real covariance of (Re a_ii, Im a_ii).
Eigen::Matrix2d diagonal_covariance(const EllipticParams& params, std::size_t n);
Eigen::Matrix2d diagonal_factor(const EllipticParams& params, std::size_t n);

struct EnsembleSample {
  std::size_t n = 0;
  EllipticParams params = EllipticParams::circular(1.0);
  std::uint64_t seed = 0;
  Eigen::MatrixXcd matrix;
  std::vector<complex> eigenvalues;
};

/// One draw of the N x N triangular-elliptic Gaussian matrix (matrix only).
/// Row by row, the diagonal entry is drawn first and then the pairs (i, j > i),
/// each from i.i.d. normals of NormalSource(seed) through the factors above.
EnsembleSample sample_ensemble(std::size_t n, const EllipticParams& params, std::uint64_t seed);

/// Eigenvalues of a dense complex matrix (LAPACK zgeev); order unspecified.
std::vector<complex> eigenvalues(const Eigen::MatrixXcd& matrix);

/// Largest-remainder rounding of weights * n to integers summing to n.
std::vector<std::size_t> multiplicities(std::span<const double> weights, std::size_t n);

/// Diagonal approximant of a measure model (atoms, then quadrature nodes,
/// each repeated by its multiplicity), or the block-diagonal repetition of a
/// matrix model. Throws InvalidArgument if a positive-weight atom would vanish.
Eigen::MatrixXcd x0_matrix(const SpectralModel& model, std::size_t n);

/// Haar-distributed unitary (QR of a complex Ginibre matrix with the phase fix).
Eigen::MatrixXcd haar_unitary(std::size_t n, std::uint64_t seed);

/// x0 + Y for Y = sample_ensemble(n, params, seed), with eigenvalues. With
/// rotate set, x0 is first conjugated by haar_unitary(n, stream_seed(seed, ~0)).
EnsembleSample sample_deformed(const Eigen::MatrixXcd& x0, const EllipticParams& params, std::uint64_t seed,
                               bool rotate = false);

struct SpectrumScore {
  std::size_t coarse_n = 0;
  std::vector<double> observed;  // per coarse cell, i fastest
  std::vector<double> expected;
  double sup_cell_discrepancy = 0.0;  // max |obs - exp| / exp over cells with exp >= 20
  double inside_support_fraction = 1.0;
  std::size_t scored_cells = 0;
  std::size_t total = 0;
  std::size_t outside_window = 0;

  nlohmann::json to_json() const;
};

/// Bins all eigenvalues of `samples` on a coarse_n x coarse_n grid over the
/// predicted window and compares with predicted mass (fine cells are assigned
/// to coarse cells by centre). An eigenvalue is inside the support when its
/// fine cell has positive predicted density.
SpectrumScore compare_spectrum(std::span<const EnsembleSample> samples, const DensityGrid& predicted,
                               std::size_t coarse_n);

/// `re,im` lines, 17 significant digits.
void write_eigenvalues_csv(std::span<const EnsembleSample> samples, const std::filesystem::path& path);

}  // namespace brown
