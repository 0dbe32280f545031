#include "brownmeasure/randmat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "brownmeasure/error.hpp"

namespace brown {

namespace {

// Relative slack below zero accepted (and clipped) in a factor's radicand.
constexpr double kPsdSlack = 1e-10;

double clipped_sqrt(double v, double scale) {
  if (v < -kPsdSlack * scale) throw NumericalFailure("ensemble covariance is not positive semidefinite");
  return std::sqrt(std::max(v, 0.0));
}

void require_size(std::size_t n) {
  if (n < 1) throw InvalidArgument("matrix size must be positive");
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(seed) ^ (index * 0xd1b54a32d192ed03ULL + 1));
}

double NormalSource::operator()() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1;
  do {
    u1 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  } while (u1 == 0.0);
  const double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

Eigen::Matrix4d pair_covariance(const EllipticParams& p, std::size_t n) {
  require_size(n);
  const double a = p.alpha(), b = p.beta(), g1 = p.gamma().real(), g2 = p.gamma().imag();
  Eigen::Matrix4d c;
  c << a, 0, g1, g2,
       0, a, g2, -g1,
       g1, g2, b, 0,
       g2, -g1, 0, b;
  return c / (2.0 * static_cast<double>(n));
}

Eigen::Matrix4d pair_factor(const EllipticParams& p, std::size_t n) {
  require_size(n);
  const double two_n = 2.0 * static_cast<double>(n);
  const double a = p.alpha(), b = p.beta(), g1 = p.gamma().real(), g2 = p.gamma().imag();
  const double d = std::sqrt(a / two_n);
  const double off = 1.0 / std::sqrt(a * two_n);
  const double rest = clipped_sqrt(b - std::norm(p.gamma()) / a, b) / std::sqrt(two_n);
  Eigen::Matrix4d l = Eigen::Matrix4d::Zero();
  l(0, 0) = d;
  l(1, 1) = d;
  l(2, 0) = g1 * off;
  l(2, 1) = g2 * off;
  l(2, 2) = rest;
  l(3, 0) = g2 * off;
  l(3, 1) = -g1 * off;
  l(3, 3) = rest;
  return l;
}

Eigen::Matrix2d diagonal_covariance(const EllipticParams& p, std::size_t n) {
  require_size(n);
  const double m = 0.5 * (p.alpha() + p.beta());
  const double g1 = p.gamma().real(), g2 = p.gamma().imag();
  Eigen::Matrix2d c;
  c << m + g1, g2,
       g2, m - g1;
  return c / (2.0 * static_cast<double>(n));
}

Eigen::Matrix2d diagonal_factor(const EllipticParams& p, std::size_t n) {
  const Eigen::Matrix2d c = diagonal_covariance(p, n);
  const double scale = c.trace();
  Eigen::Matrix2d l = Eigen::Matrix2d::Zero();
  l(0, 0) = clipped_sqrt(c(0, 0), scale);
  l(1, 0) = l(0, 0) > 0.0 ? c(1, 0) / l(0, 0) : 0.0;
  l(1, 1) = clipped_sqrt(c(1, 1) - l(1, 0) * l(1, 0), scale);
  return l;
}

EnsembleSample sample_ensemble(std::size_t n, const EllipticParams& params, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("ensemble size must be at least 2");
  const Eigen::Matrix4d lp = pair_factor(params, n);
  const Eigen::Matrix2d ld = diagonal_factor(params, n);
  NormalSource normal(seed);

  EnsembleSample s;
  s.n = n;
  s.params = params;
  s.seed = seed;
  s.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < s.matrix.rows(); ++i) {
    Eigen::Vector2d gd;
    gd(0) = normal();
    gd(1) = normal();
    const Eigen::Vector2d xd = ld * gd;
    s.matrix(i, i) = complex(xd(0), xd(1));
    for (Eigen::Index j = i + 1; j < s.matrix.cols(); ++j) {
      Eigen::Vector4d g;
      for (int k = 0; k < 4; ++k) g(k) = normal();
      const Eigen::Vector4d x = lp * g;
      s.matrix(i, j) = complex(x(0), x(1));
      s.matrix(j, i) = complex(x(2), x(3));
    }
  }
  return s;
}

std::vector<complex> eigenvalues(const Eigen::MatrixXcd& matrix) {
  if (matrix.rows() != matrix.cols()) throw InvalidArgument("eigenvalues need a square matrix");
  if (!matrix.allFinite()) throw InvalidArgument("matrix entries must be finite");
  const auto n = static_cast<lapack_int>(matrix.rows());
  if (n == 0) return {};
  Eigen::MatrixXcd a = matrix;  // overwritten by zgeev
  std::vector<complex> w(static_cast<std::size_t>(n));
  const lapack_int info =
      LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, w.data(), nullptr, 1, nullptr, 1);
  if (info != 0) throw NumericalFailure("zgeev failed with info " + std::to_string(info));
  return w;
}

std::vector<std::size_t> multiplicities(std::span<const double> weights, std::size_t n) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw InvalidArgument("weights must have positive total");
  std::vector<std::size_t> out(weights.size());
  std::vector<std::pair<double, std::size_t>> remainder;
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const double target = weights[k] / total * static_cast<double>(n);
    out[k] = static_cast<std::size_t>(std::floor(target));
    assigned += out[k];
    remainder.emplace_back(target - std::floor(target), k);
  }
  // Largest remainder first; ties go to the earlier entry.
  std::stable_sort(remainder.begin(), remainder.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < n && r < remainder.size(); ++r, ++assigned) ++out[remainder[r].second];
  return out;
}

Eigen::MatrixXcd x0_matrix(const SpectralModel& model, std::size_t n) {
  require_size(n);
  const auto N = static_cast<Eigen::Index>(n);
  if (model.is_matrix()) {
    const Eigen::MatrixXcd& a = model.matrix();
    const auto m = a.rows();
    if (N % m != 0) throw InvalidArgument("matrix model size must divide N");
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(N, N);
    for (Eigen::Index b = 0; b < N / m; ++b) out.block(b * m, b * m, m, m) = a;
    return out;
  }
  const auto nodes = model.nodes();
  std::vector<double> w;
  w.reserve(nodes.size());
  for (const auto& node : nodes) w.push_back(node.weight);
  const std::vector<std::size_t> mult = multiplicities(w, n);
  for (std::size_t k = 0; k < model.atoms().size(); ++k) {
    if (w[k] > 0.0 && mult[k] == 0) throw InvalidArgument("N is too small to represent every atom");
  }
  Eigen::VectorXcd diag(N);
  Eigen::Index pos = 0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    for (std::size_t r = 0; r < mult[k]; ++r) diag(pos++) = nodes[k].location;
  }
  return diag.asDiagonal();
}

Eigen::MatrixXcd haar_unitary(std::size_t n, std::uint64_t seed) {
  require_size(n);
  const auto N = static_cast<Eigen::Index>(n);
  NormalSource normal(seed);
  Eigen::MatrixXcd z(N, N);
  for (Eigen::Index j = 0; j < N; ++j) {
    for (Eigen::Index i = 0; i < N; ++i) {
      const double re = normal();
      z(i, j) = complex(re, normal()) * std::numbers::sqrt2 * 0.5;
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd& r = qr.matrixQR();
  for (Eigen::Index k = 0; k < N; ++k) {
    const double mag = std::abs(r(k, k));
    if (mag > 0.0) q.col(k) *= r(k, k) / mag;
  }
  return q;
}

EnsembleSample sample_deformed(const Eigen::MatrixXcd& x0, const EllipticParams& params, std::uint64_t seed,
                               bool rotate) {
  const auto n = static_cast<std::size_t>(x0.rows());
  EnsembleSample s = sample_ensemble(n, params, seed);
  if (rotate) {
    const Eigen::MatrixXcd u = haar_unitary(n, stream_seed(seed, ~std::uint64_t{0}));
    s.matrix += u * x0 * u.adjoint();
  } else {
    s.matrix += x0;
  }
  s.eigenvalues = eigenvalues(s.matrix);
  return s;
}

nlohmann::json SpectrumScore::to_json() const {
  nlohmann::json j;
  j["coarse_n"] = coarse_n;
  j["sup_cell_discrepancy"] = sup_cell_discrepancy;
  j["inside_support_fraction"] = inside_support_fraction;
  j["scored_cells"] = scored_cells;
  j["total_eigenvalues"] = total;
  j["outside_window"] = outside_window;
  nlohmann::json cells = nlohmann::json::array();
  for (std::size_t k = 0; k < observed.size(); ++k) {
    cells.push_back({{"i", k % coarse_n}, {"j", k / coarse_n}, {"observed", observed[k]}, {"expected", expected[k]}});
  }
  j["cells"] = std::move(cells);
  return j;
}

SpectrumScore compare_spectrum(std::span<const EnsembleSample> samples, const DensityGrid& predicted,
                               std::size_t coarse_n) {
  if (coarse_n < 1) throw InvalidArgument("coarse grid size must be positive");
  if (!(predicted.mass > 0.0)) throw InvalidArgument("predicted grid has no mass");
  const GridBounds& b = predicted.bounds;
  const double cw = (b.x_max - b.x_min) / static_cast<double>(coarse_n);
  const double ch = (b.y_max - b.y_min) / static_cast<double>(coarse_n);
  auto coarse_index = [&](complex z) {
    const auto i = std::min(coarse_n - 1, static_cast<std::size_t>((z.real() - b.x_min) / cw));
    const auto j = std::min(coarse_n - 1, static_cast<std::size_t>((z.imag() - b.y_min) / ch));
    return j * coarse_n + i;
  };

  SpectrumScore score;
  score.coarse_n = coarse_n;
  score.observed.assign(coarse_n * coarse_n, 0.0);
  score.expected.assign(coarse_n * coarse_n, 0.0);

  std::vector<double> coarse_mass(coarse_n * coarse_n, 0.0);
  for (std::size_t j = 0; j < predicted.ny; ++j) {
    for (std::size_t i = 0; i < predicted.nx; ++i) {
      coarse_mass[coarse_index(predicted.center(i, j))] += predicted.at(i, j) * predicted.cell_area();
    }
  }

  std::size_t inside = 0;
  for (const EnsembleSample& s : samples) {
    for (const complex z : s.eigenvalues) {
      ++score.total;
      if (!b.contains(z)) {
        ++score.outside_window;
        continue;
      }
      score.observed[coarse_index(z)] += 1.0;
      const auto i = std::min(predicted.nx - 1, static_cast<std::size_t>((z.real() - b.x_min) / predicted.dx()));
      const auto j = std::min(predicted.ny - 1, static_cast<std::size_t>((z.imag() - b.y_min) / predicted.dy()));
      if (predicted.at(i, j) > 0.0) ++inside;
    }
  }

  for (std::size_t k = 0; k < coarse_mass.size(); ++k) {
    score.expected[k] = static_cast<double>(score.total) * coarse_mass[k] / predicted.mass;
    if (score.expected[k] >= 20.0) {
      ++score.scored_cells;
      score.sup_cell_discrepancy =
          std::max(score.sup_cell_discrepancy, std::abs(score.observed[k] - score.expected[k]) / score.expected[k]);
    }
  }
  score.inside_support_fraction =
      score.total == 0 ? 1.0 : static_cast<double>(inside) / static_cast<double>(score.total);
  return score;
}

void write_eigenvalues_csv(std::span<const EnsembleSample> samples, const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  std::fputs("re,im\n", f);
  for (const EnsembleSample& s : samples) {
    for (const complex z : s.eigenvalues) std::fprintf(f, "%.17g,%.17g\n", z.real(), z.imag());
  }
  if (std::fclose(f) != 0) throw IoError("failed writing " + path.string());
}

}  // namespace brown
