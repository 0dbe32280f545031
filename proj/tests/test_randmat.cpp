#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "brownmeasure/brown_measure.hpp"
#include "brownmeasure/error.hpp"
#include "brownmeasure/randmat.hpp"
#include "test_support.hpp"

using namespace brown;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const EllipticParams kParamSets[] = {
    EllipticParams::circular(1.0),
    EllipticParams::circular(1.0, 1.0),
    EllipticParams(2.0, 1.0, complex(0.3, 0.4)),
    EllipticParams(0.5, 3.0, std::polar(std::sqrt(1.5), 2.0)),
    EllipticParams(2.0, 0.5, complex(0.0, -1.0)),
};

std::vector<complex> sorted(std::vector<complex> v) {
  std::sort(v.begin(), v.end(), [](complex a, complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return v;
}

}  // namespace

TEST_CASE("covariance factors") {
  for (const EllipticParams& p : kParamSets) {
    for (const std::size_t n : {1u, 7u}) {
      const Eigen::Matrix4d c = pair_covariance(p, n);
      const Eigen::Matrix4d l = pair_factor(p, n);
      REQUIRE((l * l.transpose() - c).cwiseAbs().maxCoeff() < 1e-12);
      REQUIRE(l.isLowerTriangular(0.0));
      const Eigen::Matrix2d d = diagonal_covariance(p, n);
      const Eigen::Matrix2d ld = diagonal_factor(p, n);
      REQUIRE((ld * ld.transpose() - d).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("complex moments implied by the real covariance") {
  // a = x1 + i y1 = a_ij, b = x2 + i y2 = a_ji with real covariance C of (x1, y1, x2, y2):
  //   E|a|^2 = C00 + C11, E a^2 = C00 - C11 + 2i C01, E a b = C02 - C13 + i (C03 + C12),
  //   E a conj(b) = C02 + C13 + i (C12 - C03).
  for (const EllipticParams& p : kParamSets) {
    const double n = 5.0;
    const Eigen::Matrix4d c = pair_covariance(p, 5);
    REQUIRE_THAT(c(0, 0) + c(1, 1), WithinRel(p.alpha() / n, 1e-15));
    REQUIRE_THAT(c(2, 2) + c(3, 3), WithinRel(p.beta() / n, 1e-15));
    REQUIRE(std::abs(complex(c(0, 0) - c(1, 1), 2 * c(0, 1))) < 1e-16);
    REQUIRE(std::abs(complex(c(2, 2) - c(3, 3), 2 * c(2, 3))) < 1e-16);
    REQUIRE(std::abs(complex(c(0, 2) - c(1, 3), c(0, 3) + c(1, 2)) - p.gamma() / n) < 1e-15);
    REQUIRE(std::abs(complex(c(0, 2) + c(1, 3), c(1, 2) - c(0, 3))) < 1e-16);

    const Eigen::Matrix2d d = diagonal_covariance(p, 5);
    REQUIRE_THAT(d(0, 0) + d(1, 1), WithinRel((p.alpha() + p.beta()) / (2 * n), 1e-15));
    REQUIRE(std::abs(complex(d(0, 0) - d(1, 1), 2 * d(0, 1)) - p.gamma() / n) < 1e-15);
  }
}

TEST_CASE("sampled moments") {
  const EllipticParams p(2.0, 1.0, complex(0.3, 0.4));
  const std::size_t draws = 20000;
  std::vector<complex> a01(draws), a10(draws), a00(draws);
  for (std::size_t k = 0; k < draws; ++k) {
    const EnsembleSample s = sample_ensemble(2, p, stream_seed(5, k));
    a01[k] = s.matrix(0, 1);
    a10[k] = s.matrix(1, 0);
    a00[k] = s.matrix(0, 0);
  }
  const auto check = [&](auto fn, complex expected) {
    complex mean = 0.0;
    for (std::size_t k = 0; k < draws; ++k) mean += fn(k);
    mean /= static_cast<double>(draws);
    double var_re = 0.0, var_im = 0.0;
    for (std::size_t k = 0; k < draws; ++k) {
      const complex d = fn(k) - mean;
      var_re += d.real() * d.real();
      var_im += d.imag() * d.imag();
    }
    const double se_re = std::sqrt(var_re / static_cast<double>(draws - 1) / static_cast<double>(draws));
    const double se_im = std::sqrt(var_im / static_cast<double>(draws - 1) / static_cast<double>(draws));
    REQUIRE(std::abs(mean.real() - expected.real()) <= 4 * se_re + 1e-15);
    REQUIRE(std::abs(mean.imag() - expected.imag()) <= 4 * se_im + 1e-15);
  };
  check([&](std::size_t k) { return complex(std::norm(a01[k]), 0.0); }, p.alpha() / 2);
  check([&](std::size_t k) { return complex(std::norm(a10[k]), 0.0); }, p.beta() / 2);
  check([&](std::size_t k) { return a01[k] * a10[k]; }, p.gamma() / 2.0);
  check([&](std::size_t k) { return a01[k] * std::conj(a10[k]); }, 0.0);
  check([&](std::size_t k) { return a01[k] * a01[k]; }, 0.0);
  check([&](std::size_t k) { return complex(std::norm(a00[k]), 0.0); }, (p.alpha() + p.beta()) / 4);
  check([&](std::size_t k) { return a00[k] * a00[k]; }, p.gamma() / 2.0);
}

TEST_CASE("generators are deterministic") {
  NormalSource x(3), y(3), z(4);
  bool differs = false;
  for (int k = 0; k < 100; ++k) {
    const double a = x();
    REQUIRE(a == y());
    differs = differs || a != z();
  }
  REQUIRE(differs);
  REQUIRE(stream_seed(1, 0) != stream_seed(1, 1));
  REQUIRE(stream_seed(1, 0) != stream_seed(2, 0));

  const EllipticParams p(2.0, 1.0, 0.5);
  const EnsembleSample a = sample_ensemble(30, p, 99);
  const EnsembleSample b = sample_ensemble(30, p, 99);
  const EnsembleSample c = sample_ensemble(30, p, 100);
  REQUIRE(a.matrix == b.matrix);
  REQUIRE(a.matrix != c.matrix);
  REQUIRE(a.seed == 99);
  REQUIRE(a.n == 30);

  NormalSource normal(17);
  double sum = 0.0, sum2 = 0.0;
  const int m = 100000;
  for (int k = 0; k < m; ++k) {
    const double v = normal();
    sum += v;
    sum2 += v * v;
  }
  REQUIRE(std::abs(sum / m) < 4.0 / std::sqrt(m));
  REQUIRE(std::abs(sum2 / m - 1.0) < 4.0 * std::sqrt(2.0 / m));
}

TEST_CASE("eigenvalues") {
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(3, 3);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  d(2, 2) = 3.0;
  const auto ev = sorted(eigenvalues(d));
  REQUIRE(ev.size() == 3);
  for (int k = 0; k < 3; ++k) REQUIRE(std::abs(ev[k] - complex(k + 1.0, 0.0)) < 1e-14);

  Eigen::MatrixXcd jordan = Eigen::MatrixXcd::Zero(3, 3);
  jordan(0, 1) = 1.0;
  jordan(1, 2) = 1.0;
  for (const complex z : eigenvalues(jordan)) REQUIRE(std::abs(z) < 1e-12);

  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(2, 2);
  companion(0, 1) = 1.0;
  companion(1, 0) = 1.0;
  const auto pm = sorted(eigenvalues(companion));
  REQUIRE(std::abs(pm[0] + 1.0) < 1e-14);
  REQUIRE(std::abs(pm[1] - 1.0) < 1e-14);

  REQUIRE_THROWS_AS(eigenvalues(Eigen::MatrixXcd::Zero(2, 3)), InvalidArgument);
}

TEST_CASE("finite approximants of x0") {
  const std::vector<double> w{0.6, 0.4};
  REQUIRE(multiplicities(w, 5) == std::vector<std::size_t>{3, 2});
  const std::vector<double> thirds{1.0 / 3, 1.0 / 3, 1.0 / 3};
  const auto m = multiplicities(thirds, 100);
  REQUIRE(std::accumulate(m.begin(), m.end(), std::size_t{0}) == 100);
  REQUIRE(m == std::vector<std::size_t>{34, 33, 33});

  const Eigen::MatrixXcd two = x0_matrix(brown::testing::two_atoms(), 4);
  Eigen::VectorXcd expected(4);
  expected << 1.0, 1.0, -1.0, -1.0;
  REQUIRE(two.isApprox(Eigen::MatrixXcd(expected.asDiagonal())));
  REQUIRE(x0_matrix(SpectralModel::zero(), 3).isZero(0.0));

  const Eigen::MatrixXcd a = brown::testing::random_matrix(2, 5);
  const Eigen::MatrixXcd block = x0_matrix(SpectralModel::dense_matrix(a), 6);
  for (int b = 0; b < 3; ++b) REQUIRE(block.block(2 * b, 2 * b, 2, 2) == a);
  REQUIRE(block.block(0, 2, 2, 2).isZero(0.0));
  REQUIRE_THROWS_AS(x0_matrix(SpectralModel::dense_matrix(a), 5), InvalidArgument);
  REQUIRE_THROWS_AS(x0_matrix(SpectralModel::self_adjoint({{0.0, 0.99}, {1.0, 0.01}}), 10), InvalidArgument);
}

TEST_CASE("haar unitary") {
  const Eigen::MatrixXcd u = haar_unitary(20, 8);
  REQUIRE((u.adjoint() * u - Eigen::MatrixXcd::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-12);
  REQUIRE(haar_unitary(20, 8) == u);

  const Eigen::MatrixXcd x0 = x0_matrix(brown::testing::two_atoms(), 20);
  const EnsembleSample plain = sample_deformed(x0, EllipticParams::circular(1.0), 4, false);
  REQUIRE(plain.matrix == sample_ensemble(20, EllipticParams::circular(1.0), 4).matrix + x0);
  REQUIRE(plain.eigenvalues.size() == 20);
  const EnsembleSample rotated = sample_deformed(x0, EllipticParams::circular(1.0), 4, true);
  const Eigen::MatrixXcd y = sample_ensemble(20, EllipticParams::circular(1.0), 4).matrix;
  // The rotation preserves the spectrum of x0.
  const auto ev = sorted(eigenvalues(rotated.matrix - y));
  for (std::size_t k = 0; k < 20; ++k) REQUIRE(std::abs(ev[k] - (k < 10 ? -1.0 : 1.0)) < 1e-10);
}

TEST_CASE("spectrum comparison") {
  const DensityGrid disk =
      fill_grid(SpectralModel::zero(), EllipticParams::circular(1.0), 0.0, GridBounds::square(50.0), 100, 100);
  const SpectrumScore empty = compare_spectrum({}, disk, 8);
  REQUIRE(empty.inside_support_fraction == 1.0);
  REQUIRE(empty.total == 0);

  SECTION("Ginibre spectral radius and counts") {
    const EnsembleSample s = sample_deformed(Eigen::MatrixXcd::Zero(500, 500), EllipticParams::circular(1.0), 11);
    double radius = 0.0;
    for (const complex z : s.eigenvalues) radius = std::max(radius, std::abs(z));
    REQUIRE(radius >= 0.9);
    REQUIRE(radius <= 1.15);
    const DensityGrid pred =
        fill_grid(SpectralModel::zero(), EllipticParams::circular(1.0), 0.0, GridBounds::square(1.2), 120, 120);
    const SpectrumScore score = compare_spectrum(std::span(&s, 1), pred, 8);
    REQUIRE(score.total == 500);
    const double counted = std::accumulate(score.observed.begin(), score.observed.end(), 0.0);
    REQUIRE(counted + static_cast<double>(score.outside_window) == 500.0);
    REQUIRE_THAT(std::accumulate(score.expected.begin(), score.expected.end(), 0.0), WithinRel(500.0, 1e-12));
    REQUIRE(score.to_json().at("cells").size() == 64);
  }

  SECTION("discrepancy decreases with N") {
    const SpectralModel model = brown::testing::two_atoms();
    const EllipticParams p = EllipticParams::circular(1.0);
    const DensityGrid pred = fill_grid(model, p, 0.0, {-2.2, 2.2, -1.1, 1.1}, 160, 80);
    const auto l1 = [&](std::size_t n) {
      double avg = 0.0;
      for (std::uint64_t k = 0; k < 4; ++k) {
        const EnsembleSample s = sample_deformed(x0_matrix(model, n), p, stream_seed(31, k));
        const SpectrumScore score = compare_spectrum(std::span(&s, 1), pred, 8);
        double diff = 0.0;
        for (std::size_t c = 0; c < score.observed.size(); ++c) diff += std::abs(score.observed[c] - score.expected[c]);
        avg += diff / static_cast<double>(score.total) / 4.0;
      }
      return avg;
    };
    REQUIRE(l1(500) < l1(100));
  }
}
