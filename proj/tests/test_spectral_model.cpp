#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "brownmeasure/error.hpp"
#include "brownmeasure/randmat.hpp"
#include "brownmeasure/spectral_model.hpp"
#include "test_support.hpp"

using namespace brown;
using brown::testing::direct_traces;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

void require_bundles_close(const TraceBundle& a, const TraceBundle& b, double tol) {
  REQUIRE_THAT(a.h_inv, WithinAbs(b.h_inv, tol));
  REQUIRE_THAT(a.h_inv_sq, WithinAbs(b.h_inv_sq, tol));
  REQUIRE_THAT(a.hk_inv, WithinAbs(b.hk_inv, tol));
  REQUIRE(std::abs(a.cross - b.cross) <= tol);
  REQUIRE(std::abs(a.p0 - b.p0) <= tol);
}

}  // namespace

TEST_CASE("trace bundle closed forms") {
  SECTION("two atoms at lambda = 0, s = 1") {
    REQUIRE_THAT(trace_bundle(brown::testing::two_atoms(), 0.0, 1.0).h_inv, WithinAbs(0.5, 1e-15));
  }
  SECTION("x0 = 0 at lambda = 0.3, s = 0.5") {
    const TraceBundle b = trace_bundle(SpectralModel::zero(), 0.3, 0.5);
    REQUIRE_THAT(b.h_inv, WithinRel(2.94117647058823529, 1e-14));
    REQUIRE_THAT(b.h_inv_sq, WithinRel(2.94117647058823529 * 2.94117647058823529, 1e-14));
    REQUIRE(std::abs(b.p0 - 0.3 / 0.34) < 1e-14);
  }
  SECTION("diag(1, -1) matches the two-atom measure and direct inversion") {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = -1.0;
    const TraceBundle m = trace_bundle(SpectralModel::dense_matrix(a), 0.0, 1.0);
    REQUIRE_THAT(m.h_inv, WithinAbs(0.5, 1e-12));
    require_bundles_close(m, trace_bundle(brown::testing::two_atoms(), 0.0, 1.0), 1e-12);
    require_bundles_close(m, direct_traces(a, 0.0, 1.0), 1e-12);
  }
}

TEST_CASE("dense matrix traces agree with explicit inversion") {
  std::mt19937_64 gen(11);
  for (std::size_t n : {3u, 5u, 8u}) {
    const Eigen::MatrixXcd a = brown::testing::random_matrix(n, 100 + n);
    const SpectralModel model = SpectralModel::dense_matrix(a);
    for (int k = 0; k < 10; ++k) {
      const complex lambda = brown::testing::uniform_point(gen, 1.5);
      const double s = brown::testing::uniform(gen, 0.05, 2.0);
      require_bundles_close(trace_bundle(model, lambda, s), direct_traces(a, lambda, s), 1e-9);
    }
  }
}

TEST_CASE("measure and diagonal matrix representations agree") {
  const SpectralModel measure =
      SpectralModel::normal_plane({{complex(0.5, 0.2), 0.25}, {complex(-1.0, 0.0), 0.5}, {complex(0.0, -0.8), 0.25}});
  const SpectralModel matrix = SpectralModel::dense_matrix(x0_matrix(measure, 4));
  std::mt19937_64 gen(3);
  for (int k = 0; k < 20; ++k) {
    const complex lambda = brown::testing::uniform_point(gen, 2.0);
    const double s = brown::testing::uniform(gen, 0.05, 2.0);
    require_bundles_close(trace_bundle(measure, lambda, s), trace_bundle(matrix, lambda, s), 1e-10);
  }
}

TEST_CASE("conjugating lambda and x0 conjugates cross and p0") {
  const SpectralModel measure = SpectralModel::normal_plane({{complex(0.5, 0.2), 0.3}, {complex(-0.4, -0.9), 0.7}});
  const SpectralModel matrix = SpectralModel::dense_matrix(brown::testing::random_matrix(4, 9));
  std::mt19937_64 gen(4);
  for (const SpectralModel* model : {&measure, &matrix}) {
    const SpectralModel conj = model->conjugate();
    for (int k = 0; k < 10; ++k) {
      const complex lambda = brown::testing::uniform_point(gen, 1.5);
      const double s = brown::testing::uniform(gen, 0.1, 1.5);
      const TraceBundle a = trace_bundle(*model, lambda, s);
      const TraceBundle b = trace_bundle(conj, std::conj(lambda), s);
      REQUIRE(std::abs(b.cross - std::conj(a.cross)) < 1e-12);
      REQUIRE(std::abs(b.p0 - std::conj(a.p0)) < 1e-12);
      REQUIRE_THAT(b.h_inv, WithinAbs(a.h_inv, 1e-12));
    }
  }
}

TEST_CASE("trace invariants") {
  const SpectralModel matrix = SpectralModel::dense_matrix(brown::testing::random_matrix(6, 21));
  std::mt19937_64 gen(5);
  for (int k = 0; k < 50; ++k) {
    const complex lambda = brown::testing::uniform_point(gen, 1.5);
    const double s = brown::testing::uniform(gen, 0.01, 2.0);
    const TraceBundle b = trace_bundle(matrix, lambda, s);
    REQUIRE(b.h_inv_sq <= b.h_inv / (s * s) * (1 + 1e-12));
    REQUIRE(b.hk_inv <= b.h_inv_sq * (1 + 1e-12));
    REQUIRE(b.hk_inv >= 0.0);
    const TraceBundle larger = trace_bundle(matrix, lambda, s * 1.1);
    REQUIRE(larger.h_inv < b.h_inv);
  }
}

TEST_CASE("h_inv_at_zero") {
  const SpectralModel zero = SpectralModel::zero();
  REQUIRE_THAT(h_inv_at_zero(zero, 0.5), WithinRel(4.0, 1e-15));
  REQUIRE(h_inv_at_zero(zero, 0.0) == std::numeric_limits<double>::infinity());
  REQUIRE_THAT(h_inv_at_zero(brown::testing::two_atoms(), 0.0), WithinAbs(1.0, 0.0));
  REQUIRE(h_inv_at_zero(zero, complex(5e-15, 0.0)) == std::numeric_limits<double>::infinity());

  Eigen::MatrixXcd jordan = Eigen::MatrixXcd::Zero(2, 2);
  jordan(0, 1) = 1.0;
  REQUIRE(h_inv_at_zero(SpectralModel::dense_matrix(jordan), 0.0) == std::numeric_limits<double>::infinity());
  // Limit of h_inv as s -> 0 for a matrix away from its spectrum.
  const SpectralModel m = SpectralModel::dense_matrix(brown::testing::random_matrix(4, 2));
  REQUIRE_THAT(h_inv_at_zero(m, complex(3.0, 1.0)), WithinRel(trace_bundle(m, complex(3.0, 1.0), 1e-9).h_inv, 1e-9));
}

TEST_CASE("model validation") {
  REQUIRE_THROWS_AS(SpectralModel::self_adjoint({{0.0, 0.6}, {1.0, 0.3}}), InvalidArgument);
  REQUIRE_THROWS_AS(SpectralModel::self_adjoint({{0.0, 1.2}, {1.0, -0.2}}), InvalidArgument);
  REQUIRE_THROWS_AS(SpectralModel::self_adjoint({}), InvalidArgument);
  REQUIRE_THROWS_AS(SpectralModel::normal_plane({{complex(std::nan(""), 0.0), 1.0}}), InvalidArgument);
  REQUIRE_THROWS_AS(SpectralModel::dense_matrix(Eigen::MatrixXcd::Zero(2, 3)), InvalidArgument);
  REQUIRE_NOTHROW(SpectralModel::self_adjoint({{0.0, 0.5}}, {{1.0, 0.25}, {2.0, 0.25}}));
  REQUIRE_THROWS_AS(trace_bundle(SpectralModel::zero(), 0.1, 0.0), InvalidArgument);
  REQUIRE_THROWS_AS(trace_bundle(SpectralModel::zero(), complex(INFINITY, 0.0), 1.0), InvalidArgument);
}
