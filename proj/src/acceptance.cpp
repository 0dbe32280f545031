#include "brownmeasure/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include "brownmeasure/brown_measure.hpp"
#include "brownmeasure/error.hpp"
#include "brownmeasure/parallel.hpp"
#include "brownmeasure/pushforward.hpp"
#include "brownmeasure/randmat.hpp"
#include "brownmeasure/subordination.hpp"

namespace brown {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

SpectralModel two_atoms() { return SpectralModel::self_adjoint({{1.0, 0.5}, {-1.0, 0.5}}); }

const GridBounds kDiskWindow = GridBounds::square(1.5);
const GridBounds kTwoAtomWindow{-2.5, 2.5, -1.5, 1.5};

double uniform01(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

// 1. Uniform disk for x0 = 0, alpha = 2, beta = 1.
Outcome uniform_disk(unsigned threads) {
  const EllipticParams p(2.0, 1.0);
  const double expected = 1.0 / (std::numbers::pi * p.t_eff());
  const double r = std::sqrt(p.t_eff());
  const auto start = Clock::now();
  const DensityGrid g = fill_grid(SpectralModel::zero(), p, 0.0, kDiskWindow, 201, 201, threads);
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  double inner_err = 0.0, outer_max = 0.0;
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double m = std::abs(g.center(i, j));
      if (m <= 0.95 * r) inner_err = std::max(inner_err, std::abs(g.at(i, j) - expected));
      if (m >= 1.05 * r) outer_max = std::max(outer_max, std::abs(g.at(i, j)));
    }
  }
  const bool ok = inner_err <= 1e-6 && outer_max == 0.0 && secs < 10.0;
  return {ok, fmt("max |rho - 1/(pi t_eff)| inside = %.3g, max outside = %.3g, fill %.2fs", inner_err, outer_max, secs)};
}

// 2. Triangular density equals circular density at t_eff.
Outcome triangular_equals_circular(unsigned threads) {
  const SpectralModel model = two_atoms();
  const EllipticParams p(2.0, 1.0);
  const DensityGrid cells(kTwoAtomWindow, 101, 101);
  std::vector<double> diff(cells.ny, 0.0);
  parallel_for(cells.ny, threads, [&](std::size_t j) {
    for (std::size_t i = 0; i < cells.nx; ++i) {
      const complex lambda = cells.center(i, j);
      const LocalSpectrum ls = model.at(lambda);
      diff[j] = std::max(diff[j], std::abs(density_tri(ls, 2.0, 1.0) - density_circ(ls, p.t_eff())));
    }
  });
  const double worst = *std::max_element(diff.begin(), diff.end());
  return {worst <= 1e-8, fmt("max |rho_tri - rho_circ(t_eff)| over 101^2 = %.3g", worst)};
}

// 3. Ellipse: push-forward of the t = 1 disk under gamma = 0.5.
Outcome ellipse_pushforward(unsigned threads) {
  const double gamma = 0.5;
  const EllipticParams p = EllipticParams::circular(1.0, gamma);
  const SpectralModel zero = SpectralModel::zero();
  const DensityGrid source = fill_grid(zero, EllipticParams::circular(1.0), 0.0, GridBounds::square(1.2), 301, 301, threads);
  TransportOptions opt;
  opt.threads = threads;
  opt.max_lost_fraction = 1.0;
  const PushforwardMap map(zero, p, 0.0);
  const TransportedGrid tg = transport(map, source, GridBounds::square(1.8), 301, 301, opt);

  // Score target cells whose preimage under the linear map lambda + gamma conj(lambda)
  // stays a few source cells inside the unit disk.
  const double level = 1.0 / (std::numbers::pi * (1.0 - gamma * gamma));
  const double margin = 3.0 * std::sqrt(2.0) * source.dx();
  auto preimage = [&](complex z) { return (z - gamma * std::conj(z)) / (1.0 - gamma * gamma); };
  const DensityGrid& b = tg.binned;
  double dev = 0.0;
  std::size_t scored = 0;
  for (std::size_t j = 0; j < b.ny; ++j) {
    for (std::size_t i = 0; i < b.nx; ++i) {
      const complex c = b.center(i, j);
      bool interior = true;
      for (const double sx : {-0.5, 0.5}) {
        for (const double sy : {-0.5, 0.5}) {
          interior = interior && std::abs(preimage(c + complex(sx * b.dx(), sy * b.dy()))) <= 1.0 - margin;
        }
      }
      if (!interior) continue;
      ++scored;
      dev = std::max(dev, std::abs(b.at(i, j) - level) / level);
    }
  }
  const bool ok = scored > 1000 && dev <= 0.05 && tg.lost_fraction() <= 0.01;
  return {ok, fmt("sup relative deviation = %.3g over %.0f interior cells, lost mass = %.3g, level %.6f", dev,
                  static_cast<double>(scored), tg.lost_fraction(), level)};
}

// 4. Boundary radius for alpha = 1.2, beta = 0.2.
Outcome boundary_radius() {
  const double e = 0.2;
  const EllipticParams p(1.0 + e, e);
  const SpectralModel zero = SpectralModel::zero();
  double lo = 0.0, hi = 2.0;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (in_xi(zero, mid, p) ? lo : hi) = mid;
  }
  const double r = 0.5 * (lo + hi);
  const double exact = 1.0 / std::sqrt(std::log(1.0 + 1.0 / e));
  return {std::abs(r - exact) <= 1e-6, fmt("radius %.9f vs 1/sqrt(log 6) = %.9f (diff %.3g)", r, exact, std::abs(r - exact))};
}

// 5. Density bound 1/(pi t) over three models, three t, two eps.
Outcome density_bound() {
  std::vector<std::pair<const char*, SpectralModel>> models;
  models.emplace_back("zero", SpectralModel::zero());
  models.emplace_back("two atoms", two_atoms());
  {
    NormalSource normal(8);
    Eigen::MatrixXcd a(8, 8);
    for (Eigen::Index j = 0; j < 8; ++j) {
      for (Eigen::Index i = 0; i < 8; ++i) {
        const double re = normal();
        a(i, j) = complex(re, normal()) / 4.0;
      }
    }
    models.emplace_back("random 8x8", SpectralModel::dense_matrix(a));
  }
  std::mt19937_64 gen(5);
  double worst = -1e300;
  std::size_t evaluated = 0, strict_violations = 0;
  for (const auto& [name, model] : models) {
    for (const double t : {0.5, 1.0, 2.0}) {
      for (const double eps : {0.0, 0.1}) {
        const double bound = 1.0 / (std::numbers::pi * t);
        for (int k = 0; k < 400; ++k) {
          const complex lambda(-2.0 + 4.0 * uniform01(gen), -2.0 + 4.0 * uniform01(gen));
          const double rho = density(model, lambda, EllipticParams::circular(t), eps);
          worst = std::max(worst, rho - bound);
          if (eps > 0.0 && !(rho < bound)) ++strict_violations;
          ++evaluated;
        }
      }
    }
  }
  const bool ok = worst <= 1e-9 && strict_violations == 0;
  return {ok, fmt("max (rho - 1/(pi t)) = %.3g over %.0f points, strict violations at eps > 0: %.0f", worst,
                  static_cast<double>(evaluated), static_cast<double>(strict_violations))};
}

// 6. Total mass of the criterion 1 and 2 grids, and refinement.
Outcome total_mass(unsigned threads) {
  const EllipticParams p(2.0, 1.0);
  struct Case {
    SpectralModel model;
    GridBounds window;
  };
  const Case cases[] = {{SpectralModel::zero(), kDiskWindow}, {two_atoms(), kTwoAtomWindow}};
  bool ok = true;
  std::string detail;
  for (const Case& c : cases) {
    const double m201 = fill_grid(c.model, p, 0.0, c.window, 201, 201, threads).mass;
    const double m401 = fill_grid(c.model, p, 0.0, c.window, 401, 401, threads).mass;
    const double e201 = std::abs(m201 - 1.0), e401 = std::abs(m401 - 1.0);
    ok = ok && e201 <= 0.01 && e401 <= e201;
    if (!detail.empty()) detail += "; ";
    detail += fmt("|mass-1| %.3g at 201^2, %.3g at 401^2", e201, e401);
  }
  return {ok, detail};
}

// 7. Fuglede-Kadison determinant.
Outcome fk_checks() {
  const SpectralModel zero = SpectralModel::zero();
  const double d0 = fk_determinant(zero, 0.0, 1.0).value;
  const double err0 = std::abs(d0 - std::exp(-0.5));
  bool monotone = true;
  for (const complex lambda : {complex(0, 0), complex(0.1, 0), complex(0, 0.2), complex(-0.15, 0.1), complex(0.3, 0)}) {
    double prev = -1.0;
    for (const double t : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      const double d = fk_determinant(zero, lambda, t).value;
      monotone = monotone && d > prev;
      prev = d;
    }
  }
  double outside = 0.0;
  for (const complex lambda : {complex(1, 0), complex(0, -1.5), complex(2, 0), complex(-2, 2)}) {
    outside = std::max(outside, std::abs(fk_determinant(zero, lambda, 1.0).value - std::abs(lambda)) / std::abs(lambda));
  }
  const bool ok = err0 <= 1e-10 && monotone && outside <= 1e-12;
  return {ok, fmt("|Delta(0) - e^-1/2| = %.3g, ", err0) + (monotone ? "strictly increasing in t" : "NOT increasing in t") +
                  fmt(", max rel |Delta - |lambda|| for |lambda| >= 1 = %.3g", outside)};
}

// 8. Subordination solver properties.
Outcome subordination_checks() {
  const SpectralModel model = two_atoms();
  std::string detail;

  // (a) w(eps) decreases to w(0) uniformly on a 5 x 5 grid.
  const double t = 1.0;
  const double eps_list[] = {1e-2, 1e-4, 1e-6};
  double gaps[3] = {0, 0, 0};
  bool pointwise = true;
  for (int a = 0; a < 5; ++a) {
    for (int b = 0; b < 5; ++b) {
      const complex lambda(-1.5 + 0.75 * a, -1.0 + 0.5 * b);
      const LocalSpectrum ls = model.at(lambda);
      const double w0 = solve_w0(ls, t).w;
      double prev = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 3; ++k) {
        const double w = solve_w_reg(ls, t, eps_list[k]);
        pointwise = pointwise && w < prev && w > w0;
        prev = w;
        gaps[k] = std::max(gaps[k], w - w0);
      }
    }
  }
  const bool uniform = gaps[1] < gaps[0] && gaps[2] < gaps[1] && gaps[2] <= 0.05;
  detail += fmt("sup|w(eps)-w(0)| = %.3g, %.3g, %.3g", gaps[0], gaps[1], gaps[2]);

  // (b) -2 s ds/dlambda-bar = phi((lambda - x0) h^-2) / phi(h^-2), central differences.
  const EllipticParams p(2.0, 1.0);
  double worst_rel = 0.0;
  for (const complex lambda : {complex(0.9, 0.3), complex(-1.2, 0.2), complex(1.1, -0.4), complex(0.4, 0.5)}) {
    const double h = 1e-5;
    const double s = solve_s(model, lambda, p);
    const double sx = (solve_s(model, lambda + h, p) - solve_s(model, lambda - h, p)) / (2 * h);
    const double sy = (solve_s(model, lambda + complex(0, h), p) - solve_s(model, lambda - complex(0, h), p)) / (2 * h);
    const complex ds_dbar = 0.5 * complex(sx, sy);
    const TraceBundle tb = trace_bundle(model, lambda, s);
    const complex rhs = tb.cross / tb.h_inv_sq;
    worst_rel = std::max(worst_rel, std::abs(-2.0 * s * ds_dbar - rhs) / std::abs(rhs));
  }
  detail += fmt("; implicit derivative rel err %.3g", worst_rel);

  // (c) eps1 eps2 = eps0^2 and eps1(t) = eps2(1 - t).
  double prod_err = 0.0, sym_err = 0.0;
  for (const complex lambda : {complex(0.5, 0.3), complex(-1.0, 0.1), complex(2.0, 1.0)}) {
    const double eps = 0.1;
    const SigmaSolution sol = solve_sigma_system(model, lambda, 2.0, 1.0, eps);
    std::vector<double> grid(101);
    for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = static_cast<double>(k) / 100.0;
    const EpsilonProfiles pr = epsilon_profiles(sol, eps, 2.0, 1.0, grid);
    const double e2 = sol.eps0 * sol.eps0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      prod_err = std::max(prod_err, std::abs(pr.eps1[k] * pr.eps2[k] - e2) / e2);
      sym_err = std::max(sym_err, std::abs(pr.eps1[k] - pr.eps2[grid.size() - 1 - k]) / pr.eps1[k]);
    }
  }
  detail += fmt("; profile product err %.3g, symmetry err %.3g", prod_err, sym_err);

  const bool ok = pointwise && uniform && worst_rel <= 1e-5 && prod_err <= 1e-10 && sym_err <= 1e-10;
  return {ok, detail};
}

// 9. phi_inverse o phi = id for the regularized triangular map.
Outcome homeomorphism_round_trip() {
  const complex gamma(0.3, 0.4);
  const EllipticParams p(2.0, 1.0, gamma);
  const PushforwardMap map(two_atoms(), p, 0.1);
  double worst = 0.0;
  for (int a = 0; a < 5; ++a) {
    for (int b = 0; b < 5; ++b) {
      const complex lambda(-2.0 + a, -2.0 + b);
      worst = std::max(worst, std::abs(phi_inverse(map, phi(map, lambda)) - lambda));
    }
  }
  return {worst <= 1e-9, fmt("|gamma| = %.2f <= sqrt 2; max |phi^-1(phi(lambda)) - lambda| = %.3g", std::abs(gamma), worst)};
}

// 10. Random-matrix spectra against the predicted densities.
Outcome random_matrix_agreement(unsigned threads) {
  const auto start = Clock::now();
  const EllipticParams p = EllipticParams::circular(1.0);
  const std::size_t n = 500;
  const std::uint64_t seed = 2024;

  struct Case {
    const char* name;
    SpectralModel model;
    GridBounds window;
  };
  const Case cases[] = {{"Ginibre", SpectralModel::zero(), GridBounds::square(1.2)},
                        {"diag(+-1)", two_atoms(), GridBounds{-2.2, 2.2, -1.1, 1.1}}};
  bool ok = true;
  std::string detail;
  for (const Case& c : cases) {
    const DensityGrid predicted = fill_grid(c.model, p, 0.0, c.window, 240, 240, threads);
    const Eigen::MatrixXcd x0 = x0_matrix(c.model, n);
    std::vector<EnsembleSample> samples(4);
    parallel_for(samples.size(), threads, [&](std::size_t k) { samples[k] = sample_deformed(x0, p, stream_seed(seed, k)); });
    const SpectrumScore score = compare_spectrum(samples, predicted, 8);
    ok = ok && score.sup_cell_discrepancy <= 0.15 && score.inside_support_fraction >= 0.97;
    if (!detail.empty()) detail += "; ";
    detail += std::string(c.name) + fmt(": sup cell discrepancy %.3g over %.0f cells, inside support %.4f",
                                        score.sup_cell_discrepancy, static_cast<double>(score.scored_cells),
                                        score.inside_support_fraction);
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  ok = ok && secs < 60.0;
  detail += fmt("; %.1fs", secs);
  return {ok, detail};
}

// 11. Second moments of the sampled ensemble.
Outcome covariance_realization() {
  struct Stat {
    double sum = 0.0, sum2 = 0.0;
    void add(double v) {
      sum += v;
      sum2 += v * v;
    }
  };
  const std::size_t n = 3, draws = 100000;
  const std::uint64_t seed = 77;
  const double sqrt2 = std::numbers::sqrt2;
  const EllipticParams sets[] = {EllipticParams(1, 1, 0), EllipticParams(2, 1, 0.5), EllipticParams(2, 1, sqrt2 * 0.99)};
  bool ok = true;
  double worst_z = 0.0;
  for (const EllipticParams& p : sets) {
    // |a01|^2, |a10|^2, Re/Im a01 a10, Re/Im a01 conj(a10), |a00|^2, Re/Im a00^2
    Stat s[9];
    for (std::size_t k = 0; k < draws; ++k) {
      const Eigen::MatrixXcd m = sample_ensemble(n, p, stream_seed(seed, k)).matrix;
      const complex u = m(0, 1), l = m(1, 0), d = m(0, 0);
      const complex uv = u * l, uc = u * std::conj(l), dd = d * d;
      const double v[9] = {std::norm(u), std::norm(l), uv.real(), uv.imag(), uc.real(), uc.imag(), std::norm(d),
                           dd.real(),    dd.imag()};
      for (int q = 0; q < 9; ++q) s[q].add(v[q]);
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    const complex g = p.gamma() * inv_n;
    const double target[9] = {p.alpha() * inv_n, p.beta() * inv_n, g.real(), g.imag(), 0.0, 0.0,
                              0.5 * (p.alpha() + p.beta()) * inv_n, g.real(), g.imag()};
    for (int q = 0; q < 9; ++q) {
      const double mean = s[q].sum / draws;
      const double var = s[q].sum2 / draws - mean * mean;
      const double se = std::sqrt(std::max(var, 0.0) / draws);
      const double z = se > 0.0 ? std::abs(mean - target[q]) / se : (mean == target[q] ? 0.0 : 1e300);
      worst_z = std::max(worst_z, z);
      ok = ok && z <= 3.0;
    }
  }
  return {ok, fmt("27 moments over 1e5 draws each; worst deviation %.2f standard errors", worst_z)};
}

}  // namespace

std::string format_result(const CriterionResult& r) {
  char head[96];
  std::snprintf(head, sizeof head, "[%s] %2d %-34s (%6.2fs) ", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds);
  return head + r.detail;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream* out) {
  const unsigned th = options.threads;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"uniform disk", [&] { return uniform_disk(th); }},
      {"triangular equals circular", [&] { return triangular_equals_circular(th); }},
      {"ellipse push-forward", [&] { return ellipse_pushforward(th); }},
      {"boundary radius alpha=1.2 beta=0.2", [] { return boundary_radius(); }},
      {"density bound", [] { return density_bound(); }},
      {"total mass", [&] { return total_mass(th); }},
      {"Fuglede-Kadison determinant", [] { return fk_checks(); }},
      {"subordination solver properties", [] { return subordination_checks(); }},
      {"homeomorphism round trip", [] { return homeomorphism_round_trip(); }},
      {"random-matrix agreement", [&] { return random_matrix_agreement(th); }},
      {"ensemble covariance", [] { return covariance_realization(); }},
  };
  std::vector<CriterionResult> results;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), id) == options.only.end()) continue;
    CriterionResult r;
    r.id = id;
    r.name = criteria[k].first;
    const auto start = Clock::now();
    try {
      const Outcome o = criteria[k].second();
      r.pass = o.pass;
      r.detail = o.detail;
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    if (out) *out << format_result(r) << std::endl;
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace brown
