#include "brownmeasure/pushforward.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "brownmeasure/error.hpp"
#include "brownmeasure/parallel.hpp"

namespace brown {

namespace {

constexpr double kSingularJacobian = 1e-8;
constexpr double kSingularScan = 1e-6;

using Polygon = std::vector<complex>;

double cross2(complex a, complex b) { return a.real() * b.imag() - a.imag() * b.real(); }

double signed_area(const Polygon& p) {
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) acc += cross2(p[k], p[(k + 1) % p.size()]);
  return 0.5 * acc;
}

bool strictly_convex(const std::array<complex, 4>& q) {
  int sign = 0;
  for (int k = 0; k < 4; ++k) {
    const double c = cross2(q[(k + 1) % 4] - q[k], q[(k + 2) % 4] - q[(k + 1) % 4]);
    const int s = c > 0.0 ? 1 : (c < 0.0 ? -1 : 0);
    if (s == 0 || (sign != 0 && s != sign)) return false;
    sign = s;
  }
  return true;
}

// One Sutherland-Hodgman pass against the half-plane coord(axis) >= bound
// (keep_above) or <= bound.
Polygon clip_axis(const Polygon& in, bool imag_axis, double bound, bool keep_above) {
  Polygon out;
  if (in.empty()) return out;
  auto coord = [&](complex z) { return imag_axis ? z.imag() : z.real(); };
  auto inside = [&](complex z) { return keep_above ? coord(z) >= bound : coord(z) <= bound; };
  for (std::size_t k = 0; k < in.size(); ++k) {
    const complex a = in[k];
    const complex b = in[(k + 1) % in.size()];
    const bool ia = inside(a);
    const bool ib = inside(b);
    if (ia) out.push_back(a);
    if (ia != ib) {
      const double s = (bound - coord(a)) / (coord(b) - coord(a));
      out.push_back(a + s * (b - a));
    }
  }
  return out;
}

double clipped_area(const Polygon& poly, double x0, double x1, double y0, double y1) {
  Polygon p = clip_axis(poly, false, x0, true);
  p = clip_axis(p, false, x1, false);
  p = clip_axis(p, true, y0, true);
  p = clip_axis(p, true, y1, false);
  return p.size() < 3 ? 0.0 : std::abs(signed_area(p));
}

struct BinAccumulator {
  const GridBounds& window;
  std::size_t nx;
  std::size_t ny;
  double dx;
  double dy;
  std::vector<double> mass;
  double lost = 0.0;
  std::size_t fallbacks = 0;

  BinAccumulator(const GridBounds& w, std::size_t nx_, std::size_t ny_)
      : window(w), nx(nx_), ny(ny_), dx((w.x_max - w.x_min) / nx_), dy((w.y_max - w.y_min) / ny_), mass(nx_ * ny_, 0.0) {}

  void deposit_point(complex z, double m) {
    if (!window.contains(z)) {
      lost += m;
      return;
    }
    const auto i = std::min(nx - 1, static_cast<std::size_t>((z.real() - window.x_min) / dx));
    const auto j = std::min(ny - 1, static_cast<std::size_t>((z.imag() - window.y_min) / dy));
    mass[j * nx + i] += m;
  }

  void deposit_polygon(const Polygon& poly, double area, double m) {
    double lo_x = poly[0].real(), hi_x = lo_x, lo_y = poly[0].imag(), hi_y = lo_y;
    for (const complex v : poly) {
      lo_x = std::min(lo_x, v.real());
      hi_x = std::max(hi_x, v.real());
      lo_y = std::min(lo_y, v.imag());
      hi_y = std::max(hi_y, v.imag());
    }
    auto first_bin = [](double v, double origin, double step, std::size_t n) {
      const double f = std::floor((v - origin) / step);
      return static_cast<std::size_t>(std::clamp(f, 0.0, static_cast<double>(n - 1)));
    };
    double placed = 0.0;
    if (hi_x > window.x_min && lo_x < window.x_max && hi_y > window.y_min && lo_y < window.y_max) {
      const std::size_t i0 = first_bin(lo_x, window.x_min, dx, nx), i1 = first_bin(hi_x, window.x_min, dx, nx);
      const std::size_t j0 = first_bin(lo_y, window.y_min, dy, ny), j1 = first_bin(hi_y, window.y_min, dy, ny);
      const double density = m / area;
      for (std::size_t j = j0; j <= j1; ++j) {
        const double y0 = window.y_min + static_cast<double>(j) * dy;
        for (std::size_t i = i0; i <= i1; ++i) {
          const double x0 = window.x_min + static_cast<double>(i) * dx;
          const double a = clipped_area(poly, x0, x0 + dx, y0, y0 + dy);
          if (a > 0.0) {
            mass[j * nx + i] += density * a;
            placed += density * a;
          }
        }
      }
    }
    lost += std::max(0.0, m - placed);
  }
};

}  // namespace

PushforwardMap::PushforwardMap(SpectralModel model, EllipticParams params, double eps)
    : model_(std::move(model)), params_(params), eps_(eps),
      kind_(params.is_elliptic() ? Kind::Elliptic : Kind::Triangular) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw InvalidArgument("epsilon must be finite and >= 0");
}

double PushforwardMap::regularizer(const LocalSpectrum& ls) const {
  if (eps_ == 0.0) return solve_s(ls, params_);
  if (kind_ == Kind::Elliptic) return solve_w_reg(ls, params_.alpha(), eps_);
  return solve_sigma_system(ls, params_.alpha(), params_.beta(), eps_).eps0;
}

complex phi(const PushforwardMap& map, complex lambda) {
  const complex gamma = map.params().gamma();
  if (gamma == complex{}) return lambda;
  return with_lambda(lambda, [&] {
    const LocalSpectrum ls = map.model().at(lambda);
    return lambda + gamma * ls.p0(map.regularizer(ls));
  });
}

Jacobian jacobian(const PushforwardMap& map, complex lambda, double h) {
  if (!(h > 0.0)) h = 1e-5 * std::max(1.0, std::abs(lambda));
  const complex dx = (phi(map, lambda + h) - phi(map, lambda - h)) / (2.0 * h);
  const complex dy = (phi(map, lambda + complex(0.0, h)) - phi(map, lambda - complex(0.0, h))) / (2.0 * h);
  Jacobian j;
  j.matrix << dx.real(), dy.real(), dx.imag(), dy.imag();
  j.det = j.matrix.determinant();
  j.singular = std::abs(j.det) < kSingularJacobian;
  return j;
}

complex phi_inverse(const PushforwardMap& map, complex z) {
  require_finite(z, "z");
  if (!(map.epsilon() > 0.0)) throw InvalidArgument("phi_inverse requires epsilon > 0");
  if (map.params().gamma() == complex{}) return z;

  const double scale = std::max(1.0, std::abs(z));
  const double inner_tol = 1e-13 * scale;
  complex lambda = z;
  complex r = phi(map, lambda) - z;

  // lambda <- lambda - theta (phi(lambda) - z); theta = 1 is lambda <- z - gamma p0(lambda).
  double theta = 1.0;
  for (int it = 0; it < 200 && std::abs(r) > inner_tol && theta >= 1.0 / 64.0; ++it) {
    const complex cand = lambda - theta * r;
    const complex rc = phi(map, cand) - z;
    if (std::abs(rc) < std::abs(r)) {
      lambda = cand;
      r = rc;
    } else {
      theta *= 0.5;
    }
  }

  for (int it = 0; it < 100 && std::abs(r) > inner_tol; ++it) {
    const Jacobian jac = jacobian(map, lambda);
    const Eigen::Vector2d step = jac.matrix.fullPivLu().solve(Eigen::Vector2d(-r.real(), -r.imag()));
    if (!step.allFinite()) break;
    double damp = 1.0;
    bool improved = false;
    for (int k = 0; k < 40; ++k, damp *= 0.5) {
      const complex cand = lambda + damp * complex(step(0), step(1));
      const complex rc = phi(map, cand) - z;
      if (std::abs(rc) < std::abs(r)) {
        lambda = cand;
        r = rc;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }

  if (!(std::abs(r) <= 1e-10 * scale)) {
    throw NumericalFailure("phi_inverse did not converge (residual " + std::to_string(std::abs(r)) + ")").at(z);
  }
  return lambda;
}

SingularScan singular_scan(const PushforwardMap& map, const GridBounds& bounds, std::size_t n, unsigned threads) {
  if (map.epsilon() != 0.0) throw InvalidArgument("singular_scan requires an epsilon = 0 map");
  if (n < 1) throw InvalidArgument("scan resolution must be positive");
  const DensityGrid cells(bounds, n, n);
  std::vector<std::vector<SingularPoint>> rows(n);
  std::vector<std::size_t> scanned(n, 0);
  parallel_for(n, threads, [&](std::size_t j) {
    for (std::size_t i = 0; i < n; ++i) {
      const complex lambda = cells.center(i, j);
      const double h = 1e-5 * std::max(1.0, std::abs(lambda));
      bool inside = true;
      for (const complex d : {complex(0, 0), complex(h, 0), complex(-h, 0), complex(0, h), complex(0, -h)}) {
        inside = inside && in_xi(map.model(), lambda + d, map.params());
      }
      if (!inside) continue;
      ++scanned[j];
      const Jacobian jac = jacobian(map, lambda, h);
      if (std::abs(jac.det) < kSingularScan) rows[j].push_back({lambda, jac.det});
    }
  });
  SingularScan out;
  for (std::size_t j = 0; j < n; ++j) {
    out.points.insert(out.points.end(), rows[j].begin(), rows[j].end());
    out.scanned += scanned[j];
  }
  return out;
}

TransportedGrid transport(const PushforwardMap& map, const DensityGrid& source, const GridBounds& target,
                          std::size_t nx, std::size_t ny, const TransportOptions& options) {
  TransportedGrid out;
  out.binned = DensityGrid(target, nx, ny);
  out.binned.params = map.params();
  out.binned.epsilon = map.epsilon();

  const std::size_t snx = source.nx, sny = source.ny;
  const double cell_area = source.cell_area();
  for (std::size_t k = 0; k < source.values.size(); ++k) out.source_mass += source.values[k] * cell_area;
  if (!(out.source_mass > 0.0)) throw InvalidArgument("transport requires a source with positive mass");

  // Images of the cell centres, and of the cell corners touching any mass.
  std::vector<complex> centers(snx * sny);
  std::vector<complex> corners((snx + 1) * (sny + 1));
  std::vector<char> corner_needed(corners.size(), 0);
  const bool cell_image = options.deposit == Deposit::CellImage;
  for (std::size_t j = 0; j < sny; ++j) {
    for (std::size_t i = 0; i < snx; ++i) {
      if (source.at(i, j) <= 0.0 || !cell_image) continue;
      for (std::size_t dj = 0; dj < 2; ++dj) {
        for (std::size_t di = 0; di < 2; ++di) corner_needed[(j + dj) * (snx + 1) + i + di] = 1;
      }
    }
  }
  parallel_for(sny + 1, options.threads, [&](std::size_t j) {
    for (std::size_t i = 0; i <= snx; ++i) {
      if (j < sny && i < snx && source.at(i, j) > 0.0) centers[j * snx + i] = phi(map, source.center(i, j));
      if (corner_needed[j * (snx + 1) + i]) {
        const complex c(source.bounds.x_min + static_cast<double>(i) * source.dx(),
                        source.bounds.y_min + static_cast<double>(j) * source.dy());
        corners[j * (snx + 1) + i] = phi(map, c);
      }
    }
  });

  for (std::size_t j = 0; j < sny; ++j) {
    for (std::size_t i = 0; i < snx; ++i) {
      const double m = source.at(i, j) * cell_area;
      if (m > 0.0) out.points.emplace_back(centers[j * snx + i], m);
    }
  }

  // Fixed chunking of source rows keeps the summation order independent of the thread count.
  const std::size_t chunks = std::min<std::size_t>(sny, 16);
  std::vector<BinAccumulator> partial;
  partial.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) partial.emplace_back(target, nx, ny);
  parallel_for(chunks, options.threads, [&](std::size_t c) {
    BinAccumulator& acc = partial[c];
    for (std::size_t j = c * sny / chunks; j < (c + 1) * sny / chunks; ++j) {
      for (std::size_t i = 0; i < snx; ++i) {
        const double m = source.at(i, j) * cell_area;
        if (!(m > 0.0)) continue;
        if (!cell_image) {
          acc.deposit_point(centers[j * snx + i], m);
          continue;
        }
        const std::array<complex, 4> quad{corners[j * (snx + 1) + i], corners[j * (snx + 1) + i + 1],
                                          corners[(j + 1) * (snx + 1) + i + 1], corners[(j + 1) * (snx + 1) + i]};
        const Polygon poly(quad.begin(), quad.end());
        const double area = std::abs(signed_area(poly));
        if (!strictly_convex(quad) || !(area > 1e-12 * cell_area)) {
          ++acc.fallbacks;
          acc.deposit_point(centers[j * snx + i], m);
          continue;
        }
        acc.deposit_polygon(poly, area, m);
      }
    }
  });

  const double bin_area = out.binned.cell_area();
  for (const BinAccumulator& acc : partial) {
    for (std::size_t k = 0; k < acc.mass.size(); ++k) out.binned.values[k] += acc.mass[k];
    out.lost_mass += acc.lost;
    out.point_fallbacks += acc.fallbacks;
  }
  for (double& v : out.binned.values) v /= bin_area;
  out.binned.update_mass();

  if (out.lost_fraction() > options.max_lost_fraction) {
    throw InvalidArgument("target window loses " + std::to_string(100.0 * out.lost_fraction()) +
                          "% of the transported mass");
  }
  return out;
}

}  // namespace brown
