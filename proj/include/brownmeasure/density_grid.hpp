#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "brownmeasure/subordination.hpp"

namespace brown {

struct GridBounds {
  double x_min = -1.0;
  double x_max = 1.0;
  double y_min = -1.0;
  double y_max = 1.0;

  /// Throws InvalidArgument unless finite with x_min < x_max and y_min < y_max.
  void validate() const;
  bool contains(complex z) const noexcept {
    return z.real() >= x_min && z.real() < x_max && z.imag() >= y_min && z.imag() < y_max;
  }
  static GridBounds square(double half_width) { return {-half_width, half_width, -half_width, half_width}; }
};

/// Cell-centred grid of density values. Cell (i, j) spans
/// [x_min + i dx, x_min + (i+1) dx) x [y_min + j dy, y_min + (j+1) dy) and its
/// value is sampled at the centre; values are stored with i fastest.
struct DensityGrid {
  GridBounds bounds;
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<double> values;
  double mass = 0.0;
  EllipticParams params = EllipticParams::circular(1.0);
  double epsilon = 0.0;

  DensityGrid() = default;
  DensityGrid(GridBounds b, std::size_t nx, std::size_t ny);

  double dx() const noexcept { return (bounds.x_max - bounds.x_min) / static_cast<double>(nx); }
  double dy() const noexcept { return (bounds.y_max - bounds.y_min) / static_cast<double>(ny); }
  double cell_area() const noexcept { return dx() * dy(); }
  complex center(std::size_t i, std::size_t j) const noexcept {
    return {bounds.x_min + (static_cast<double>(i) + 0.5) * dx(), bounds.y_min + (static_cast<double>(j) + 0.5) * dy()};
  }
  std::size_t index(std::size_t i, std::size_t j) const noexcept { return j * nx + i; }
  double& at(std::size_t i, std::size_t j) { return values[index(i, j)]; }
  double at(std::size_t i, std::size_t j) const { return values[index(i, j)]; }

  /// Midpoint-rule integral of the values; also stored in `mass`.
  double update_mass();
};

/// `x,y,density` rows at cell centres, 17 significant digits.
void write_grid_csv(const DensityGrid& grid, const std::filesystem::path& path);

/// Bounds, resolution, parameters, epsilon and mass.
nlohmann::json grid_metadata(const DensityGrid& grid);
void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace brown
