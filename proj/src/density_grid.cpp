#include "brownmeasure/density_grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "brownmeasure/error.hpp"

namespace brown {

void GridBounds::validate() const {
  for (const double v : {x_min, x_max, y_min, y_max}) {
    if (!std::isfinite(v)) throw InvalidArgument("grid bounds must be finite");
  }
  if (!(x_min < x_max) || !(y_min < y_max)) throw InvalidArgument("grid bounds must satisfy min < max");
}

DensityGrid::DensityGrid(GridBounds b, std::size_t nx_, std::size_t ny_) : bounds(b), nx(nx_), ny(ny_) {
  bounds.validate();
  if (nx < 1 || ny < 1) throw InvalidArgument("grid resolution must be positive");
  values.assign(nx * ny, 0.0);
}

double DensityGrid::update_mass() {
  double acc = 0.0;
  for (const double v : values) acc += v;
  mass = acc * cell_area();
  return mass;
}

void write_grid_csv(const DensityGrid& grid, const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  std::fputs("x,y,density\n", f);
  for (std::size_t j = 0; j < grid.ny; ++j) {
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const complex c = grid.center(i, j);
      std::fprintf(f, "%.17g,%.17g,%.17g\n", c.real(), c.imag(), grid.at(i, j));
    }
  }
  if (std::fclose(f) != 0) throw IoError("failed writing " + path.string());
}

nlohmann::json grid_metadata(const DensityGrid& grid) {
  nlohmann::json j;
  j["bounds"] = {{"x_min", grid.bounds.x_min},
                 {"x_max", grid.bounds.x_max},
                 {"y_min", grid.bounds.y_min},
                 {"y_max", grid.bounds.y_max}};
  j["nx"] = grid.nx;
  j["ny"] = grid.ny;
  j["params"] = {{"alpha", grid.params.alpha()},
                 {"beta", grid.params.beta()},
                 {"gamma", {grid.params.gamma().real(), grid.params.gamma().imag()}},
                 {"t_eff", grid.params.t_eff()}};
  j["epsilon"] = grid.epsilon;
  j["mass"] = grid.mass;
  return j;
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << contents;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace brown
