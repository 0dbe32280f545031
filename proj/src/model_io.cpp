#include "brownmeasure/model_io.hpp"

#include <cstdlib>
#include <fstream>
#include <string>

#include "brownmeasure/error.hpp"

namespace brown {

namespace {

double parse_real(const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  while (end && (*end == ' ' || *end == '\t')) ++end;
  if (end == begin || *end != '\0') throw InvalidArgument("not a number: '" + text + "'");
  return v;
}

std::vector<SpectralNode> parse_nodes(const nlohmann::json& j, const char* key) {
  std::vector<SpectralNode> out;
  if (!j.contains(key)) return out;
  const auto& rows = j.at(key);
  if (!rows.is_array()) throw InvalidArgument(std::string("'") + key + "' must be an array of [location, weight]");
  for (const auto& row : rows) {
    if (!row.is_array() || row.size() != 2 || !row[1].is_number()) {
      throw InvalidArgument(std::string("each '") + key + "' row must be [location, weight]");
    }
    out.push_back({parse_complex(row[0]), row[1].get<double>()});
  }
  return out;
}

}  // namespace

complex parse_complex(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) return {parse_real(text), 0.0};
  return {parse_real(text.substr(0, comma)), parse_real(text.substr(comma + 1))};
}

complex parse_complex(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_string()) return parse_complex(j.get<std::string>());
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  throw InvalidArgument("complex value must be a number, \"re,im\" or [re, im]: " + j.dump());
}

SpectralModel parse_model(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("variant") || !j.at("variant").is_string()) {
    throw InvalidArgument("model needs a string field 'variant'");
  }
  const std::string variant = j.at("variant").get<std::string>();
  if (variant == "self_adjoint") {
    std::vector<std::pair<double, double>> atoms, abscont;
    for (auto [list, key] : {std::pair{&atoms, "atoms"}, std::pair{&abscont, "abscont"}}) {
      for (const auto& n : parse_nodes(j, key)) {
        if (n.location.imag() != 0.0) throw InvalidArgument("self_adjoint locations must be real");
        list->emplace_back(n.location.real(), n.weight);
      }
    }
    return SpectralModel::self_adjoint(std::move(atoms), std::move(abscont));
  }
  if (variant == "normal_plane") {
    return SpectralModel::normal_plane(parse_nodes(j, "atoms"), parse_nodes(j, "abscont"));
  }
  if (variant == "dense_matrix") {
    if (!j.contains("n") || !j.at("n").is_number_integer() || j.at("n").get<long long>() < 1) {
      throw InvalidArgument("dense_matrix needs a positive integer 'n'");
    }
    const auto n = static_cast<Eigen::Index>(j.at("n").get<long long>());
    if (!j.contains("entries") || !j.at("entries").is_array() ||
        j.at("entries").size() != static_cast<std::size_t>(n * n)) {
      throw InvalidArgument("dense_matrix needs 'entries' with n*n values");
    }
    Eigen::MatrixXcd a(n, n);
    const auto& e = j.at("entries");
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) a(r, c) = parse_complex(e[static_cast<std::size_t>(r * n + c)]);
    }
    return SpectralModel::dense_matrix(std::move(a));
  }
  throw InvalidArgument("unknown model variant '" + variant + "'");
}

SpectralModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read model file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("model file " + path.string() + ": " + e.what());
  }
  return parse_model(j);
}

}  // namespace brown
