#pragma once

#include <filesystem>

#include <json.hpp>

#include "brownmeasure/spectral_model.hpp"

namespace brown {

/// Builds a model from its JSON description:
///   {"variant": "self_adjoint" | "normal_plane", "atoms": [[loc, w], ...], "abscont": [[loc, w], ...]}
///   {"variant": "dense_matrix", "n": N, "entries": [N*N values, row-major]}
/// A location or entry is a number, a string "re,im", or a pair [re, im].
/// Throws InvalidArgument on malformed input.
SpectralModel parse_model(const nlohmann::json& j);

/// Reads and parses a model file; IoError if it cannot be read.
SpectralModel load_model(const std::filesystem::path& path);

/// A real number "re" or two comma-separated reals "re,im".
complex parse_complex(const std::string& text);
complex parse_complex(const nlohmann::json& j);

}  // namespace brown
