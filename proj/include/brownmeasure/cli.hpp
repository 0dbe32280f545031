#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "brownmeasure/density_grid.hpp"
#include "brownmeasure/spectral_model.hpp"
#include "brownmeasure/subordination.hpp"

namespace brown::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIo = 4;

struct GridSpec {
  GridBounds bounds = GridBounds::square(2.0);
  std::size_t nx = 201;
  std::size_t ny = 201;
};

struct JobConfig {
  std::string command;
  SpectralModel model = SpectralModel::zero();
  EllipticParams params = EllipticParams::circular(1.0);
  double epsilon = 0.0;
  GridSpec grid;
  GridSpec target;
  std::filesystem::path out_dir = ".";
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::size_t samples = 4;
  std::size_t n = 500;
  std::size_t coarse_n = 8;
  bool rotate = false;
};

/// Builds a job from the merged settings object (config file plus --set
/// overrides). Throws InvalidArgument on unknown commands, missing or
/// conflicting parameters, or malformed values.
JobConfig make_job(const std::string& command, const nlohmann::json& settings);

/// Applies one "key=value" override; dotted keys address nested objects and
/// the value is read as JSON when it parses, otherwise as a string.
void apply_override(nlohmann::json& settings, const std::string& assignment);

/// Executes a job, writing artifacts under job.out_dir; returns the exit code.
int run(const JobConfig& job, std::ostream& log);

/// Full command line entry point; maps errors to exit codes.
int main(int argc, char** argv);

}  // namespace brown::cli
