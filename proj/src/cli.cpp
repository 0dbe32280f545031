#include "brownmeasure/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>

#include <CLI11.hpp>

#include "brownmeasure/acceptance.hpp"
#include "brownmeasure/brown_measure.hpp"
#include "brownmeasure/error.hpp"
#include "brownmeasure/model_io.hpp"
#include "brownmeasure/parallel.hpp"
#include "brownmeasure/pushforward.hpp"
#include "brownmeasure/randmat.hpp"

namespace brown::cli {

namespace {

using nlohmann::json;

const std::set<std::string> kCommands = {"density", "pushforward", "fkdet", "domain", "randmat-compare", "selftest"};
const std::set<std::string> kKeys = {"model", "t",     "alpha",   "beta", "gamma",    "epsilon", "grid",   "target_grid",
                                     "seed",  "threads", "samples", "n",  "coarse_n", "rotate",  "out"};

template <class T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument("setting '" + key + "' has the wrong type: " + j.at(key).dump());
  }
}

double get_number(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_complex(v.get<std::string>()).real();
  throw InvalidArgument("setting '" + key + "' must be a number");
}

std::size_t get_count(const json& j, const std::string& key) {
  const double v = get_number(j, key);
  if (!(v >= 1.0) || v != std::floor(v)) throw InvalidArgument("setting '" + key + "' must be a positive integer");
  return static_cast<std::size_t>(v);
}

GridSpec parse_grid(const json& j, const std::string& name, GridSpec spec) {
  if (!j.is_object()) throw InvalidArgument("'" + name + "' must be an object");
  for (const auto& [k, v] : j.items()) {
    if (k == "x_min") spec.bounds.x_min = get_number(j, k);
    else if (k == "x_max") spec.bounds.x_max = get_number(j, k);
    else if (k == "y_min") spec.bounds.y_min = get_number(j, k);
    else if (k == "y_max") spec.bounds.y_max = get_number(j, k);
    else if (k == "nx") spec.nx = get_count(j, k);
    else if (k == "ny") spec.ny = get_count(j, k);
    else throw InvalidArgument("unknown key '" + name + "." + k + "'");
  }
  spec.bounds.validate();
  return spec;
}

EllipticParams parse_params(const json& s) {
  const bool has_t = s.contains("t");
  const bool has_a = s.contains("alpha"), has_b = s.contains("beta");
  if (has_a != has_b) throw InvalidArgument("alpha and beta must be given together");
  if (has_t == has_a) throw InvalidArgument("give exactly one of t or the pair (alpha, beta)");
  const complex gamma = s.contains("gamma") ? parse_complex(s.at("gamma")) : complex{};
  if (has_t) return EllipticParams::circular(get_number(s, "t"), gamma);
  return EllipticParams(get_number(s, "alpha"), get_number(s, "beta"), gamma);
}

std::filesystem::path prepare_out(const JobConfig& job) {
  std::error_code ec;
  std::filesystem::create_directories(job.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + job.out_dir.string() + ": " + ec.message());
  return job.out_dir;
}

void write_json(const std::filesystem::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

int run_density(const JobConfig& job, std::ostream& log) {
  const auto out = prepare_out(job);
  const DensityGrid g =
      fill_grid(job.model, job.params.with_gamma({}), job.epsilon, job.grid.bounds, job.grid.nx, job.grid.ny, job.threads);
  write_grid_csv(g, out / "density.csv");
  write_json(out / "density.json", grid_metadata(g));
  log << "density: mass " << g.mass << " -> " << (out / "density.csv").string() << "\n";
  return kExitOk;
}

int run_pushforward(const JobConfig& job, std::ostream& log) {
  const auto out = prepare_out(job);
  const DensityGrid source =
      fill_grid(job.model, job.params.with_gamma({}), job.epsilon, job.grid.bounds, job.grid.nx, job.grid.ny, job.threads);
  write_grid_csv(source, out / "source.csv");
  write_json(out / "source.json", grid_metadata(source));

  const PushforwardMap map(job.model, job.params, job.epsilon);
  TransportOptions opt;
  opt.threads = job.threads;
  const TransportedGrid tg = transport(map, source, job.target.bounds, job.target.nx, job.target.ny, opt);
  write_grid_csv(tg.binned, out / "pushforward.csv");
  json meta = grid_metadata(tg.binned);
  meta["source_mass"] = tg.source_mass;
  meta["lost_mass"] = tg.lost_mass;
  meta["lost_fraction"] = tg.lost_fraction();
  meta["point_fallbacks"] = tg.point_fallbacks;
  write_json(out / "pushforward.json", meta);

  const PushforwardMap map0(job.model, job.params, 0.0);
  const SingularScan scan = singular_scan(map0, job.grid.bounds, std::min(job.grid.nx, job.grid.ny), job.threads);
  json report;
  report["threshold"] = 1e-6;
  report["scanned_cells"] = scan.scanned;
  report["singular_cells"] = scan.points.size();
  report["all_scanned_singular"] = scan.scanned > 0 && scan.points.size() == scan.scanned;
  json pts = json::array();
  for (const auto& p : scan.points) pts.push_back({{"x", p.lambda.real()}, {"y", p.lambda.imag()}, {"det", p.det}});
  report["points"] = std::move(pts);
  write_json(out / "singular_scan.json", report);
  log << "pushforward: lost fraction " << tg.lost_fraction() << ", singular cells " << scan.points.size() << "/"
      << scan.scanned << "\n";
  return kExitOk;
}

int run_fkdet(const JobConfig& job, std::ostream& log) {
  if (!job.params.is_elliptic()) throw InvalidArgument("fkdet needs the circular parameter t");
  const auto out = prepare_out(job);
  const DensityGrid cells(job.grid.bounds, job.grid.nx, job.grid.ny);
  std::vector<FkDeterminant> values(cells.nx * cells.ny);
  parallel_for(cells.ny, job.threads, [&](std::size_t j) {
    for (std::size_t i = 0; i < cells.nx; ++i) {
      values[cells.index(i, j)] = fk_determinant(job.model, cells.center(i, j), job.params.alpha());
    }
  });
  std::FILE* f = std::fopen((out / "fkdet.csv").c_str(), "w");
  if (!f) throw IoError("cannot open " + (out / "fkdet.csv").string());
  std::fputs("x,y,fk_determinant,degenerate\n", f);
  std::size_t degenerate = 0;
  for (std::size_t j = 0; j < cells.ny; ++j) {
    for (std::size_t i = 0; i < cells.nx; ++i) {
      const complex c = cells.center(i, j);
      const FkDeterminant& d = values[cells.index(i, j)];
      degenerate += d.degenerate;
      std::fprintf(f, "%.17g,%.17g,%.17g,%d\n", c.real(), c.imag(), d.value, d.degenerate ? 1 : 0);
    }
  }
  if (std::fclose(f) != 0) throw IoError("failed writing fkdet.csv");
  log << "fkdet: " << values.size() << " cells, " << degenerate << " degenerate\n";
  return kExitOk;
}

int run_domain(const JobConfig& job, std::ostream& log) {
  const auto out = prepare_out(job);
  const DensityGrid cells(job.grid.bounds, job.grid.nx, job.grid.ny);
  std::vector<char> inside(cells.nx * cells.ny, 0);
  parallel_for(cells.ny, job.threads, [&](std::size_t j) {
    for (std::size_t i = 0; i < cells.nx; ++i) inside[cells.index(i, j)] = in_xi(job.model, cells.center(i, j), job.params);
  });
  std::FILE* f = std::fopen((out / "domain.csv").c_str(), "w");
  if (!f) throw IoError("cannot open " + (out / "domain.csv").string());
  std::fputs("x,y,in_domain\n", f);
  std::size_t count = 0;
  for (std::size_t j = 0; j < cells.ny; ++j) {
    for (std::size_t i = 0; i < cells.nx; ++i) {
      const complex c = cells.center(i, j);
      count += inside[cells.index(i, j)];
      std::fprintf(f, "%.17g,%.17g,%d\n", c.real(), c.imag(), inside[cells.index(i, j)] ? 1 : 0);
    }
  }
  if (std::fclose(f) != 0) throw IoError("failed writing domain.csv");
  log << "domain: " << count << " of " << inside.size() << " cells inside\n";
  return kExitOk;
}

int run_randmat(const JobConfig& job, std::ostream& log) {
  const auto out = prepare_out(job);
  DensityGrid predicted =
      fill_grid(job.model, job.params.with_gamma({}), 0.0, job.grid.bounds, job.grid.nx, job.grid.ny, job.threads);
  if (job.params.gamma() != complex{}) {
    TransportOptions opt;
    opt.threads = job.threads;
    predicted = transport(PushforwardMap(job.model, job.params, 0.0), predicted, job.target.bounds, job.target.nx,
                          job.target.ny, opt)
                    .binned;
  }
  const Eigen::MatrixXcd x0 = x0_matrix(job.model, job.n);
  std::vector<EnsembleSample> samples(job.samples);
  parallel_for(samples.size(), job.threads, [&](std::size_t k) {
    samples[k] = sample_deformed(x0, job.params, stream_seed(job.seed, k), job.rotate);
  });
  write_eigenvalues_csv(samples, out / "eigenvalues.csv");
  const SpectrumScore score = compare_spectrum(samples, predicted, job.coarse_n);
  json report = score.to_json();
  report["n"] = job.n;
  report["samples"] = job.samples;
  report["seed"] = job.seed;
  report["note"] = "thresholds on these statistics are engineering choices at finite N";
  write_json(out / "score.json", report);
  log << "randmat-compare: sup cell discrepancy " << score.sup_cell_discrepancy << ", inside support "
      << score.inside_support_fraction << "\n";
  return kExitOk;
}

int run_selftest(const JobConfig& job, std::ostream& log) {
  AcceptanceOptions opt;
  opt.threads = job.threads;
  const auto results = run_acceptance(opt, &log);
  std::size_t failed = 0;
  for (const auto& r : results) failed += !r.pass;
  log << (failed == 0 ? "selftest: all criteria passed" : "selftest: " + std::to_string(failed) + " criteria failed")
      << "\n";
  return failed == 0 ? kExitOk : kExitFailure;
}

}  // namespace

void apply_override(json& settings, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw InvalidArgument("--set expects KEY=VALUE, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  std::string pointer;
  std::size_t start = 0;
  while (start <= key.size()) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw InvalidArgument("malformed --set key '" + key + "'");
    pointer += "/" + part;
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  settings[json::json_pointer(pointer)] = std::move(value);
}

JobConfig make_job(const std::string& command, const json& s) {
  if (!kCommands.count(command)) throw InvalidArgument("unknown command '" + command + "'");
  if (!s.is_object()) throw InvalidArgument("configuration must be a JSON object");
  for (const auto& [k, v] : s.items()) {
    if (!kKeys.count(k)) throw InvalidArgument("unknown setting '" + k + "'");
  }

  JobConfig job;
  job.command = command;
  if (command == "selftest") {
    if (s.contains("threads")) job.threads = static_cast<unsigned>(get_number(s, "threads"));
    return job;
  }
  if (s.contains("model")) {
    const json& m = s.at("model");
    job.model = m.is_string() ? load_model(m.get<std::string>()) : parse_model(m);
  }
  job.params = parse_params(s);
  if (s.contains("epsilon")) {
    job.epsilon = get_number(s, "epsilon");
    if (!(job.epsilon >= 0.0) || !std::isfinite(job.epsilon)) throw InvalidArgument("epsilon must be finite and >= 0");
  }
  if (s.contains("grid")) job.grid = parse_grid(s.at("grid"), "grid", job.grid);
  job.target = s.contains("target_grid") ? parse_grid(s.at("target_grid"), "target_grid", job.grid) : job.grid;
  if (s.contains("out")) job.out_dir = get_as<std::string>(s, "out");
  if (s.contains("seed")) job.seed = get_as<std::uint64_t>(s, "seed");
  if (s.contains("threads")) job.threads = static_cast<unsigned>(get_number(s, "threads"));
  if (s.contains("samples")) job.samples = get_count(s, "samples");
  if (s.contains("n")) job.n = get_count(s, "n");
  if (s.contains("coarse_n")) job.coarse_n = get_count(s, "coarse_n");
  job.rotate = s.contains("rotate") ? get_as<bool>(s, "rotate") : !job.params.is_elliptic();
  return job;
}

int run(const JobConfig& job, std::ostream& log) {
  if (job.command == "density") return run_density(job, log);
  if (job.command == "pushforward") return run_pushforward(job, log);
  if (job.command == "fkdet") return run_fkdet(job, log);
  if (job.command == "domain") return run_domain(job, log);
  if (job.command == "randmat-compare") return run_randmat(job, log);
  if (job.command == "selftest") return run_selftest(job, log);
  throw InvalidArgument("unknown command '" + job.command + "'");
}

int main(int argc, char** argv) {
  CLI::App app{"Brown measures of x0 plus a triangular elliptic operator"};
  std::string command;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  unsigned threads = 0;
  std::uint64_t seed = 0;
  app.add_option("command", command, "density | pushforward | fkdet | domain | randmat-compare | selftest")
      ->required()
      ->check(CLI::IsMember(std::vector<std::string>(kCommands.begin(), kCommands.end())));
  app.add_option("--config", config_path, "JSON job configuration");
  app.add_option("--set", overrides, "KEY=VALUE override, repeatable (dotted keys for nested fields)");
  auto* out_opt = app.add_option("--out", out_dir, "output directory");
  auto* threads_opt = app.add_option("--threads", threads, "worker threads, 0 = auto");
  auto* seed_opt = app.add_option("--seed", seed, "64-bit seed for randmat-compare");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    json settings = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw IoError("cannot read config " + config_path);
      settings = json::parse(in, nullptr, false);
      if (settings.is_discarded()) throw InvalidArgument("config " + config_path + " is not valid JSON");
    }
    for (const auto& o : overrides) apply_override(settings, o);
    if (*out_opt) settings["out"] = out_dir;
    if (*threads_opt) settings["threads"] = threads;
    if (*seed_opt) settings["seed"] = seed;
    return run(make_job(command, settings), std::cout);
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kExitInvalid;
  }
}

}  // namespace brown::cli
