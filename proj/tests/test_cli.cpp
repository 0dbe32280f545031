#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "brownmeasure/cli.hpp"
#include "brownmeasure/error.hpp"
#include "brownmeasure/model_io.hpp"

using namespace brown;
using namespace brown::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("brownmeasure_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json small_density_settings(const fs::path& out) {
  return {{"model", {{"variant", "normal_plane"}, {"atoms", {{0, 1.0}}}}},
          {"t", 1.0},
          {"grid", {{"x_min", -1.5}, {"x_max", 1.5}, {"y_min", -1.5}, {"y_max", 1.5}, {"nx", 201}, {"ny", 201}}},
          {"out", out.string()}};
}

int run_binary(const std::string& args) {
  const char* bin = std::getenv("BROWNMEASURE_BIN");
  if (!bin) return -1;
  const std::string cmd = std::string(bin) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("overrides") {
  json s = json::object();
  apply_override(s, "t=2");
  apply_override(s, "grid.nx=51");
  apply_override(s, "gamma=0.3,0.1");
  apply_override(s, "model.variant=self_adjoint");
  apply_override(s, "rotate=true");
  REQUIRE(s.at("t") == 2);
  REQUIRE(s.at("grid").at("nx") == 51);
  REQUIRE(s.at("gamma") == "0.3,0.1");
  REQUIRE(s.at("model").at("variant") == "self_adjoint");
  REQUIRE(s.at("rotate") == true);
  REQUIRE_THROWS_AS(apply_override(s, "novalue"), InvalidArgument);
  REQUIRE_THROWS_AS(apply_override(s, "=3"), InvalidArgument);
  REQUIRE_THROWS_AS(apply_override(s, "grid..nx=3"), InvalidArgument);
}

TEST_CASE("job validation") {
  const JobConfig job = make_job("density", {{"alpha", 2.0}, {"beta", 1.0}, {"gamma", "0.3,0.4"}, {"epsilon", 0.1}});
  REQUIRE(job.params.alpha() == 2.0);
  REQUIRE(job.params.gamma() == complex(0.3, 0.4));
  REQUIRE(job.epsilon == 0.1);
  REQUIRE(job.rotate);
  REQUIRE(job.grid.nx == 201);
  REQUIRE_FALSE(make_job("density", {{"t", 1.0}}).rotate);
  REQUIRE(make_job("density", {{"t", 1.0}, {"grid", {{"nx", 11}}}}).target.nx == 11);

  REQUIRE_THROWS_AS(make_job("plot", {{"t", 1.0}}), InvalidArgument);
  REQUIRE_THROWS_AS(make_job("density", json::object()), InvalidArgument);
  REQUIRE_THROWS_AS(make_job("density", {{"t", 1.0}, {"alpha", 2.0}, {"beta", 1.0}}), InvalidArgument);
  REQUIRE_THROWS_AS(make_job("density", {{"alpha", 2.0}}), InvalidArgument);
  REQUIRE_THROWS_AS(make_job("density", {{"t", 1.0}, {"gamma", 1.5}}), InvalidArgument);
  REQUIRE_THROWS_AS(make_job("density", {{"t", 1.0}, {"epsilon", -1.0}}), InvalidArgument);
  REQUIRE_THROWS_AS(make_job("density", {{"t", 1.0}, {"colour", "red"}}), InvalidArgument);
  REQUIRE_THROWS_AS(make_job("density", {{"t", 1.0}, {"grid", {{"nz", 3}}}}), InvalidArgument);
  REQUIRE_THROWS_AS(make_job("density", {{"t", "one"}}), InvalidArgument);
  REQUIRE_THROWS_AS(make_job("density", {{"t", 1.0}, {"samples", 0}}), InvalidArgument);
  REQUIRE_NOTHROW(make_job("selftest", json::object()));
}

TEST_CASE("model parsing") {
  const SpectralModel sa = parse_model(json::parse(R"({"variant": "self_adjoint", "atoms": [[1, 0.5], [-1, 0.5]]})"));
  REQUIRE(sa.variant() == SpectralModel::Variant::SelfAdjoint);
  REQUIRE(sa.atoms().size() == 2);

  const SpectralModel np = parse_model(json::parse(
      R"({"variant": "normal_plane", "atoms": [["0.5,0.5", 0.25], [[0, -1], 0.25]], "abscont": [[2, 0.5]]})"));
  REQUIRE(np.atoms()[0].location == complex(0.5, 0.5));
  REQUIRE(np.atoms()[1].location == complex(0.0, -1.0));
  REQUIRE(np.abscont().size() == 1);

  const SpectralModel dm =
      parse_model(json::parse(R"({"variant": "dense_matrix", "n": 2, "entries": [1, "0,1", 0, [-1, 0]]})"));
  REQUIRE(dm.is_matrix());
  REQUIRE(dm.matrix()(0, 1) == complex(0.0, 1.0));
  REQUIRE(dm.matrix()(1, 1) == complex(-1.0, 0.0));

  REQUIRE(parse_complex(std::string("-2.5")) == complex(-2.5, 0.0));
  REQUIRE(parse_complex(std::string("1e-3,-4")) == complex(1e-3, -4.0));
  REQUIRE_THROWS_AS(parse_complex(std::string("1,2,3")), InvalidArgument);
  REQUIRE_THROWS_AS(parse_complex(std::string("abc")), InvalidArgument);
  REQUIRE_THROWS_AS(parse_model(json::parse(R"({"variant": "torus"})")), InvalidArgument);
  REQUIRE_THROWS_AS(parse_model(json::parse(R"({"variant": "dense_matrix", "n": 2, "entries": [1, 2, 3]})")),
                    InvalidArgument);
  REQUIRE_THROWS_AS(parse_model(json::parse(R"({"variant": "self_adjoint", "atoms": [["1,1", 1.0]]})")),
                    InvalidArgument);
  REQUIRE_THROWS_AS(load_model("/nonexistent/model.json"), IoError);
}

TEST_CASE("density job writes the uniform disk") {
  const fs::path out = scratch_dir("density");
  std::ostringstream log;
  REQUIRE(run(make_job("density", small_density_settings(out)), log) == kExitOk);
  std::ifstream in(out / "density.csv");
  std::string line;
  std::getline(in, line);
  REQUIRE(line == "x,y,density");
  std::size_t interior = 0;
  while (std::getline(in, line)) {
    double x = 0, y = 0, d = 0;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &y, &d) == 3);
    if (std::hypot(x, y) < 0.99) {
      ++interior;
      REQUIRE(std::abs(d - 0.318310) <= 1e-4);
    }
  }
  REQUIRE(interior > 13000);
  const json meta = json::parse(slurp(out / "density.json"));
  REQUIRE(std::abs(meta.at("mass").get<double>() - 1.0) < 0.01);
  fs::remove_all(out);
}

TEST_CASE("pushforward job at the extreme gamma flags the whole domain") {
  const fs::path out = scratch_dir("pushforward");
  json s = {{"t", 1.0},
            {"gamma", 1.0},
            {"grid", {{"x_min", -1.2}, {"x_max", 1.2}, {"y_min", -1.2}, {"y_max", 1.2}, {"nx", 41}, {"ny", 41}}},
            {"target_grid", {{"x_min", -2.5}, {"x_max", 2.5}, {"y_min", -2.5}, {"y_max", 2.5}, {"nx", 41}, {"ny", 41}}},
            {"out", out.string()}};
  std::ostringstream log;
  REQUIRE(run(make_job("pushforward", s), log) == kExitOk);
  const json scan = json::parse(slurp(out / "singular_scan.json"));
  REQUIRE(scan.at("scanned_cells").get<std::size_t>() > 0);
  REQUIRE(scan.at("all_scanned_singular") == true);
  const json meta = json::parse(slurp(out / "pushforward.json"));
  REQUIRE(meta.at("lost_fraction").get<double>() <= 0.01);
  REQUIRE(fs::exists(out / "source.csv"));
  REQUIRE(fs::exists(out / "pushforward.csv"));

  s["gamma"] = 0.5;
  REQUIRE(run(make_job("pushforward", s), log) == kExitOk);
  REQUIRE(json::parse(slurp(out / "singular_scan.json")).at("singular_cells") == 0);
  fs::remove_all(out);
}

TEST_CASE("fkdet and domain jobs") {
  const fs::path out = scratch_dir("fkdet");
  json s = {{"t", 1.0},
            {"grid", {{"x_min", -2}, {"x_max", 2}, {"y_min", -2}, {"y_max", 2}, {"nx", 4}, {"ny", 4}}},
            {"out", out.string()}};
  std::ostringstream log;
  REQUIRE(run(make_job("fkdet", s), log) == kExitOk);
  std::ifstream fk(out / "fkdet.csv");
  std::string line;
  std::getline(fk, line);
  REQUIRE(line == "x,y,fk_determinant,degenerate");
  std::size_t rows = 0;
  while (std::getline(fk, line)) {
    double x = 0, y = 0, v = 0;
    int deg = 0;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%d", &x, &y, &v, &deg) == 4);
    const double r = std::hypot(x, y);
    if (r >= 1.0) REQUIRE(std::abs(v - r) < 1e-12);
    ++rows;
  }
  REQUIRE(rows == 16);

  REQUIRE(run(make_job("domain", s), log) == kExitOk);
  std::ifstream dom(out / "domain.csv");
  std::getline(dom, line);
  REQUIRE(line == "x,y,in_domain");
  std::size_t inside = 0;
  while (std::getline(dom, line)) inside += line.back() == '1';
  REQUIRE(inside == 4);

  REQUIRE_THROWS_AS(run(make_job("fkdet", {{"alpha", 2.0}, {"beta", 1.0}, {"out", out.string()}}), log),
                    InvalidArgument);
  fs::remove_all(out);
}

TEST_CASE("outputs are deterministic") {
  const fs::path a = scratch_dir("det_a");
  const fs::path b = scratch_dir("det_b");
  json s = {{"model", {{"variant", "self_adjoint"}, {"atoms", {{1, 0.5}, {-1, 0.5}}}}},
            {"t", 1.0},
            {"n", 60},
            {"samples", 2},
            {"seed", 42},
            {"grid", {{"x_min", -2.2}, {"x_max", 2.2}, {"y_min", -1.1}, {"y_max", 1.1}, {"nx", 40}, {"ny", 20}}}};
  std::ostringstream log;
  for (const std::string cmd : {"density", "randmat-compare"}) {
    s["out"] = a.string();
    s["threads"] = 1;
    REQUIRE(run(make_job(cmd, s), log) == kExitOk);
    s["out"] = b.string();
    s["threads"] = 3;
    REQUIRE(run(make_job(cmd, s), log) == kExitOk);
  }
  for (const char* f : {"density.csv", "eigenvalues.csv", "score.json"}) {
    REQUIRE(fs::exists(a / f));
    REQUIRE(slurp(a / f) == slurp(b / f));
  }
  s["seed"] = 43;
  s["out"] = b.string();
  REQUIRE(run(make_job("randmat-compare", s), log) == kExitOk);
  REQUIRE(slurp(a / "eigenvalues.csv") != slurp(b / "eigenvalues.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("exit codes of the binary") {
  if (!std::getenv("BROWNMEASURE_BIN")) SKIP("BROWNMEASURE_BIN not set");
  const fs::path out = scratch_dir("exit");
  fs::create_directories(out);
  const std::string grid = " --set grid.nx=5 --set grid.ny=5";
  REQUIRE(run_binary("density --set t=1" + grid + " --out " + out.string()) == kExitOk);
  REQUIRE(run_binary("density --set t=1 --set alpha=2 --set beta=1 --out " + out.string()) == kExitInvalid);
  REQUIRE(run_binary("bogus") == kExitInvalid);
  REQUIRE(run_binary("density --config /nonexistent/config.json") == kExitIo);

  const fs::path blocker = out / "file";
  std::ofstream(blocker) << "x";
  REQUIRE(run_binary("density --set t=1" + grid + " --out " + (blocker / "sub").string()) == kExitIo);

  const fs::path config = out / "job.json";
  std::ofstream(config) << R"({"t": 1, "grid": {"nx": 5, "ny": 5}})";
  REQUIRE(run_binary("domain --config " + config.string() + " --out " + out.string()) == kExitOk);
  REQUIRE(fs::exists(out / "domain.csv"));
  std::ofstream(config) << "{not json";
  REQUIRE(run_binary("domain --config " + config.string()) == kExitInvalid);
  fs::remove_all(out);
}
