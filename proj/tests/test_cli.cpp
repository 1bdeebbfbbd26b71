#include <doctest.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pxlap/cli.hpp"
#include "pxlap/config.hpp"
#include "pxlap/error.hpp"
#include "pxlap/report.hpp"

using namespace pxlap;
namespace fs = std::filesystem;

namespace {

const fs::path config_dir = PXLAP_CONFIG_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "pxlap_cli_test" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "pxlap");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

std::string cfg(const std::string& name) { return (config_dir / name).string(); }

}  // namespace

TEST_CASE("config text round-trips") {
  const auto a = load_config(cfg("ref1d.cfg"));
  const std::string text = serialize_config(a);
  const auto b = parse_config(text);
  CHECK(serialize_config(b) == text);
  CHECK_FALSE(a.problem.lambda.has_value());
  CHECK(b.problem.resolution == 64);
  CHECK(b.scan.lambda_grid == a.scan.lambda_grid);

  auto c = a;
  c.problem.lambda = 0.1 + 0.2;
  c.solver.step0 = 1.0 / 3.0;
  c.output.csv = false;
  const auto d = parse_config(serialize_config(c));
  CHECK(*d.problem.lambda == *c.problem.lambda);
  CHECK(d.solver.step0 == c.solver.step0);
  CHECK_FALSE(d.output.csv);
}

TEST_CASE("config errors name the offending line") {
  const std::string base = serialize_config(load_config(cfg("ref1d.cfg")));
  const auto next_line = std::to_string(std::count(base.begin(), base.end(), '\n') + 1);
  auto message = [](const std::string& text) {
    try {
      parse_config(text, "t.cfg");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message(base + "problem.colour = red\n").find("t.cfg:" + next_line) != std::string::npos);
  CHECK(message(base + "problem.resolution = 8\n").find("t.cfg:" + next_line) != std::string::npos);
  CHECK(message(base + "problem.dimension\n").find("t.cfg:" + next_line) != std::string::npos);
  const std::string bad_number = message(base + "solver.max_iters = many\n");
  CHECK(bad_number.find("solver.max_iters") != std::string::npos);
  CHECK(message("problem.dimension = 1\n").find("missing required key") != std::string::npos);
  CHECK(message(base).empty());
}

TEST_CASE("serialized config reproduces a byte-identical report") {
  const auto dir = scratch("roundtrip");
  const auto c = load_config(cfg("ref1d.cfg"));
  {
    std::ofstream os(dir / "copy.cfg");
    os << serialize_config(c);
  }
  const auto a = invoke({"solve", "--config", cfg("ref1d.cfg"), "--resolution", "32", "--out", (dir / "a").string()});
  const auto b =
      invoke({"solve", "--config", (dir / "copy.cfg").string(), "--resolution", "32", "--out", (dir / "b").string()});
  REQUIRE(a.code == kExitOk);
  REQUIRE(b.code == kExitOk);
  const std::string ra = slurp(dir / "a" / "report.json");
  CHECK_FALSE(ra.empty());
  CHECK(ra == slurp(dir / "b" / "report.json"));
  CHECK(slurp(dir / "a" / "u_plus.csv") == slurp(dir / "b" / "u_plus.csv"));
}

TEST_CASE("solve writes the report and headed CSV files") {
  const auto dir = scratch("solve");
  const auto r = invoke({"solve", "--config", cfg("ref1d.cfg"), "--out", dir.string()});
  REQUIRE(r.code == kExitOk);
  const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(j["schema_version"] == kSchemaVersion);
  CHECK(j["plus"]["energy"].get<double>() < 0.0);
  CHECK(j["minus"]["energy"].get<double>() > 0.0);
  CHECK(j["distinctness"]["distinct"].get<bool>());
  CHECK(j["success"].get<bool>());
  CHECK(first_line(dir / "u_plus.csv") == "index,x,y,u");
  CHECK(first_line(dir / "u_minus.csv") == "index,x,y,u");
  CHECK(first_line(dir / "trace_plus.csv") == "iter,energy,curvature,step");
  CHECK(first_line(dir / "trace_minus.csv") == "iter,energy,curvature,step");
  CHECK(first_line(dir / "mesh_vertices.csv") == "index,x,y,boundary");

  const auto v = invoke({"verify", "--config", cfg("ref1d.cfg"), "--solution", (dir / "u_minus.csv").string(), "--out",
                         (dir / "verify").string()});
  CHECK(v.code == kExitOk);
  CHECK(nlohmann::json::parse(v.out)["classification"] == "N-");
}

TEST_CASE("exit code 4 on a hypothesis violation") {
  const auto r = invoke({"solve", "--config", cfg("bad_exponents.cfg"), "--out", scratch("bad").string()});
  CHECK(r.code == kExitHypothesis);
  const auto j = nlohmann::json::parse(r.err);
  CHECK(j["exit_code"] == kExitHypothesis);
  CHECK(j["schema_version"] == kSchemaVersion);
  CHECK(j["message"].get<std::string>().find("(A0)") != std::string::npos);
}

TEST_CASE("exit code 2 on configuration problems") {
  const auto dir = scratch("config");
  {
    std::ofstream os(dir / "broken.cfg");
    os << "problem.dimension = 1\nproblem.shape = round\n";
  }
  const auto r = invoke({"solve", "--config", (dir / "broken.cfg").string()});
  CHECK(r.code == kExitConfig);
  CHECK(nlohmann::json::parse(r.err)["error"] == "ConfigError");
  CHECK(invoke({"solve", "--config", (dir / "missing.cfg").string()}).code == kExitConfig);
  CHECK(invoke({"solve"}).code == kExitConfig);
  CHECK(invoke({"unknown", "--config", cfg("ref1d.cfg")}).code == kExitConfig);
}

TEST_CASE("fiber with lambda zero has exactly one critical row") {
  const auto dir = scratch("fiber");
  const auto r = invoke({"fiber", "--config", cfg("lambda0_sine.cfg"), "--t-min", "1e-3", "--t-max", "1e3", "--out",
                         dir.string()});
  REQUIRE(r.code == kExitOk);
  std::ifstream in(dir / "fiber_critical.csv");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "index,t,dphi,ddphi,class");
  CHECK(lines[1].find("N-") != std::string::npos);
  CHECK(first_line(dir / "fiber.csv") == "t,phi,dphi,ddphi");
  const auto j = nlohmann::json::parse(slurp(dir / "fiber.json"));
  CHECK(j["schema_version"] == kSchemaVersion);
}

TEST_CASE("scan-lambda, norm and oracle subcommands") {
  const auto dir = scratch("misc");
  const auto s = invoke({"scan-lambda", "--config", cfg("ref1d.cfg"), "--resolution", "32", "--out", dir.string()});
  REQUIRE(s.code == kExitOk);
  const auto lr = nlohmann::json::parse(slurp(dir / "lambda_report.json"));
  CHECK(lr["lambda0"].get<double>() > 0.0);
  CHECK(lr["lambda0"].get<double>() <= lr["lambda_scan_threshold"].get<double>());
  CHECK(first_line(dir / "lambda_scan.csv") == "lambda,pass,worst_direction");

  const auto n = invoke({"norm", "--config", cfg("lambda0_sine.cfg"), "--out", dir.string()});
  REQUIRE(n.code == kExitOk);
  CHECK(nlohmann::json::parse(n.out)["sobolev_norm"].get<double>() > 0.0);

  const auto o = invoke({"oracle", "--config", cfg("ref1d.cfg"), "--resolution", "4", "--out", dir.string()});
  REQUIRE(o.code == kExitOk);
  const auto oj = nlohmann::json::parse(o.out);
  CHECK(oj["energy_plus"].get<double>() < 0.0);
  CHECK(oj["energy_minus"].get<double>() > 0.0);
}

TEST_CASE("seed override changes nothing in the deterministic solve") {
  const auto dir = scratch("seed");
  const auto a = invoke({"solve", "--config", cfg("ref1d.cfg"), "--resolution", "32", "--seed", "7", "--out",
                         (dir / "a").string()});
  const auto b = invoke({"solve", "--config", cfg("ref1d.cfg"), "--resolution", "32", "--seed", "7", "--out",
                         (dir / "b").string()});
  REQUIRE(a.code == kExitOk);
  CHECK(slurp(dir / "a" / "report.json") == slurp(dir / "b" / "report.json"));
}

TEST_CASE("solution CSV round-trips") {
  const auto mesh = build_mesh(2, Box{}, 4);
  std::vector<double> v(mesh->num_vertices(), 0.0);
  for (std::size_t i : mesh->interior_vertices()) v[i] = 0.1 * static_cast<double>(i) + 1.0 / 3.0;
  const GridFunction u(mesh, v);
  std::stringstream ss;
  write_solution_csv(ss, u);
  const auto w = read_solution_csv(ss, mesh);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(w[i] == u[i]);
  std::stringstream bad("index,x,y,u\n0,0,0\n");
  CHECK_THROWS_AS(read_solution_csv(bad, mesh), ConfigError);
}
