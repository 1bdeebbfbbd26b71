#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pxlap/domain.hpp"
#include "pxlap/nehari.hpp"
#include "pxlap/solver.hpp"

namespace pxlap {

struct ProblemConfig {
  int dimension = 1;
  Box extent;
  int resolution = 64;
  FieldSpec p, q, delta, a, b;
  std::optional<double> lambda;  // empty: lambda_fraction * lambda0
  double lambda_fraction = 0.5;
};

struct ScanConfig {
  std::vector<double> lambda_grid = default_lambda_grid();
  int directions = 32;
  std::uint64_t seed = 7;
  int embedding_samples = 100;
};

struct OracleConfig {
  int starts = 200;
  std::size_t resolution_cap = 17;
  std::uint64_t seed = 11;
};

struct FiberConfig {
  double t_min = 1e-3;
  double t_max = 1e3;
  int samples = 256;
};

/// Function used by the fiber and norm subcommands: the eigenfunction surrogate
/// unless a field is given.
struct FunctionConfig {
  std::optional<FieldSpec> field;
};

struct OutputConfig {
  std::string dir = ".";
  bool json = true;
  bool csv = true;
  std::string verbosity = "info";
};

struct RunConfig {
  ProblemConfig problem;
  SolveConfig solver;
  ScanConfig scan;
  OracleConfig oracle;
  FiberConfig fiber;
  FunctionConfig function;
  OutputConfig output;
};

/// Parses flat "key = value" lines with dotted keys. Blank lines and lines starting
/// with '#' are skipped. Unknown, duplicate or malformed keys raise ConfigError
/// naming the line. `source` labels the messages.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Canonical text form; parse_config(serialize_config(c)) reproduces c exactly.
std::string serialize_config(const RunConfig& config);

/// Mesh and ProblemData for the configured problem at the given lambda. Field
/// parameter errors surface as ConfigError.
ProblemData make_problem(const ProblemConfig& problem, double lambda);

}  // namespace pxlap
