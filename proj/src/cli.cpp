#include "pxlap/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "pxlap/config.hpp"
#include "pxlap/error.hpp"
#include "pxlap/report.hpp"

namespace pxlap {

namespace {

using nlohmann::json;

struct Options {
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> resolution;
  std::optional<double> t_min, t_max;
  std::string solution_path;
};

void configure_logging(const std::string& fallback) {
  auto logger = spdlog::get("pxlap");
  if (!logger) {
    logger = spdlog::stderr_logger_mt("pxlap");
    spdlog::set_default_logger(logger);
  }
  const char* env = std::getenv("PXLAP_LOG_LEVEL");
  spdlog::set_level(spdlog::level::from_str(env ? env : fallback));
}

RunConfig load_with_overrides(const Options& o) {
  RunConfig c = load_config(o.config_path);
  if (o.out_dir) c.output.dir = *o.out_dir;
  if (o.seed) c.solver.seed = c.scan.seed = c.oracle.seed = *o.seed;
  if (o.resolution) c.problem.resolution = *o.resolution;
  configure_logging(c.output.verbosity);
  return c;
}

struct Resolved {
  ProblemData data;
  std::optional<LambdaReport> threshold;
};

LambdaReport compute_threshold(const RunConfig& c, const ProblemData& data) {
  const auto consts = estimate_embedding_constants(data, c.scan.embedding_samples, c.scan.seed);
  ScanOptions scan;
  scan.directions = c.scan.directions;
  scan.seed = c.scan.seed;
  return threshold_report(data, consts, c.scan.lambda_grid, scan);
}

// Builds the problem, checks the hypotheses and resolves lambda = auto.
Resolved resolve_problem(const RunConfig& c, bool want_threshold) {
  if (c.problem.lambda) {
    auto data = make_problem(c.problem, *c.problem.lambda);
    require_hypotheses(data);
    std::optional<LambdaReport> threshold;
    if (want_threshold) threshold = compute_threshold(c, data);
    return {std::move(data), std::move(threshold)};
  }
  auto probe = make_problem(c.problem, 1.0);
  require_hypotheses(probe);
  auto threshold = compute_threshold(c, probe);
  const double lambda = c.problem.lambda_fraction * threshold.lambda0;
  spdlog::info("lambda = {} x lambda0 = {}", c.problem.lambda_fraction, lambda);
  return {probe.with_lambda(lambda), std::move(threshold)};
}

std::filesystem::path output_dir(const RunConfig& c) {
  std::filesystem::path dir(c.output.dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write '" + path.string() + "'");
  body(os);
  spdlog::debug("wrote {}", path.string());
}

void write_json(const RunConfig& c, const std::filesystem::path& path, const json& j) {
  if (c.output.json) write_file(path, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

GridFunction configured_function(const RunConfig& c, const ProblemData& data) {
  if (!c.function.field) return eigen_surrogate(data.mesh_ptr());
  const FieldSpec f = *c.function.field;
  try {
    check_field(f, data.mesh().dimension());
  } catch (const Error& e) {
    throw ConfigError(std::string("function: ") + e.what());
  }
  const int dim = data.mesh().dimension();
  return GridFunction::interpolate(data.mesh_ptr(), [&](const Point& x) { return eval_field(f, x, dim); });
}

int cmd_solve(const Options& o, std::ostream& out) {
  const RunConfig c = load_with_overrides(o);
  auto [data, threshold] = resolve_problem(c, true);
  const SolveReport report = solve_both(data, c.solver, threshold);
  const json j = to_json(report);
  const auto dir = output_dir(c);
  write_json(c, dir / "report.json", j);
  if (c.output.csv) {
    if (report.plus.u) write_file(dir / "u_plus.csv", [&](std::ostream& os) { write_solution_csv(os, *report.plus.u); });
    if (report.minus.u)
      write_file(dir / "u_minus.csv", [&](std::ostream& os) { write_solution_csv(os, *report.minus.u); });
    write_file(dir / "trace_plus.csv", [&](std::ostream& os) { write_trace_csv(os, report.plus.trace); });
    write_file(dir / "trace_minus.csv", [&](std::ostream& os) { write_trace_csv(os, report.minus.trace); });
    write_file(dir / "mesh_vertices.csv", [&](std::ostream& os) { write_vertex_csv(os, data.mesh()); });
    write_file(dir / "mesh_elements.csv", [&](std::ostream& os) { write_element_csv(os, data.mesh()); });
  }
  out << j.dump(2) << '\n';
  return report.success() ? kExitOk : kExitSolver;
}

int cmd_fiber(const Options& o, std::ostream& out) {
  RunConfig c = load_with_overrides(o);
  if (o.t_min) c.fiber.t_min = *o.t_min;
  if (o.t_max) c.fiber.t_max = *o.t_max;
  auto [data, threshold] = resolve_problem(c, false);
  const auto u = configured_function(c, data);
  const auto profile = fiber_profile(u, data, c.fiber.t_min, c.fiber.t_max, c.fiber.samples);
  json points = json::array();
  for (const auto& p : profile.critical_points) points.push_back(to_json(p));
  const json j{{"schema_version", kSchemaVersion},
               {"lambda", data.lambda()},
               {"t_min", c.fiber.t_min},
               {"t_max", c.fiber.t_max},
               {"bracket_found", profile.bracket_found},
               {"critical_points", std::move(points)}};
  const auto dir = output_dir(c);
  write_json(c, dir / "fiber.json", j);
  if (c.output.csv) {
    write_file(dir / "fiber.csv", [&](std::ostream& os) { write_fiber_csv(os, profile); });
    write_file(dir / "fiber_critical.csv", [&](std::ostream& os) { write_critical_csv(os, profile.critical_points); });
  }
  if (!profile.bracket_found) spdlog::warn("no sign change of the fiber derivative in [{}, {}]", c.fiber.t_min, c.fiber.t_max);
  out << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_scan(const Options& o, std::ostream& out) {
  const RunConfig c = load_with_overrides(o);
  auto data = make_problem(c.problem, c.problem.lambda.value_or(1.0));
  require_hypotheses(data);
  const LambdaReport report = compute_threshold(c, data);
  json j = to_json(report);
  j["schema_version"] = kSchemaVersion;
  const auto dir = output_dir(c);
  write_json(c, dir / "lambda_report.json", j);
  if (c.output.csv) write_file(dir / "lambda_scan.csv", [&](std::ostream& os) { write_scan_csv(os, report.scan_rows); });
  out << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_norm(const Options& o, std::ostream& out) {
  const RunConfig c = load_with_overrides(o);
  const auto data = make_problem(c.problem, c.problem.lambda.value_or(1.0));
  const auto u = configured_function(c, data);
  json j{{"schema_version", kSchemaVersion},
         {"modular", modular(u, data.p_at(), false)},
         {"gradient_modular", modular(u, data.p_at(), true)},
         {"luxemburg_norm", luxemburg_norm(u, data.p_at(), false)},
         {"gradient_luxemburg_norm", luxemburg_norm(u, data.p_at(), true)},
         {"sobolev_norm", sobolev_norm(u, data.p_at())}};
  if (!u.is_zero()) {
    const auto r = check_modular_relations(u, data.p());
    const char* clause = r.clause == ModularClause::norm_above_one   ? "norm_above_one"
                         : r.clause == ModularClause::norm_below_one ? "norm_below_one"
                                                                     : "norm_equals_one";
    j["modular_relations"] = {{"clause", clause}, {"lower", r.lower}, {"upper", r.upper}, {"holds", r.holds}};
  }
  write_json(c, output_dir(c) / "norms.json", j);
  out << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_verify(const Options& o, std::ostream& out) {
  const RunConfig c = load_with_overrides(o);
  auto [data, threshold] = resolve_problem(c, false);
  std::ifstream in(o.solution_path);
  if (!in) throw ConfigError("cannot open solution file '" + o.solution_path + "'");
  const auto u = read_solution_csv(in, data.mesh_ptr());
  const auto record = verify_solution(u, data, default_floor(u, c.solver.grad_floor), c.solver.residual_tol);
  json j = to_json(record);
  j["schema_version"] = kSchemaVersion;
  j["energy"] = energy(u, data).total;
  write_json(c, output_dir(c) / "verification.json", j);
  out << j.dump(2) << '\n';
  return record.passed() ? kExitOk : kExitSolver;
}

int cmd_oracle(const Options& o, std::ostream& out) {
  const RunConfig c = load_with_overrides(o);
  auto [data, threshold] = resolve_problem(c, false);
  OracleOptions opts;
  opts.starts = c.oracle.starts;
  opts.seed = c.oracle.seed;
  const auto r = oracle_global_scan(data, c.oracle.resolution_cap, opts);
  json j = to_json(r);
  j["lambda"] = data.lambda();
  write_json(c, output_dir(c) / "oracle.json", j);
  out << j.dump(2) << '\n';
  return r.found_plus && r.found_minus ? kExitOk : kExitSolver;
}

int report_error(std::ostream& err, const std::string& code, const std::string& message, int exit_code) {
  err << json{{"schema_version", kSchemaVersion}, {"error", code}, {"message", message}, {"exit_code", exit_code}}.dump()
      << '\n';
  return exit_code;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nehari-manifold solver for the singular p(x)-Laplacian"};
  app.require_subcommand(1);
  Options o;
  std::function<int(const Options&, std::ostream&)> action;

  auto add = [&](const std::string& name, const std::string& help, auto fn) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config_path, "Configuration file")->required();
    sub->add_option("--out", o.out_dir, "Output directory (overrides output.dir)");
    sub->add_option("--seed", o.seed, "Seed for every random stream");
    sub->add_option("--resolution", o.resolution, "Mesh resolution override")->check(CLI::PositiveNumber);
    sub->callback([&action, fn] { action = fn; });
    return sub;
  };
  add("solve", "Minimize on both manifold branches and verify", cmd_solve);
  auto* fiber = add("fiber", "Fiber map profile of the configured function", cmd_fiber);
  fiber->add_option("--t-min", o.t_min, "Smallest fiber scale");
  fiber->add_option("--t-max", o.t_max, "Largest fiber scale");
  add("scan-lambda", "Empirical lambda threshold and formula diagnostics", cmd_scan);
  add("norm", "Modulars and norms of the configured function", cmd_norm);
  auto* verify = add("verify", "Check a solution file", cmd_verify);
  verify->add_option("--solution", o.solution_path, "Solution CSV (index,x,y,u)")->required();
  add("oracle", "Brute-force multi-start branch energies", cmd_oracle);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return report_error(err, "UsageError", e.what(), kExitConfig);
  }

  try {
    return action(o, out);
  } catch (const HypothesisViolation& e) {
    return report_error(err, e.code(), e.what(), kExitHypothesis);
  } catch (const ConfigError& e) {
    return report_error(err, e.code(), e.what(), kExitConfig);
  } catch (const InvalidArgument& e) {
    return report_error(err, e.code(), e.what(), kExitConfig);
  } catch (const Error& e) {
    return report_error(err, e.code(), e.what(), kExitSolver);
  } catch (const std::exception& e) {
    return report_error(err, "InternalError", e.what(), kExitSolver);
  }
}

}  // namespace pxlap
