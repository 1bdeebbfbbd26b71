#include "pxlap/report.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "pxlap/error.hpp"

namespace pxlap {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

json to_json(const EmbeddingConstants& c) {
  return {{"c_q_plus", c.c_q_plus},
          {"c_q_minus", c.c_q_minus},
          {"c_d_plus", c.c_d_plus},
          {"c_d_minus", c.c_d_minus},
          {"sample_count", c.sample_count}};
}

json to_json(const HypothesisReport& r) {
  json clauses = json::array();
  for (const auto& c : r.clauses) {
    json j{{"clause", c.clause}, {"passed", c.passed}, {"detail", c.detail}};
    if (c.element) {
      j["element"] = *c.element;
      j["location"] = {c.location.x, c.location.y};
    }
    clauses.push_back(std::move(j));
  }
  return {{"passed", r.passed()}, {"clauses", std::move(clauses)}};
}

json to_json(const LambdaReport& r) {
  json rows = json::array();
  for (const auto& row : r.scan_rows)
    rows.push_back({{"lambda", row.lambda}, {"pass", row.pass}, {"worst_direction", row.worst_direction}});
  return {{"lambda_scan_threshold", r.lambda_scan_threshold},
          {"lambda_formula_value", r.lambda_formula_value},
          {"lambda_positive_energy_bound", r.lambda_positive_energy_bound},
          {"formula_base_negative", r.formula_base_negative},
          {"bound_sign_audit",
           {{"numerator_sign", r.bound_numerator_sign}, {"denominator_sign", r.bound_denominator_sign}}},
          {"lambda0", r.lambda0},
          {"constants_used", to_json(r.constants_used)},
          {"scan_rows", std::move(rows)}};
}

json to_json(const VerificationRecord& r) {
  return {{"passed", r.passed()},
          {"positivity", {{"floor", r.floor}, {"min_interior", r.min_interior}, {"ok", r.positive}}},
          {"weak_residual",
           {{"max_abs", r.weak_residual}, {"scale", r.residual_scale}, {"tol", r.residual_tol}, {"ok", r.residual_ok}}},
          {"membership",
           {{"slope", r.membership_slope}, {"scale", r.membership_scale}, {"ok", r.on_manifold}}},
          {"classification", to_string(r.classification)}};
}

json to_json(const BranchResult& r) {
  json j{{"status", r.status},
         {"energy", r.energy},
         {"weak_residual", r.weak_residual},
         {"residual_scale", r.residual_scale},
         {"iterations", r.iterations}};
  if (!r.message.empty()) j["message"] = r.message;
  if (r.u) {
    j["sup_norm"] = r.u->sup_norm();
  }
  if (r.verification) j["verification"] = to_json(*r.verification);
  return j;
}

json to_json(const SolveReport& r) {
  json j{{"schema_version", kSchemaVersion},
         {"lambda_used", r.lambda_used},
         {"plus", to_json(r.plus)},
         {"minus", to_json(r.minus)},
         {"distinctness",
          {{"sup_distance", r.sup_distance},
           {"sobolev_distance", r.sobolev_distance},
           {"scale", r.distinctness_scale},
           {"distinct", r.distinct}}},
         {"success", r.success()}};
  if (r.threshold) j["threshold"] = to_json(*r.threshold);
  return j;
}

json to_json(const OracleResult& r) {
  json j{{"schema_version", kSchemaVersion}, {"starts", r.starts}};
  j["energy_plus"] = r.found_plus ? json(r.energy_plus) : json(nullptr);
  j["energy_minus"] = r.found_minus ? json(r.energy_minus) : json(nullptr);
  return j;
}

json to_json(const CriticalPoint& c) {
  return {{"t", c.t}, {"dphi", c.slope}, {"ddphi", c.curvature}, {"class", to_string(c.kind)}};
}

void write_solution_csv(std::ostream& os, const GridFunction& u) {
  os << "index,x,y,u\n";
  const auto& v = u.mesh().vertices();
  for (std::size_t i = 0; i < v.size(); ++i)
    os << i << ',' << num(v[i].x) << ',' << num(v[i].y) << ',' << num(u[i]) << '\n';
}

GridFunction read_solution_csv(std::istream& is, std::shared_ptr<const Mesh> mesh) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("index,x,y,u", 0) != 0)
    throw ConfigError("solution file must start with the header 'index,x,y,u'");
  std::vector<double> values(mesh->num_vertices(), 0.0);
  std::vector<bool> seen(values.size(), false);
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> cells;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      const auto* end = cell.data() + cell.size();
      while (end > cell.data() && (end[-1] == '\r' || end[-1] == ' ')) --end;
      auto [ptr, ec] = std::from_chars(cell.data(), end, v);
      if (ec != std::errc() || ptr != end) throw ConfigError("solution row " + std::to_string(row) + ": bad number");
      cells.push_back(v);
    }
    if (cells.size() != 4) throw ConfigError("solution row " + std::to_string(row) + ": expected 4 columns");
    const double idx = cells[0];
    if (idx < 0 || idx >= static_cast<double>(values.size()) || idx != std::floor(idx))
      throw ConfigError("solution row " + std::to_string(row) + ": vertex index out of range");
    const auto i = static_cast<std::size_t>(idx);
    const Point& p = mesh->vertices()[i];
    if (std::abs(p.x - cells[1]) > 1e-9 || std::abs(p.y - cells[2]) > 1e-9)
      throw ConfigError("solution row " + std::to_string(row) + ": coordinates do not match the configured mesh");
    values[i] = cells[3];
    seen[i] = true;
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) throw ConfigError("solution file has no row for vertex " + std::to_string(i));
  try {
    return GridFunction(std::move(mesh), std::move(values));
  } catch (const Error& e) {
    throw ConfigError(std::string("solution file: ") + e.what());
  }
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
  os << "iter,energy,curvature,step\n";
  for (const auto& r : trace) os << r.iter << ',' << num(r.energy) << ',' << num(r.curvature) << ',' << num(r.step) << '\n';
}

void write_fiber_csv(std::ostream& os, const FiberProfile& profile) {
  os << "t,phi,dphi,ddphi\n";
  for (std::size_t i = 0; i < profile.t_samples.size(); ++i)
    os << num(profile.t_samples[i]) << ',' << num(profile.phi[i]) << ',' << num(profile.dphi[i]) << ','
       << num(profile.ddphi[i]) << '\n';
}

void write_critical_csv(std::ostream& os, const std::vector<CriticalPoint>& points) {
  os << "index,t,dphi,ddphi,class\n";
  for (std::size_t i = 0; i < points.size(); ++i)
    os << i << ',' << num(points[i].t) << ',' << num(points[i].slope) << ',' << num(points[i].curvature) << ','
       << to_string(points[i].kind) << '\n';
}

void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows) {
  os << "lambda,pass,worst_direction\n";
  for (const auto& r : rows) os << num(r.lambda) << ',' << (r.pass ? 1 : 0) << ',' << r.worst_direction << '\n';
}

}  // namespace pxlap
