#include "pxlap/config.hpp"

#include <charconv>
#include <cmath>
#include <concepts>
#include <fstream>
#include <map>
#include <sstream>

#include "pxlap/error.hpp"

namespace pxlap {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

class Reader {
 public:
  Reader(std::map<std::string, Entry> entries, std::string source)
      : entries_(std::move(entries)), source_(std::move(source)) {}

  const std::string* raw(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    it->second.used = true;
    return &it->second.value;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    auto it = entries_.find(key);
    const std::string where = it == entries_.end() ? source_ : source_ + ":" + std::to_string(it->second.line);
    throw ConfigError(where + ": " + key + ": " + why);
  }

  double to_double(const std::string& key, const std::string& text) const {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) fail(key, "expected a finite number, got '" + text + "'");
    return v;
  }

  template <typename Int>
  Int to_int(const std::string& key, const std::string& text) const {
    Int v{};
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) fail(key, "expected an integer, got '" + text + "'");
    return v;
  }

  void read(const std::string& key, double& out) {
    if (auto* v = raw(key)) out = to_double(key, *v);
  }
  template <std::integral Int>
  void read(const std::string& key, Int& out) {
    if (auto* v = raw(key)) out = to_int<Int>(key, *v);
  }
  void read(const std::string& key, std::string& out) {
    if (auto* v = raw(key)) out = *v;
  }

  std::vector<double> read_list(const std::string& key, const std::string& text) const {
    std::vector<double> out;
    for (const auto& item : split_list(text)) out.push_back(to_double(key, item));
    return out;
  }

  FieldSpec read_field(const std::string& prefix, bool required) {
    FieldSpec f;
    const auto* kind = raw(prefix + ".kind");
    if (!kind) {
      if (required) fail(prefix + ".kind", "missing required key");
      return f;
    }
    try {
      f.kind = field_kind_from_string(*kind);
    } catch (const Error& e) {
      fail(prefix + ".kind", e.what());
    }
    const auto* params = raw(prefix + ".params");
    if (!params) fail(prefix + ".params", "missing required key");
    f.params = read_list(prefix + ".params", *params);
    return f;
  }

  void reject_unused() const {
    for (const auto& [key, e] : entries_)
      if (!e.used) throw ConfigError(source_ + ":" + std::to_string(e.line) + ": unknown key '" + key + "'");
  }

 private:
  std::map<std::string, Entry> entries_;
  std::string source_;
};

std::string fmt_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt_double(v[i]);
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  std::map<std::string, Entry> entries;
  std::stringstream ss(text);
  std::string line;
  int number = 0;
  while (std::getline(ss, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(number) + ": expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(number) + ": empty key");
    if (entries.count(key))
      throw ConfigError(source + ":" + std::to_string(number) + ": duplicate key '" + key + "'");
    entries[key] = {value, number, false};
  }

  Reader r(std::move(entries), source);
  RunConfig c;

  auto& pr = c.problem;
  r.read("problem.dimension", pr.dimension);
  if (pr.dimension != 1 && pr.dimension != 2) r.fail("problem.dimension", "must be 1 or 2");
  if (const auto* v = r.raw("problem.extent")) {
    const auto e = r.read_list("problem.extent", *v);
    if (pr.dimension == 1 && e.size() == 2)
      pr.extent = Box{e[0], e[1], 0.0, 1.0};
    else if (e.size() == 4)
      pr.extent = Box{e[0], e[1], e[2], e[3]};
    else
      r.fail("problem.extent", "expected x0, x1 (1D) or x0, x1, y0, y1");
  }
  r.read("problem.resolution", pr.resolution);
  pr.p = r.read_field("problem.p", true);
  pr.q = r.read_field("problem.q", true);
  pr.delta = r.read_field("problem.delta", true);
  pr.a = r.read_field("problem.a", true);
  pr.b = r.read_field("problem.b", true);
  const auto* lambda = r.raw("problem.lambda");
  if (!lambda) r.fail("problem.lambda", "missing required key (a number or 'auto')");
  if (*lambda != "auto") pr.lambda = r.to_double("problem.lambda", *lambda);
  r.read("problem.lambda_fraction", pr.lambda_fraction);
  if (!(pr.lambda_fraction > 0.0 && pr.lambda_fraction <= 1.0))
    r.fail("problem.lambda_fraction", "must lie in (0, 1]");

  auto& s = c.solver;
  r.read("solver.max_iters", s.max_iters);
  r.read("solver.step0", s.step0);
  r.read("solver.armijo_c", s.armijo_c);
  r.read("solver.shrink", s.shrink);
  r.read("solver.grad_floor", s.grad_floor);
  r.read("solver.energy_tol", s.energy_tol);
  r.read("solver.residual_tol", s.residual_tol);
  r.read("solver.seed", s.seed);
  try {
    s.validate();
  } catch (const Error& e) {
    throw ConfigError(source + ": " + e.what());
  }

  if (const auto* v = r.raw("scan.lambda_grid")) c.scan.lambda_grid = r.read_list("scan.lambda_grid", *v);
  r.read("scan.directions", c.scan.directions);
  r.read("scan.seed", c.scan.seed);
  r.read("scan.embedding_samples", c.scan.embedding_samples);
  if (c.scan.directions < 1) r.fail("scan.directions", "must be at least 1");
  if (c.scan.embedding_samples < 1) r.fail("scan.embedding_samples", "must be at least 1");

  r.read("oracle.starts", c.oracle.starts);
  r.read("oracle.resolution_cap", c.oracle.resolution_cap);
  r.read("oracle.seed", c.oracle.seed);
  if (c.oracle.starts < 1) r.fail("oracle.starts", "must be at least 1");

  r.read("fiber.t_min", c.fiber.t_min);
  r.read("fiber.t_max", c.fiber.t_max);
  r.read("fiber.samples", c.fiber.samples);

  if (const auto* kind = r.raw("function.kind"); kind && *kind != "eigen") {
    FieldSpec f;
    try {
      f.kind = field_kind_from_string(*kind);
    } catch (const Error& e) {
      r.fail("function.kind", e.what());
    }
    const auto* params = r.raw("function.params");
    if (!params) r.fail("function.params", "missing required key");
    f.params = r.read_list("function.params", *params);
    c.function.field = f;
  }

  r.read("output.dir", c.output.dir);
  if (const auto* v = r.raw("output.formats")) {
    c.output.json = c.output.csv = false;
    for (const auto& f : split_list(*v)) {
      if (f == "json")
        c.output.json = true;
      else if (f == "csv")
        c.output.csv = true;
      else
        r.fail("output.formats", "unknown format '" + f + "'");
    }
  }
  r.read("output.verbosity", c.output.verbosity);

  r.reject_unused();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  auto field = [&](const std::string& prefix, const FieldSpec& f) {
    os << prefix << ".kind = " << to_string(f.kind) << "\n" << prefix << ".params = " << fmt_list(f.params) << "\n";
  };
  const auto& p = c.problem;
  os << "problem.dimension = " << p.dimension << "\n";
  if (p.dimension == 1)
    os << "problem.extent = " << fmt_list({p.extent.x0, p.extent.x1}) << "\n";
  else
    os << "problem.extent = " << fmt_list({p.extent.x0, p.extent.x1, p.extent.y0, p.extent.y1}) << "\n";
  os << "problem.resolution = " << p.resolution << "\n";
  field("problem.p", p.p);
  field("problem.q", p.q);
  field("problem.delta", p.delta);
  field("problem.a", p.a);
  field("problem.b", p.b);
  os << "problem.lambda = " << (p.lambda ? fmt_double(*p.lambda) : std::string("auto")) << "\n";
  os << "problem.lambda_fraction = " << fmt_double(p.lambda_fraction) << "\n";

  const auto& s = c.solver;
  os << "solver.max_iters = " << s.max_iters << "\n"
     << "solver.step0 = " << fmt_double(s.step0) << "\n"
     << "solver.armijo_c = " << fmt_double(s.armijo_c) << "\n"
     << "solver.shrink = " << fmt_double(s.shrink) << "\n"
     << "solver.grad_floor = " << fmt_double(s.grad_floor) << "\n"
     << "solver.energy_tol = " << fmt_double(s.energy_tol) << "\n"
     << "solver.residual_tol = " << fmt_double(s.residual_tol) << "\n"
     << "solver.seed = " << s.seed << "\n";

  os << "scan.lambda_grid = " << fmt_list(c.scan.lambda_grid) << "\n"
     << "scan.directions = " << c.scan.directions << "\n"
     << "scan.seed = " << c.scan.seed << "\n"
     << "scan.embedding_samples = " << c.scan.embedding_samples << "\n";

  os << "oracle.starts = " << c.oracle.starts << "\n"
     << "oracle.resolution_cap = " << c.oracle.resolution_cap << "\n"
     << "oracle.seed = " << c.oracle.seed << "\n";

  os << "fiber.t_min = " << fmt_double(c.fiber.t_min) << "\n"
     << "fiber.t_max = " << fmt_double(c.fiber.t_max) << "\n"
     << "fiber.samples = " << c.fiber.samples << "\n";

  if (c.function.field)
    field("function", *c.function.field);
  else
    os << "function.kind = eigen\n";

  std::string formats;
  if (c.output.json) formats += "json";
  if (c.output.csv) formats += formats.empty() ? "csv" : ", csv";
  os << "output.dir = " << c.output.dir << "\n"
     << "output.formats = " << formats << "\n"
     << "output.verbosity = " << c.output.verbosity << "\n";
  return os.str();
}

ProblemData make_problem(const ProblemConfig& problem, double lambda) {
  try {
    auto mesh = build_mesh(problem.dimension, problem.extent, problem.resolution);
    return ProblemData(std::move(mesh), problem.p, problem.q, problem.delta, problem.a, problem.b, lambda);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace pxlap
