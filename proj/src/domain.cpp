#include "pxlap/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "pxlap/error.hpp"

namespace pxlap {

Mesh::Mesh(int dimension, Box extent, std::vector<Point> vertices, std::vector<Element> elements,
           std::vector<bool> on_boundary)
    : dimension_(dimension),
      extent_(extent),
      vertices_(std::move(vertices)),
      elements_(std::move(elements)),
      on_boundary_(std::move(on_boundary)) {
  if (dimension_ != 1 && dimension_ != 2) throw InvalidArgument("mesh dimension must be 1 or 2");
  if (on_boundary_.size() != vertices_.size())
    throw InvalidArgument("boundary mask size does not match vertex count");

  for (std::size_t i = 0; i < vertices_.size(); ++i)
    (on_boundary_[i] ? boundary_vertices_ : interior_vertices_).push_back(i);

  measures_.reserve(elements_.size());
  centroids_.reserve(elements_.size());
  basis_gradients_.reserve(elements_.size());
  lumped_mass_.assign(vertices_.size(), 0.0);

  for (const auto& el : elements_) {
    for (std::size_t k = 0; k < nodes_per_element(); ++k)
      if (el[k] >= vertices_.size()) throw InvalidArgument("element references a missing vertex");

    std::array<Point, 3> grads{};
    double measure = 0.0;
    Point centroid;
    if (dimension_ == 1) {
      const double x0 = vertices_[el[0]].x;
      const double x1 = vertices_[el[1]].x;
      const double h = x1 - x0;
      measure = std::abs(h);
      grads[0] = {-1.0 / h, 0.0};
      grads[1] = {1.0 / h, 0.0};
      centroid = {0.5 * (x0 + x1), 0.0};
    } else {
      const Point& p0 = vertices_[el[0]];
      const Point& p1 = vertices_[el[1]];
      const Point& p2 = vertices_[el[2]];
      const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
      measure = 0.5 * std::abs(det);
      grads[0] = {(p1.y - p2.y) / det, (p2.x - p1.x) / det};
      grads[1] = {(p2.y - p0.y) / det, (p0.x - p2.x) / det};
      grads[2] = {(p0.y - p1.y) / det, (p1.x - p0.x) / det};
      centroid = {(p0.x + p1.x + p2.x) / 3.0, (p0.y + p1.y + p2.y) / 3.0};
    }
    if (!(measure > 0.0)) throw InvalidArgument("degenerate element with non-positive measure");

    measures_.push_back(measure);
    centroids_.push_back(centroid);
    basis_gradients_.push_back(grads);
    const double share = measure / static_cast<double>(nodes_per_element());
    for (std::size_t k = 0; k < nodes_per_element(); ++k) lumped_mass_[el[k]] += share;
  }
}

double Mesh::domain_measure() const noexcept {
  const double lx = extent_.x1 - extent_.x0;
  return dimension_ == 1 ? lx : lx * (extent_.y1 - extent_.y0);
}

double Mesh::total_measure() const noexcept {
  double total = 0.0;
  for (double m : measures_) total += m;
  return total;
}

std::shared_ptr<const Mesh> build_mesh(int dimension, const Box& extent, int resolution) {
  if (dimension != 1 && dimension != 2) throw InvalidArgument("dimension must be 1 or 2");
  if (resolution < 2) throw InvalidArgument("resolution must be at least 2");
  if (!(extent.x1 > extent.x0)) throw InvalidArgument("domain extent must be positive in x");
  if (dimension == 2 && !(extent.y1 > extent.y0)) throw InvalidArgument("domain extent must be positive in y");

  const auto n = static_cast<std::size_t>(resolution);
  std::vector<Point> vertices;
  std::vector<Mesh::Element> elements;
  std::vector<bool> boundary;

  if (dimension == 1) {
    const double h = (extent.x1 - extent.x0) / static_cast<double>(n);
    for (std::size_t i = 0; i <= n; ++i) {
      // Pin the last vertex so the measures sum exactly to the extent.
      const double x = (i == n) ? extent.x1 : extent.x0 + h * static_cast<double>(i);
      vertices.push_back({x, 0.0});
      boundary.push_back(i == 0 || i == n);
    }
    for (std::size_t i = 0; i < n; ++i) elements.push_back({i, i + 1, 0});
  } else {
    const double hx = (extent.x1 - extent.x0) / static_cast<double>(n);
    const double hy = (extent.y1 - extent.y0) / static_cast<double>(n);
    for (std::size_t j = 0; j <= n; ++j) {
      for (std::size_t i = 0; i <= n; ++i) {
        const double x = (i == n) ? extent.x1 : extent.x0 + hx * static_cast<double>(i);
        const double y = (j == n) ? extent.y1 : extent.y0 + hy * static_cast<double>(j);
        vertices.push_back({x, y});
        boundary.push_back(i == 0 || i == n || j == 0 || j == n);
      }
    }
    const std::size_t row = n + 1;
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t v00 = j * row + i;
        const std::size_t v10 = v00 + 1;
        const std::size_t v01 = v00 + row;
        const std::size_t v11 = v01 + 1;
        elements.push_back({v00, v10, v11});
        elements.push_back({v00, v11, v01});
      }
    }
  }
  return std::make_shared<const Mesh>(dimension, extent, std::move(vertices), std::move(elements),
                                      std::move(boundary));
}

void write_vertex_csv(std::ostream& os, const Mesh& mesh) {
  os << "index,x,y,boundary\n";
  os.precision(17);
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    const auto& v = mesh.vertices()[i];
    os << i << ',' << v.x << ',' << v.y << ',' << (mesh.is_boundary(i) ? 1 : 0) << '\n';
  }
}

void write_element_csv(std::ostream& os, const Mesh& mesh) {
  os << "index,v0,v1,v2,measure\n";
  os.precision(17);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.elements()[e];
    os << e << ',' << el[0] << ',' << el[1] << ',';
    if (mesh.dimension() == 2)
      os << el[2];
    else
      os << -1;
    os << ',' << mesh.element_measures()[e] << '\n';
  }
}

std::string to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::constant: return "constant";
    case FieldKind::affine: return "affine";
    case FieldKind::sinusoidal: return "sinusoidal";
    case FieldKind::bump: return "bump";
  }
  return "unknown";
}

FieldKind field_kind_from_string(const std::string& name) {
  if (name == "constant") return FieldKind::constant;
  if (name == "affine") return FieldKind::affine;
  if (name == "sinusoidal") return FieldKind::sinusoidal;
  if (name == "bump") return FieldKind::bump;
  throw InvalidArgument("unknown field kind '" + name + "'");
}

namespace {

double param(const FieldSpec& f, std::size_t i) { return i < f.params.size() ? f.params[i] : 0.0; }

// sin^2 profile on [lo, hi], zero outside.
double bump_factor(double t, double lo, double hi) {
  if (t <= lo || t >= hi) return 0.0;
  const double s = std::sin(std::numbers::pi * (t - lo) / (hi - lo));
  return s * s;
}

}  // namespace

void check_field(const FieldSpec& f, int dimension) {
  for (double v : f.params)
    if (!std::isfinite(v)) throw InvalidArgument(to_string(f.kind) + " field has a non-finite parameter");
  const std::size_t needed = [&]() -> std::size_t {
    switch (f.kind) {
      case FieldKind::constant: return 1;
      case FieldKind::affine: return 1;
      case FieldKind::sinusoidal: return 2;
      case FieldKind::bump: return dimension == 2 ? 5 : 3;
    }
    return 1;
  }();
  if (f.params.size() < needed)
    throw InvalidArgument(to_string(f.kind) + " field needs at least " + std::to_string(needed) + " parameters");
  if (f.kind == FieldKind::bump) {
    if (f.params[0] < 0.0) throw InvalidArgument("bump height must be non-negative");
    if (!(f.params[2] > f.params[1])) throw InvalidArgument("bump x-range must be non-empty");
    if (dimension == 2 && !(f.params[4] > f.params[3])) throw InvalidArgument("bump y-range must be non-empty");
  }
}

double eval_field(const FieldSpec& f, const Point& x, int dimension) {
  switch (f.kind) {
    case FieldKind::constant: return param(f, 0);
    case FieldKind::affine: return param(f, 0) + param(f, 1) * x.x + param(f, 2) * x.y;
    case FieldKind::sinusoidal:
      return param(f, 0) + param(f, 1) * std::sin(param(f, 2) * x.x + param(f, 3) * x.y + param(f, 4));
    case FieldKind::bump: {
      double v = param(f, 0) * bump_factor(x.x, param(f, 1), param(f, 2));
      if (dimension == 2) v *= bump_factor(x.y, param(f, 3), param(f, 4));
      return v;
    }
  }
  return 0.0;
}

std::vector<double> sample_at_centroids(const FieldSpec& f, const Mesh& mesh) {
  std::vector<double> out;
  out.reserve(mesh.num_elements());
  for (const auto& c : mesh.element_centroids()) out.push_back(eval_field(f, c, mesh.dimension()));
  return out;
}

ProblemData::ProblemData(std::shared_ptr<const Mesh> mesh, FieldSpec p, FieldSpec q, FieldSpec delta,
                         FieldSpec a, FieldSpec b, double lambda)
    : mesh_(std::move(mesh)),
      p_(std::move(p)),
      q_(std::move(q)),
      delta_(std::move(delta)),
      a_(std::move(a)),
      b_(std::move(b)),
      lambda_(lambda) {
  if (!mesh_) throw InvalidArgument("problem data needs a mesh");
  if (!std::isfinite(lambda_)) throw InvalidArgument("lambda must be finite");
  const int dim = mesh_->dimension();
  for (const FieldSpec* f : {&p_, &q_, &delta_, &a_, &b_}) check_field(*f, dim);

  p_at_ = sample_at_centroids(p_, *mesh_);
  q_at_ = sample_at_centroids(q_, *mesh_);
  delta_at_ = sample_at_centroids(delta_, *mesh_);
  a_at_ = sample_at_centroids(a_, *mesh_);
  b_at_ = sample_at_centroids(b_, *mesh_);

  auto [pmin, pmax] = std::minmax_element(p_at_.begin(), p_at_.end());
  auto [qmin, qmax] = std::minmax_element(q_at_.begin(), q_at_.end());
  auto [dmin, dmax] = std::minmax_element(delta_at_.begin(), delta_at_.end());
  extrema_ = {*pmin, *pmax, *qmin, *qmax, *dmin, *dmax};
}

ProblemData ProblemData::with_lambda(double lambda) const {
  ProblemData copy = *this;
  if (!std::isfinite(lambda)) throw InvalidArgument("lambda must be finite");
  copy.lambda_ = lambda;
  return copy;
}

double sobolev_conjugate(double p, int dimension) {
  const double n = static_cast<double>(dimension);
  if (p >= n) return std::numeric_limits<double>::infinity();
  return n * p / (n - p);
}

bool HypothesisReport::passed() const {
  return std::all_of(clauses.begin(), clauses.end(), [](const ClauseResult& c) { return c.passed; });
}

std::string HypothesisReport::summary() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& c : clauses) {
    if (c.passed) continue;
    if (!first) os << "; ";
    first = false;
    os << c.clause;
    if (c.element) os << " violated at element " << *c.element << " (x=" << c.location.x << ", y=" << c.location.y << ")";
    if (!c.detail.empty()) os << ": " << c.detail;
  }
  return first ? std::string("all hypotheses hold") : os.str();
}

namespace {

template <class Pred>
ClauseResult pointwise_clause(const std::string& name, const ProblemData& data, Pred pred) {
  ClauseResult r{name, true, std::nullopt, {}, {}};
  const auto& centroids = data.mesh().element_centroids();
  for (std::size_t e = 0; e < centroids.size(); ++e) {
    std::string detail;
    if (!pred(e, detail)) {
      r.passed = false;
      r.element = e;
      r.location = centroids[e];
      r.detail = detail;
      break;
    }
  }
  return r;
}

std::string fmt_values(std::initializer_list<std::pair<const char*, double>> values) {
  std::ostringstream os;
  os.precision(10);
  bool first = true;
  for (const auto& [name, v] : values) {
    if (!first) os << ", ";
    first = false;
    os << name << '=' << v;
  }
  return os.str();
}

}  // namespace

HypothesisReport validate_hypotheses(const ProblemData& data) {
  HypothesisReport report;
  const auto& p = data.p_at();
  const auto& q = data.q_at();
  const auto& d = data.delta_at();
  const auto& a = data.a_at();
  const auto& b = data.b_at();
  const int dim = data.mesh().dimension();

  report.clauses.push_back(pointwise_clause("fields finite", data, [&](std::size_t e, std::string& why) {
    const bool ok = std::isfinite(p[e]) && std::isfinite(q[e]) && std::isfinite(d[e]) && std::isfinite(a[e]) &&
                    std::isfinite(b[e]);
    if (!ok) why = "non-finite field value";
    return ok;
  }));
  report.clauses.push_back(pointwise_clause("(A0) 0 < 1-delta(x)", data, [&](std::size_t e, std::string& why) {
    why = fmt_values({{"delta", d[e]}});
    return 1.0 - d[e] > 0.0;
  }));
  report.clauses.push_back(pointwise_clause("(A0) 1-delta(x) < p(x)", data, [&](std::size_t e, std::string& why) {
    why = fmt_values({{"1-delta", 1.0 - d[e]}, {"p", p[e]}});
    return 1.0 - d[e] < p[e];
  }));
  report.clauses.push_back(pointwise_clause("(A0) p(x) < q(x)", data, [&](std::size_t e, std::string& why) {
    why = fmt_values({{"p", p[e]}, {"q", q[e]}});
    return p[e] < q[e];
  }));
  report.clauses.push_back(pointwise_clause("(A0) q(x) < p*(x)", data, [&](std::size_t e, std::string& why) {
    const double crit = sobolev_conjugate(p[e], dim);
    why = fmt_values({{"q", q[e]}, {"p*", crit}});
    return q[e] < crit;
  }));

  const auto& ex = data.extrema();
  const double s_min = 1.0 - ex.delta_plus;   // smallest value of 1 - delta
  const double s_max = 1.0 - ex.delta_minus;  // largest value of 1 - delta
  auto extremum_clause = [](std::string name, bool ok, std::string detail) {
    return ClauseResult{std::move(name), ok, std::nullopt, {}, ok ? std::string{} : std::move(detail)};
  };
  report.clauses.push_back(extremum_clause("(A1) 0 < 1-delta^+", s_min > 0.0, fmt_values({{"1-delta^+", s_min}})));
  report.clauses.push_back(extremum_clause("(A1) 1-delta(x) < p^- for all x", s_max < ex.p_minus,
                                           fmt_values({{"1-delta^-", s_max}, {"p^-", ex.p_minus}})));
  report.clauses.push_back(
      extremum_clause("(A1) p^+ < q^-", ex.p_plus < ex.q_minus, fmt_values({{"p^+", ex.p_plus}, {"q^-", ex.q_minus}})));

  report.clauses.push_back(pointwise_clause("weight a(x) >= 0", data, [&](std::size_t e, std::string& why) {
    why = fmt_values({{"a", a[e]}});
    return a[e] >= 0.0;
  }));
  report.clauses.push_back(pointwise_clause("weight b(x) >= 0", data, [&](std::size_t e, std::string& why) {
    why = fmt_values({{"b", b[e]}});
    return b[e] >= 0.0;
  }));
  const bool a_somewhere = std::any_of(a.begin(), a.end(), [](double v) { return v > 0.0; });
  const bool b_somewhere = std::any_of(b.begin(), b.end(), [](double v) { return v > 0.0; });
  report.clauses.push_back(extremum_clause("weight a positive somewhere", a_somewhere, "a vanishes at every centroid"));
  report.clauses.push_back(extremum_clause("weight b positive somewhere", b_somewhere, "b vanishes at every centroid"));
  report.clauses.push_back(
      extremum_clause("lambda >= 0", data.lambda() >= 0.0, fmt_values({{"lambda", data.lambda()}})));
  return report;
}

void require_hypotheses(const ProblemData& data) {
  const auto report = validate_hypotheses(data);
  if (!report.passed()) throw HypothesisViolation(report.summary());
}

}  // namespace pxlap
