#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pxlap {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Axis-aligned extent of the computational domain. In 1D only [x0, x1] is used.
struct Box {
  double x0 = 0.0;
  double x1 = 1.0;
  double y0 = 0.0;
  double y1 = 1.0;
};

/// Simplicial mesh of an interval (segments) or a rectangle (triangles) with
/// first-order Lagrange geometry precomputed per element.
class Mesh {
 public:
  using Element = std::array<std::size_t, 3>;  // third slot unused in 1D

  Mesh(int dimension, Box extent, std::vector<Point> vertices, std::vector<Element> elements,
       std::vector<bool> on_boundary);

  int dimension() const noexcept { return dimension_; }
  const Box& extent() const noexcept { return extent_; }
  std::size_t nodes_per_element() const noexcept { return static_cast<std::size_t>(dimension_) + 1; }

  std::size_t num_vertices() const noexcept { return vertices_.size(); }
  std::size_t num_elements() const noexcept { return elements_.size(); }

  const std::vector<Point>& vertices() const noexcept { return vertices_; }
  const std::vector<Element>& elements() const noexcept { return elements_; }
  const std::vector<std::size_t>& boundary_vertices() const noexcept { return boundary_vertices_; }
  const std::vector<std::size_t>& interior_vertices() const noexcept { return interior_vertices_; }
  bool is_boundary(std::size_t vertex) const { return on_boundary_[vertex]; }

  const std::vector<double>& element_measures() const noexcept { return measures_; }
  const std::vector<Point>& element_centroids() const noexcept { return centroids_; }

  /// Gradients of the local hat functions on element `e` (constant per element).
  const std::array<Point, 3>& basis_gradients(std::size_t e) const { return basis_gradients_[e]; }

  /// Row sums of the consistent P1 mass matrix (lumped mass) per vertex.
  const std::vector<double>& lumped_mass() const noexcept { return lumped_mass_; }

  /// Measure of the box extent.
  double domain_measure() const noexcept;

  /// Sum of element measures.
  double total_measure() const noexcept;

 private:
  int dimension_;
  Box extent_;
  std::vector<Point> vertices_;
  std::vector<Element> elements_;
  std::vector<bool> on_boundary_;
  std::vector<std::size_t> boundary_vertices_;
  std::vector<std::size_t> interior_vertices_;
  std::vector<double> measures_;
  std::vector<Point> centroids_;
  std::vector<std::array<Point, 3>> basis_gradients_;
  std::vector<double> lumped_mass_;
};

/// Uniform mesh of `extent`: `resolution` segments in 1D, resolution^2 squares
/// each cut into two triangles in 2D. Throws InvalidArgument on bad input.
std::shared_ptr<const Mesh> build_mesh(int dimension, const Box& extent, int resolution);

/// Writes "index,x,y,boundary" rows.
void write_vertex_csv(std::ostream& os, const Mesh& mesh);
/// Writes "index,v0,v1,v2,measure" rows (v2 = -1 in 1D).
void write_element_csv(std::ostream& os, const Mesh& mesh);

enum class FieldKind { constant, affine, sinusoidal, bump };

/// Continuous scalar field on the closed domain.
///
/// Parameter layouts (missing trailing entries default to 0):
///   constant   [c]
///   affine     [c0, gx, gy]                        c0 + gx*x + gy*y
///   sinusoidal [offset, amplitude, fx, fy, phase]  offset + amplitude*sin(fx*x + fy*y + phase)
///   bump       [height, x_lo, x_hi, y_lo, y_hi]    height * prod sin^2(pi*s) on the box, 0 outside
/// where s is the coordinate rescaled to [0,1] across the box. The bump's y-range
/// is ignored in 1D.
struct FieldSpec {
  FieldKind kind = FieldKind::constant;
  std::vector<double> params{0.0};

  static FieldSpec constant(double c) { return {FieldKind::constant, {c}}; }
  static FieldSpec affine(double c0, double gx, double gy = 0.0) { return {FieldKind::affine, {c0, gx, gy}}; }
  static FieldSpec sinusoidal(double offset, double amplitude, double fx, double fy = 0.0, double phase = 0.0) {
    return {FieldKind::sinusoidal, {offset, amplitude, fx, fy, phase}};
  }
  static FieldSpec bump(double height, double x_lo, double x_hi, double y_lo = 0.0, double y_hi = 1.0) {
    return {FieldKind::bump, {height, x_lo, x_hi, y_lo, y_hi}};
  }
};

std::string to_string(FieldKind kind);
FieldKind field_kind_from_string(const std::string& name);

/// Throws InvalidArgument if the parameter list does not fit the kind.
void check_field(const FieldSpec& f, int dimension);

double eval_field(const FieldSpec& f, const Point& x, int dimension = 2);

/// Field values at every element centroid.
std::vector<double> sample_at_centroids(const FieldSpec& f, const Mesh& mesh);

struct ExponentExtrema {
  double p_minus = 0.0, p_plus = 0.0;
  double q_minus = 0.0, q_plus = 0.0;
  double delta_minus = 0.0, delta_plus = 0.0;
};

/// The problem -div(|grad u|^{p-2} grad u) = a u^{q-1} + lambda b u^{-delta}, u = 0 on the
/// boundary, together with centroid samples of every field.
class ProblemData {
 public:
  ProblemData(std::shared_ptr<const Mesh> mesh, FieldSpec p, FieldSpec q, FieldSpec delta, FieldSpec a,
              FieldSpec b, double lambda);

  const Mesh& mesh() const noexcept { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const noexcept { return mesh_; }

  const FieldSpec& p() const noexcept { return p_; }
  const FieldSpec& q() const noexcept { return q_; }
  const FieldSpec& delta() const noexcept { return delta_; }
  const FieldSpec& a() const noexcept { return a_; }
  const FieldSpec& b() const noexcept { return b_; }
  double lambda() const noexcept { return lambda_; }

  const std::vector<double>& p_at() const noexcept { return p_at_; }
  const std::vector<double>& q_at() const noexcept { return q_at_; }
  const std::vector<double>& delta_at() const noexcept { return delta_at_; }
  const std::vector<double>& a_at() const noexcept { return a_at_; }
  const std::vector<double>& b_at() const noexcept { return b_at_; }

  const ExponentExtrema& extrema() const noexcept { return extrema_; }

  ProblemData with_lambda(double lambda) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  FieldSpec p_, q_, delta_, a_, b_;
  double lambda_;
  std::vector<double> p_at_, q_at_, delta_at_, a_at_, b_at_;
  ExponentExtrema extrema_;
};

/// Sobolev conjugate N p / (N - p), or +infinity when p >= N.
double sobolev_conjugate(double p, int dimension);

struct ClauseResult {
  std::string clause;
  bool passed = true;
  std::optional<std::size_t> element;  // first violating centroid, if any
  Point location;
  std::string detail;
};

struct HypothesisReport {
  std::vector<ClauseResult> clauses;

  bool passed() const;
  /// Human-readable list of the failing clauses.
  std::string summary() const;
};

HypothesisReport validate_hypotheses(const ProblemData& data);

/// Throws HypothesisViolation carrying the report summary when any clause fails.
void require_hypotheses(const ProblemData& data);

}  // namespace pxlap
