#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pxlap/domain.hpp"
#include "pxlap/error.hpp"

using namespace pxlap;

namespace {

const ClauseResult& clause(const HypothesisReport& r, const std::string& name) {
  for (const auto& c : r.clauses)
    if (c.clause == name) return c;
  FAIL("missing clause " << name);
  return r.clauses.front();
}

ProblemData constant_problem(double p, double q, double delta, double lambda = 0.1, int n = 16) {
  return ProblemData(build_mesh(1, Box{}, n), FieldSpec::constant(p), FieldSpec::constant(q),
                     FieldSpec::constant(delta), FieldSpec::constant(1.0), FieldSpec::constant(1.0), lambda);
}

}  // namespace

TEST_CASE("1D mesh with four segments") {
  const auto m = build_mesh(1, Box{0.0, 1.0}, 4);
  CHECK(m->num_vertices() == 5);
  CHECK(m->num_elements() == 4);
  CHECK(m->boundary_vertices() == std::vector<std::size_t>{0, 4});
  CHECK(m->total_measure() == doctest::Approx(1.0).epsilon(1e-12));
  for (double len : m->element_measures()) CHECK(len == doctest::Approx(0.25));
}

TEST_CASE("2D mesh of the unit square at resolution 2") {
  const auto m = build_mesh(2, Box{0.0, 1.0, 0.0, 1.0}, 2);
  CHECK(m->num_vertices() == 9);
  CHECK(m->num_elements() == 8);
  CHECK(m->boundary_vertices().size() == 8);
  CHECK(m->interior_vertices() == std::vector<std::size_t>{4});
  CHECK(std::abs(m->total_measure() - 1.0) <= 1e-12);
  for (double area : m->element_measures()) CHECK(area > 0.0);
}

TEST_CASE("mesh construction rejects bad input") {
  CHECK_THROWS_AS(build_mesh(1, Box{0.0, 1.0}, 1), InvalidArgument);
  CHECK_THROWS_AS(build_mesh(1, Box{1.0, 1.0}, 4), InvalidArgument);
  CHECK_THROWS_AS(build_mesh(2, Box{0.0, 1.0, 0.5, 0.0}, 4), InvalidArgument);
  CHECK_THROWS_AS(build_mesh(3, Box{}, 4), InvalidArgument);
}

TEST_CASE("every vertex on the box boundary is tagged") {
  const Box box{-1.0, 2.0, 0.5, 1.5};
  const auto m = build_mesh(2, box, 7);
  for (std::size_t i = 0; i < m->num_vertices(); ++i) {
    const Point& x = m->vertices()[i];
    const bool on_edge = x.x == box.x0 || x.x == box.x1 || x.y == box.y0 || x.y == box.y1;
    CHECK(m->is_boundary(i) == on_edge);
  }
}

TEST_CASE("refinement keeps the total measure") {
  for (int dim : {1, 2}) {
    const Box box{0.0, 2.5, -1.0, 0.75};
    const double exact = dim == 1 ? 2.5 : 2.5 * 1.75;
    for (int n : {3, 6, 12, 24}) {
      CHECK(std::abs(build_mesh(dim, box, n)->total_measure() - exact) <= 1e-12 * exact);
      CHECK(std::abs(build_mesh(dim, box, 2 * n)->total_measure() - build_mesh(dim, box, n)->total_measure()) <=
            1e-12 * exact);
    }
  }
}

TEST_CASE("lumped mass rows sum to the domain measure") {
  const auto m = build_mesh(2, Box{0.0, 1.0, 0.0, 2.0}, 5);
  double s = 0.0;
  for (double v : m->lumped_mass()) s += v;
  CHECK(s == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("field evaluation") {
  CHECK(eval_field(FieldSpec::constant(2.0), Point{0.3, 0.0}, 1) == 2.0);
  CHECK(eval_field(FieldSpec::affine(2.0, 1.0), Point{0.5, 0.0}, 1) == doctest::Approx(2.5));
  const auto bump = FieldSpec::bump(1.0, 0.25, 0.75);
  CHECK(eval_field(bump, Point{0.1, 0.0}, 1) == 0.0);
  CHECK(eval_field(bump, Point{0.9, 0.0}, 1) == 0.0);
  CHECK(eval_field(bump, Point{0.5, 0.0}, 1) == doctest::Approx(1.0));
  for (int i = 0; i <= 100; ++i) CHECK(eval_field(bump, Point{i / 100.0, 0.0}, 1) >= 0.0);
  const auto bump2 = FieldSpec::bump(2.0, 0.2, 0.8, 0.3, 0.6);
  CHECK(eval_field(bump2, Point{0.5, 0.2}, 2) == 0.0);
  CHECK(eval_field(bump2, Point{0.5, 0.45}, 2) == doctest::Approx(2.0));
  CHECK(eval_field(FieldSpec::sinusoidal(1.0, 0.5, 2.0, 0.0, 0.0), Point{0.25, 0.0}, 1) ==
        doctest::Approx(1.0 + 0.5 * std::sin(0.5)));
}

TEST_CASE("field kind names round-trip") {
  for (FieldKind k : {FieldKind::constant, FieldKind::affine, FieldKind::sinusoidal, FieldKind::bump})
    CHECK(field_kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(field_kind_from_string("gaussian"), InvalidArgument);
}

TEST_CASE("Sobolev conjugate") {
  CHECK(sobolev_conjugate(2.0, 1) == std::numeric_limits<double>::infinity());
  CHECK(sobolev_conjugate(2.0, 2) == std::numeric_limits<double>::infinity());
  CHECK(sobolev_conjugate(1.5, 2) == doctest::Approx(6.0));
}

TEST_CASE("hypotheses hold for the constant reference exponents") {
  const auto r = validate_hypotheses(constant_problem(2.0, 4.0, 0.5));
  CHECK(r.passed());
  CHECK_NOTHROW(require_hypotheses(constant_problem(2.0, 4.0, 0.5)));
}

TEST_CASE("q below p fails the ordering clause") {
  const auto r = validate_hypotheses(constant_problem(4.0, 3.0, 0.5));
  CHECK_FALSE(r.passed());
  const auto& c = clause(r, "(A0) p(x) < q(x)");
  CHECK_FALSE(c.passed);
  REQUIRE(c.element.has_value());
  CHECK(*c.element == 0);
  CHECK_THROWS_AS(require_hypotheses(constant_problem(4.0, 3.0, 0.5)), HypothesisViolation);
}

TEST_CASE("delta above one fails the positivity clause") {
  const auto r = validate_hypotheses(constant_problem(2.0, 4.0, 1.2));
  CHECK_FALSE(clause(r, "(A0) 0 < 1-delta(x)").passed);
}

TEST_CASE("q above the critical exponent fails in 2D") {
  const ProblemData d(build_mesh(2, Box{}, 4), FieldSpec::constant(1.5), FieldSpec::constant(7.0),
                      FieldSpec::constant(0.5), FieldSpec::constant(1.0), FieldSpec::constant(1.0), 0.1);
  CHECK_FALSE(clause(validate_hypotheses(d), "(A0) q(x) < p*(x)").passed);
}

TEST_CASE("variable exponents overlapping in range fail the extremum clause") {
  // p in [2, 3] and q in [2.5, 4.5] satisfy p < q pointwise but not p^+ < q^-.
  const ProblemData d(build_mesh(1, Box{}, 32), FieldSpec::affine(2.0, 1.0), FieldSpec::affine(2.5, 2.0),
                      FieldSpec::constant(0.5), FieldSpec::constant(1.0), FieldSpec::constant(1.0), 0.1);
  const auto r = validate_hypotheses(d);
  CHECK(clause(r, "(A0) p(x) < q(x)").passed);
  CHECK_FALSE(clause(r, "(A1) p^+ < q^-").passed);
}

TEST_CASE("weights and lambda") {
  const ProblemData neg(build_mesh(1, Box{}, 8), FieldSpec::constant(2.0), FieldSpec::constant(4.0),
                        FieldSpec::constant(0.5), FieldSpec::constant(-1.0), FieldSpec::constant(1.0), 0.1);
  CHECK_FALSE(clause(validate_hypotheses(neg), "weight a(x) >= 0").passed);
  const ProblemData zero_b(build_mesh(1, Box{}, 8), FieldSpec::constant(2.0), FieldSpec::constant(4.0),
                           FieldSpec::constant(0.5), FieldSpec::constant(1.0), FieldSpec::constant(0.0), 0.1);
  CHECK_FALSE(clause(validate_hypotheses(zero_b), "weight b positive somewhere").passed);
  CHECK_FALSE(clause(validate_hypotheses(constant_problem(2.0, 4.0, 0.5, -0.1)), "lambda >= 0").passed);
  CHECK(validate_hypotheses(constant_problem(2.0, 4.0, 0.5, 0.0)).passed());
}

TEST_CASE("validation is pure") {
  const auto d = constant_problem(4.0, 3.0, 1.2);
  const auto a = validate_hypotheses(d);
  const auto b = validate_hypotheses(d);
  REQUIRE(a.clauses.size() == b.clauses.size());
  for (std::size_t i = 0; i < a.clauses.size(); ++i) {
    CHECK(a.clauses[i].clause == b.clauses[i].clause);
    CHECK(a.clauses[i].passed == b.clauses[i].passed);
    CHECK(a.clauses[i].element == b.clauses[i].element);
    CHECK(a.clauses[i].detail == b.clauses[i].detail);
  }
  CHECK(a.summary() == b.summary());
}

TEST_CASE("affine exponent extrema move toward the endpoint values under refinement") {
  double prev_min = std::numeric_limits<double>::infinity();
  double prev_max = -std::numeric_limits<double>::infinity();
  for (int n : {4, 8, 16, 32, 64}) {
    const ProblemData d(build_mesh(1, Box{}, n), FieldSpec::affine(2.0, 1.0), FieldSpec::constant(4.0),
                        FieldSpec::constant(0.5), FieldSpec::constant(1.0), FieldSpec::constant(1.0), 0.1);
    const auto& ex = d.extrema();
    CHECK(ex.p_minus <= prev_min);
    CHECK(ex.p_plus >= prev_max);
    CHECK(ex.p_minus > 2.0);
    CHECK(ex.p_plus < 3.0);
    prev_min = ex.p_minus;
    prev_max = ex.p_plus;
  }
  CHECK(prev_min == doctest::Approx(2.0 + 0.5 / 64));
  CHECK(prev_max == doctest::Approx(3.0 - 0.5 / 64));
}

TEST_CASE("mesh CSV tables carry headers") {
  const auto m = build_mesh(1, Box{}, 2);
  std::ostringstream v, e;
  write_vertex_csv(v, *m);
  write_element_csv(e, *m);
  const std::string vs = v.str(), es = e.str();
  CHECK(vs.rfind("index,x,y,boundary\n", 0) == 0);
  CHECK(es.rfind("index,v0,v1,v2,measure\n", 0) == 0);
  CHECK(std::count(vs.begin(), vs.end(), '\n') == 4);
  CHECK(std::count(es.begin(), es.end(), '\n') == 3);
}
