#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pxlap/error.hpp"
#include "pxlap/solver.hpp"
#include "reference.hpp"

using namespace pxlap;

namespace {

double reference_lambda() {
  static const double lambda = 0.5 * ref::threshold(64).lambda0;
  return lambda;
}

const SolveReport& reference_report() {
  static const SolveReport r = solve_both(ref::problem(64, reference_lambda()), SolveConfig{});
  return r;
}

ProblemData unit_weights(int n, double lambda) {
  return ProblemData(build_mesh(1, Box{}, n), FieldSpec::constant(2.0), FieldSpec::constant(4.0),
                     FieldSpec::constant(0.5), FieldSpec::constant(1.0), FieldSpec::constant(1.0), lambda);
}

}  // namespace

TEST_CASE("solve config validation") {
  SolveConfig c;
  CHECK_NOTHROW(c.validate());
  c.armijo_c = 1.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = SolveConfig{};
  c.shrink = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = SolveConfig{};
  c.residual_tol = -1.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = SolveConfig{};
  c.max_iters = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("reference problem: two solutions with opposite energy signs") {
  const auto& r = reference_report();
  REQUIRE(r.plus.converged());
  REQUIRE(r.minus.converged());
  CHECK(r.plus.energy < 0.0);
  CHECK(r.minus.energy > 0.0);
  CHECK(r.plus.weak_residual <= 1e-6 * r.plus.residual_scale);
  CHECK(r.minus.weak_residual <= 1e-6 * r.minus.residual_scale);
  CHECK(r.distinct);
  CHECK(r.success());
  CHECK(r.sup_distance > kDistinctnessFactor * r.distinctness_scale);
  CHECK(r.sobolev_distance > 0.0);
  CHECK(r.lambda_used == reference_lambda());
  MESSAGE("E+ " << r.plus.energy << " E- " << r.minus.energy << " iterations " << r.plus.iterations << "/"
                << r.minus.iterations);
}

TEST_CASE("reference solutions verify as positive solutions on their branches") {
  const auto& r = reference_report();
  const auto d = ref::problem(64, reference_lambda());
  REQUIRE(r.plus.verification.has_value());
  REQUIRE(r.minus.verification.has_value());
  CHECK(r.plus.verification->passed());
  CHECK(r.minus.verification->passed());
  CHECK(r.plus.verification->classification == FiberClass::n_plus);
  CHECK(r.minus.verification->classification == FiberClass::n_minus);
  CHECK(classify(*r.plus.u, d).kind == FiberClass::n_plus);
  CHECK(classify(*r.minus.u, d).kind == FiberClass::n_minus);
  for (std::size_t i : d.mesh().interior_vertices()) {
    CHECK((*r.plus.u)[i] >= r.plus.verification->floor);
    CHECK((*r.minus.u)[i] >= r.minus.verification->floor);
  }
  CHECK(r.sup_distance > 10.0 * std::max(r.plus.verification->floor, r.minus.verification->floor));
}

TEST_CASE("energy traces do not increase") {
  const auto& r = reference_report();
  for (const auto* b : {&r.plus, &r.minus}) {
    REQUIRE(b->trace.size() >= 2);
    for (std::size_t k = 1; k < b->trace.size(); ++k) CHECK(b->trace[k].energy <= b->trace[k - 1].energy);
  }
  for (const auto& row : r.plus.trace) CHECK(row.curvature > 0.0);
  for (const auto& row : r.minus.trace) CHECK(row.curvature < 0.0);
}

TEST_CASE("N+ minimizer satisfies the strict negative-energy bound") {
  const auto& r = reference_report();
  const auto d = ref::problem(64, reference_lambda());
  const auto& ex = d.extrema();
  const double k = (ex.p_minus + ex.delta_plus - 1.0) * (ex.q_plus - ex.p_minus) /
                   (ex.p_minus * ex.q_plus * (1.0 - ex.delta_plus));
  CHECK(k == doctest::Approx(0.75));
  const double norm = sobolev_norm(*r.plus.u, d.p_at());
  CHECK(r.plus.energy < -k * std::pow(norm, ex.p_minus));
  MESSAGE("E+ " << r.plus.energy << " bound " << -k * std::pow(norm, ex.p_minus));
}

TEST_CASE("iterates stay inside the coercivity radius") {
  const auto& r = reference_report();
  const auto d = ref::problem(64, reference_lambda());
  const auto c = estimate_embedding_constants(d, ref::kEmbeddingSamples, ref::kSeed);
  for (const auto* b : {&r.plus, &r.minus}) {
    // Every iterate lies on the manifold with energy at most the first trace value.
    const double level = b->trace.front().energy;
    const double s = sobolev_norm(*b->u, d.p_at());
    const auto unit = b->u->scaled(1.0 / s);
    const double g = luxemburg_norm(unit, d.p_at(), true);
    CHECK(s < coercivity_radius(g, d, c, level));
    CHECK(nehari_reduced_energy(*b->u, d) == doctest::Approx(b->energy).epsilon(1e-6));
  }
}

TEST_CASE("solve_both is reproducible") {
  const auto d = ref::problem(32, reference_lambda());
  const auto a = solve_both(d, SolveConfig{});
  const auto b = solve_both(d, SolveConfig{});
  REQUIRE(a.success());
  CHECK(a.plus.energy == b.plus.energy);
  CHECK(a.minus.energy == b.minus.energy);
  CHECK(a.plus.iterations == b.plus.iterations);
  CHECK(a.sup_distance == b.sup_distance);
  for (std::size_t i = 0; i < a.plus.u->size(); ++i) {
    CHECK((*a.plus.u)[i] == (*b.plus.u)[i]);
    CHECK((*a.minus.u)[i] == (*b.minus.u)[i]);
  }
}

TEST_CASE("energies are Cauchy-like under mesh refinement") {
  const double lambda = reference_lambda();
  double e[3];
  int k = 0;
  for (int n : {32, 64, 128}) {
    const auto r = solve_both(ref::problem(n, lambda), SolveConfig{});
    REQUIRE(r.success());
    e[k++] = r.minus.energy;
  }
  CHECK(std::abs(e[1] - e[2]) < std::abs(e[0] - e[1]));
}

TEST_CASE("lambda zero: no N+ branch and the N- ground state") {
  const int n = 64;
  const auto r = solve_both(unit_weights(n, 0.0), SolveConfig{});
  CHECK(r.plus.status == "NoProjection");
  CHECK_FALSE(r.plus.u.has_value());
  REQUIRE(r.minus.converged());
  CHECK_FALSE(r.success());
  const double ground = oracle::ground_state_energy_lambda0(n);
  CHECK(std::abs(r.minus.energy - ground) < 1e-3);
  MESSAGE("solver " << r.minus.energy << " oracle " << ground);
}

TEST_CASE("verification failures") {
  const auto d = ref::problem(32, reference_lambda());
  const auto zero = verify_solution(GridFunction::zero(d.mesh_ptr()), d, 1e-8, 1e-7);
  CHECK_FALSE(zero.positive);
  CHECK_FALSE(zero.passed());
  std::mt19937_64 rng(21);
  auto v = random_direction(d.mesh_ptr(), rng, true);
  std::vector<double> vals(v.values().begin(), v.values().end());
  for (std::size_t i : d.mesh().interior_vertices()) vals[i] += 0.1;
  const GridFunction w(d.mesh_ptr(), vals);
  const auto rec = verify_solution(w, d, default_floor(w), 1e-7);
  CHECK(rec.positive);
  CHECK_FALSE(rec.on_manifold);
  CHECK(rec.classification == FiberClass::off_manifold);
  CHECK_FALSE(rec.passed());
}

TEST_CASE("iteration budget exhaustion carries the best iterate") {
  const auto d = ref::problem(32, reference_lambda());
  SolveConfig c;
  c.max_iters = 3;
  try {
    minimize_on_Nminus(d, c);
    FAIL("expected MaxIters");
  } catch (const MaxIters& e) {
    CHECK(e.code() == std::string("MaxIters"));
    CHECK(e.best().iterations == 3);
    CHECK(classify(e.best().u, d).kind == FiberClass::n_minus);
    CHECK_FALSE(e.best().trace.empty());
  }
  const auto r = solve_both(d, c);
  CHECK(r.plus.status == "MaxIters");
  CHECK(r.minus.status == "MaxIters");
  CHECK_FALSE(r.success());
}

TEST_CASE("solve_both rejects hypothesis violations") {
  const ProblemData bad(build_mesh(1, Box{}, 16), FieldSpec::constant(4.0), FieldSpec::constant(3.0),
                        FieldSpec::constant(0.5), FieldSpec::constant(1.0), FieldSpec::constant(1.0), 0.01);
  CHECK_THROWS_AS(solve_both(bad, SolveConfig{}), HypothesisViolation);
}

TEST_CASE("oracle on a single interior node matches the fiber roots") {
  const double lambda = 0.01;
  const auto d = unit_weights(2, lambda);
  OracleOptions o;
  o.starts = 8;
  const auto r = oracle_global_scan(d, 3, o);
  REQUIRE(r.found_plus);
  REQUIRE(r.found_minus);
  oracle::Problem1D pb;
  pb.lambda = lambda;
  const auto c = oracle::fiber_coefficients_1d({0.0, 1.0, 0.0}, pb);
  const auto roots = oracle::fiber_roots(c, pb);
  REQUIRE(roots.size() == 2);
  CHECK(r.energy_plus == doctest::Approx(oracle::fiber_value(c, pb, roots[0])).epsilon(1e-9));
  CHECK(r.energy_minus == doctest::Approx(oracle::fiber_value(c, pb, roots[1])).epsilon(1e-9));
  CHECK(r.energy_plus < 0.0);
  CHECK(r.energy_minus > 0.0);
  CHECK_THROWS_AS(oracle_global_scan(unit_weights(8, lambda), 3, o), InvalidArgument);
}
