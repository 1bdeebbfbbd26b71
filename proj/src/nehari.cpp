#include "pxlap/nehari.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include <spdlog/spdlog.h>

#include "pxlap/error.hpp"

namespace pxlap {

ManifoldClass classify(const GridFunction& u, const ProblemData& data, double tol) {
  if (!u.is_nonnegative() || u.is_zero()) throw InvalidArgument("classify requires u >= 0 and u != 0");
  const FiberMap fiber(u, data);
  ManifoldClass out;
  out.slope = fiber.slope(1.0);
  out.curvature = fiber.curvature(1.0);
  out.slope_scale = fiber.slope_scale(1.0);
  out.curvature_scale = fiber.curvature_scale(1.0);
  if (std::abs(out.slope) > tol * out.slope_scale) {
    out.kind = FiberClass::off_manifold;
  } else {
    const double band = kCurvatureDeadBand * out.curvature_scale;
    out.kind = out.curvature > band    ? FiberClass::n_plus
               : out.curvature < -band ? FiberClass::n_minus
                                       : FiberClass::n_zero;
  }
  return out;
}

std::string to_string(Branch b) { return b == Branch::plus ? "plus" : "minus"; }

double projection_scale(const FiberMap& fiber, double sup_norm, Branch branch, const ProjectionOptions& options) {
  if (!(sup_norm > 0.0)) throw InvalidArgument("projection needs a nonzero function");
  const auto roots = find_critical_points(fiber, options.t_min / sup_norm, options.t_max / sup_norm, options.samples);
  if (roots.empty()) throw NoProjection("fiber map has no critical point in the search range");
  if (roots.size() > 2) spdlog::debug("fiber map has {} critical points; using the outermost", roots.size());
  const CriticalPoint& r = branch == Branch::plus ? roots.front() : roots.back();
  const FiberClass want = branch == Branch::plus ? FiberClass::n_plus : FiberClass::n_minus;
  if (r.kind != want)
    throw NoProjection("the " + to_string(branch) + " branch root at t = " + std::to_string(r.t) + " classifies " +
                       to_string(r.kind));
  return r.t;
}

double projection_scale(const GridFunction& u, const ProblemData& data, Branch branch,
                        const ProjectionOptions& options) {
  if (!u.is_nonnegative() || u.is_zero()) throw InvalidArgument("projection requires u >= 0 and u != 0");
  return projection_scale(FiberMap(u, data), u.sup_norm(), branch, options);
}

GridFunction project(const GridFunction& u, const ProblemData& data, Branch branch, const ProjectionOptions& options) {
  return u.scaled(projection_scale(u, data, branch, options));
}

std::vector<GridFunction> scan_directions(const ProblemData& data, int count, std::uint64_t seed) {
  if (count < 1) throw InvalidArgument("scan needs at least one direction");
  std::vector<GridFunction> out;
  out.reserve(static_cast<std::size_t>(count));
  auto push_normalized = [&](const GridFunction& u) {
    out.push_back(u.scaled(1.0 / sobolev_norm(u, data.p_at())));
  };
  push_normalized(eigen_surrogate(data.mesh_ptr()));
  std::mt19937_64 rng(seed);
  while (static_cast<int>(out.size()) < count) {
    const auto u = random_direction(data.mesh_ptr(), rng, true);
    if (!u.is_zero()) push_normalized(u);
  }
  return out;
}

DirectionVerdict judge_direction(const FiberMap& fiber, const ProjectionOptions& options) {
  const auto roots = find_critical_points(fiber, options.t_min, options.t_max, options.samples);
  DirectionVerdict v;
  v.roots = static_cast<int>(roots.size());
  v.degenerate_hit = std::any_of(roots.begin(), roots.end(),
                                 [](const CriticalPoint& r) { return r.kind == FiberClass::n_zero; });
  if (roots.size() == 2) v.separation = roots[1].t / roots[0].t;
  v.pass = roots.size() == 2 && roots[0].kind == FiberClass::n_plus && roots[1].kind == FiberClass::n_minus;
  return v;
}

namespace {

ScanRow evaluate_lambda(const std::vector<FiberMap>& fibers, double lambda, const ProjectionOptions& options) {
  ScanRow row{lambda, true, -1};
  double worst_separation = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < fibers.size(); ++i) {
    const auto v = judge_direction(fibers[i].with_lambda(lambda), options);
    if (!v.pass) {
      row.pass = false;
      row.worst_direction = static_cast<int>(i);
      return row;
    }
    if (v.separation < worst_separation) {
      worst_separation = v.separation;
      row.worst_direction = static_cast<int>(i);
    }
  }
  return row;
}

}  // namespace

ScanResult lambda_scan(const ProblemData& data, std::vector<double> lambda_grid, const ScanOptions& options) {
  if (lambda_grid.empty()) throw InvalidArgument("lambda grid is empty");
  for (double l : lambda_grid)
    if (!(l > 0.0) || !std::isfinite(l)) throw InvalidArgument("lambda grid values must be positive and finite");
  std::sort(lambda_grid.begin(), lambda_grid.end());
  lambda_grid.erase(std::unique(lambda_grid.begin(), lambda_grid.end()), lambda_grid.end());

  std::vector<FiberMap> fibers;
  for (const auto& d : scan_directions(data, options.directions, options.seed)) fibers.emplace_back(d, data);

  ScanResult out;
  std::optional<double> last_pass, first_fail;
  for (double l : lambda_grid) {
    out.rows.push_back(evaluate_lambda(fibers, l, options.fiber));
    if (out.rows.back().pass) {
      last_pass = l;
    } else {
      first_fail = l;
      break;
    }
  }
  if (!last_pass)
    throw AllFail("every scan direction must pass at the smallest lambda " + std::to_string(lambda_grid.front()));

  double lo = *last_pass;
  if (first_fail) {
    double hi = *first_fail;
    while (hi / lo - 1.0 > options.refine_relative_width) {
      const double mid = std::sqrt(lo * hi);
      out.rows.push_back(evaluate_lambda(fibers, mid, options.fiber));
      (out.rows.back().pass ? lo : hi) = mid;
    }
  }
  out.threshold = lo;
  return out;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int k = -12; k <= 12; ++k) grid.push_back(std::pow(10.0, k / 2.0));
  return grid;
}

namespace {

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

LambdaFormulas lambda_formula(const ProblemData& data, const EmbeddingConstants& consts) {
  const auto& ex = data.extrema();
  const double gap = ex.q_plus - ex.p_minus;
  const double lower = ex.p_minus + ex.delta_plus - 1.0;
  if (gap == 0.0) throw DegenerateExponents("q^+ equals p^-");
  if (lower == 0.0) throw DegenerateExponents("p^- + delta^+ equals 1");
  if (!(consts.c_d_minus > 0.0)) throw InvalidArgument("lambda formula needs a positive singular embedding constant");

  LambdaFormulas out;
  const double base = lower / (1.0 - ex.delta_plus - ex.q_plus);
  out.base_negative = base < 0.0;
  out.threshold_value = consts.c_q_plus / consts.c_d_minus * std::pow(std::abs(base), lower / gap) *
                    ((ex.q_plus + ex.delta_plus - 1.0) / gap);

  const double numerator = ex.p_minus - ex.q_plus;
  const double denominator = 1.0 - ex.delta_plus - ex.q_plus;
  out.bound_numerator_sign = sign_of(numerator);
  out.bound_denominator_sign = sign_of(denominator);
  out.positive_energy_bound = (1.0 - ex.delta_plus) * numerator / (consts.c_d_minus * ex.p_plus * denominator);
  return out;
}

LambdaReport threshold_report(const ProblemData& data, const EmbeddingConstants& consts,
                              std::vector<double> lambda_grid, const ScanOptions& options) {
  const auto formulas = lambda_formula(data, consts);
  auto scan = lambda_scan(data, std::move(lambda_grid), options);
  LambdaReport r;
  r.lambda_scan_threshold = scan.threshold;
  r.lambda_formula_value = formulas.threshold_value;
  r.lambda_positive_energy_bound = formulas.positive_energy_bound;
  r.formula_base_negative = formulas.base_negative;
  r.bound_numerator_sign = formulas.bound_numerator_sign;
  r.bound_denominator_sign = formulas.bound_denominator_sign;
  r.constants_used = consts;
  r.scan_rows = std::move(scan.rows);
  r.lambda0 = kLambda0Safety *
              std::min({r.lambda_scan_threshold, r.lambda_formula_value, r.lambda_positive_energy_bound});
  return r;
}

}  // namespace pxlap
