#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pxlap/domain.hpp"
#include "pxlap/energy.hpp"
#include "pxlap/vexp.hpp"

namespace pxlap {

/// Position of u relative to the Nehari manifold, with the witness values
/// Phi_u'(1) and Phi_u''(1) that decided it.
struct ManifoldClass {
  FiberClass kind = FiberClass::off_manifold;
  double slope = 0.0;
  double curvature = 0.0;
  double slope_scale = 0.0;
  double curvature_scale = 0.0;
};

inline constexpr double kMembershipTolerance = 1e-8;

/// OFF_MANIFOLD when |Phi'(1)| > tol * slope_scale(1), otherwise by the sign of
/// Phi''(1) with the curvature dead-band. Requires u >= 0, u != 0.
ManifoldClass classify(const GridFunction& u, const ProblemData& data, double tol = kMembershipTolerance);

enum class Branch { plus, minus };

std::string to_string(Branch b);

struct ProjectionOptions {
  double t_min = 1e-6;
  double t_max = 1e6;
  int samples = 512;
};

/// Fiber scaling t with t*u on the requested branch. The search range applies to
/// u / sup|u|, so it is independent of the magnitude of u. The plus branch takes
/// the smallest root and the minus branch the largest; the chosen root must carry
/// the matching curvature sign, otherwise NoProjection is thrown.
double projection_scale(const GridFunction& u, const ProblemData& data, Branch branch,
                        const ProjectionOptions& options = {});
double projection_scale(const FiberMap& fiber, double sup_norm, Branch branch, const ProjectionOptions& options = {});

GridFunction project(const GridFunction& u, const ProblemData& data, Branch branch,
                     const ProjectionOptions& options = {});

/// Scan directions: the eigenfunction surrogate followed by `count - 1` seeded
/// random nonnegative directions, all normalized to unit Sobolev norm.
std::vector<GridFunction> scan_directions(const ProblemData& data, int count, std::uint64_t seed);

struct DirectionVerdict {
  bool pass = false;
  int roots = 0;
  bool degenerate_hit = false;  // a root fell inside the curvature dead-band
  double separation = 0.0;      // t2 / t1 when two roots exist, 0 otherwise
};

/// Two roots, smaller N+ and larger N-, no degenerate curvature.
DirectionVerdict judge_direction(const FiberMap& fiber, const ProjectionOptions& options = {});

struct ScanRow {
  double lambda = 0.0;
  bool pass = false;
  int worst_direction = -1;  // smallest separation, or the first failing direction
};

struct ScanOptions {
  int directions = 32;
  std::uint64_t seed = 7;
  ProjectionOptions fiber;
  double refine_relative_width = 1e-4;
};

struct ScanResult {
  double threshold = 0.0;
  std::vector<ScanRow> rows;  // grid rows followed by refinement rows
};

/// Largest lambda for which every scan direction passes. Grid values are visited in
/// increasing order and the gap between the last pass and the first failure is
/// refined by geometric bisection. Throws AllFail if the smallest value fails.
ScanResult lambda_scan(const ProblemData& data, std::vector<double> lambda_grid, const ScanOptions& options = {});

/// Default geometric grid for lambda_scan: 10^-6 .. 10^6, two points per decade.
std::vector<double> default_lambda_grid();

struct LambdaFormulas {
  double threshold_value = 0.0;
  bool base_negative = false;  // evaluated with |base|
  double positive_energy_bound = 0.0;
  int bound_numerator_sign = 0;      // sign of (p^- - q^+)
  int bound_denominator_sign = 0;    // sign of (1 - delta^+ - q^+)
};

/// The explicit constant-based expressions for the admissible lambda range:
///   (c_q_plus / c_d_minus) |(p^- + delta^+ - 1)/(1 - delta^+ - q^+)|^{(p^- + delta^+ - 1)/(q^+ - p^-)}
///     * (q^+ + delta^+ - 1)/(q^+ - p^-)
/// and (1 - delta^+)(p^- - q^+) / (c_d_minus p^+ (1 - delta^+ - q^+)).
/// Throws DegenerateExponents if q^+ = p^- or p^- + delta^+ = 1.
LambdaFormulas lambda_formula(const ProblemData& data, const EmbeddingConstants& consts);

struct LambdaReport {
  double lambda_scan_threshold = 0.0;
  double lambda_formula_value = 0.0;
  double lambda_positive_energy_bound = 0.0;
  bool formula_base_negative = false;
  int bound_numerator_sign = 0;
  int bound_denominator_sign = 0;
  double lambda0 = 0.0;  // 0.9 * min of the three values above
  EmbeddingConstants constants_used;
  std::vector<ScanRow> scan_rows;
};

inline constexpr double kLambda0Safety = 0.9;

LambdaReport threshold_report(const ProblemData& data, const EmbeddingConstants& consts,
                              std::vector<double> lambda_grid, const ScanOptions& options = {});

}  // namespace pxlap
