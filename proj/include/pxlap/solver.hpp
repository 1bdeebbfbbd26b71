#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pxlap/domain.hpp"
#include "pxlap/energy.hpp"
#include "pxlap/error.hpp"
#include "pxlap/nehari.hpp"
#include "pxlap/vexp.hpp"

namespace pxlap {

struct SolveConfig {
  int max_iters = 200000;
  double step0 = 1e-3;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  double grad_floor = 1e-8;  // relative: floor = grad_floor * mean positive nodal value
  double energy_tol = 1e-12;
  double residual_tol = 1e-7;
  std::uint64_t seed = 1;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

struct TraceRow {
  int iter = 0;
  double energy = 0.0;
  double curvature = 0.0;  // Phi''(1) at the projected iterate
  double step = 0.0;
};

struct MinimizeResult {
  GridFunction u;
  std::vector<TraceRow> trace;
  int iterations = 0;
};

/// Raised when the iteration budget runs out; carries the lowest-energy iterate.
class MaxIters : public Error {
 public:
  MaxIters(const std::string& what, MinimizeResult best) : Error("MaxIters", what), best_(std::move(best)) {}
  const MinimizeResult& best() const noexcept { return best_; }

 private:
  MinimizeResult best_;
};

/// Projected gradient descent for E on one branch of the Nehari manifold: mass-scaled
/// weak-form residual as descent direction, Armijo backtracking on the projected
/// energy, clamping at the positivity floor and re-projection onto the branch.
MinimizeResult minimize_on_branch(const ProblemData& data, Branch branch, const SolveConfig& config);
MinimizeResult minimize_on_Nplus(const ProblemData& data, const SolveConfig& config);
MinimizeResult minimize_on_Nminus(const ProblemData& data, const SolveConfig& config);

struct VerificationRecord {
  double floor = 0.0;
  double min_interior = 0.0;
  bool positive = false;

  double weak_residual = 0.0;
  double residual_scale = 0.0;
  double residual_tol = 0.0;
  bool residual_ok = false;

  double membership_slope = 0.0;
  double membership_scale = 0.0;
  bool on_manifold = false;

  FiberClass classification = FiberClass::off_manifold;

  bool passed() const { return positive && residual_ok && on_manifold; }
};

VerificationRecord verify_solution(const GridFunction& u, const ProblemData& data, double floor, double residual_tol);

struct BranchResult {
  std::string status = "not run";  // "converged" or the error code
  std::string message;
  std::optional<GridFunction> u;
  double energy = 0.0;
  double weak_residual = 0.0;
  double residual_scale = 0.0;
  int iterations = 0;
  std::optional<VerificationRecord> verification;
  std::vector<TraceRow> trace;

  bool converged() const { return status == "converged"; }
};

/// Two solutions count as distinct when sup|u+ - u-| > kDistinctnessFactor * max(sup|u+|, sup|u-|).
inline constexpr double kDistinctnessFactor = 1e-3;

struct SolveReport {
  BranchResult plus;
  BranchResult minus;
  double sup_distance = 0.0;
  double sobolev_distance = 0.0;
  double distinctness_scale = 0.0;
  bool distinct = false;
  double lambda_used = 0.0;
  std::optional<LambdaReport> threshold;

  bool success() const { return plus.converged() && minus.converged() && distinct; }
};

/// Runs both minimizations and the a posteriori checks. Branch failures are recorded
/// in the report rather than thrown.
SolveReport solve_both(const ProblemData& data, const SolveConfig& config,
                       std::optional<LambdaReport> threshold = std::nullopt);

struct OracleOptions {
  int starts = 200;
  int burst_sweeps = 40;
  int polish_count = 4;
  int polish_sweeps = 4000;
  double final_step = 1e-9;
  std::uint64_t seed = 11;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct OracleResult {
  double energy_plus = 0.0;
  double energy_minus = 0.0;
  bool found_plus = false;
  bool found_minus = false;
  int starts = 0;
};

/// Brute-force cross-check: multi-start pattern coordinate descent on the nodal values
/// (positive cone) of the branch-projected energy. Independent of the gradient code.
/// Requires at most `resolution_cap` mesh vertices.
OracleResult oracle_global_scan(const ProblemData& data, std::size_t resolution_cap, const OracleOptions& options = {});

}  // namespace pxlap
