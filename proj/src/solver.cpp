#include "pxlap/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include <spdlog/spdlog.h>

namespace pxlap {

void SolveConfig::validate() const {
  if (max_iters < 1) throw InvalidArgument("solver.max_iters must be at least 1");
  if (!(step0 > 0.0)) throw InvalidArgument("solver.step0 must be positive");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw InvalidArgument("solver.armijo_c must lie in (0,1)");
  if (!(shrink > 0.0 && shrink < 1.0)) throw InvalidArgument("solver.shrink must lie in (0,1)");
  if (!(grad_floor > 0.0)) throw InvalidArgument("solver.grad_floor must be positive");
  if (!(energy_tol > 0.0)) throw InvalidArgument("solver.energy_tol must be positive");
  if (!(residual_tol > 0.0)) throw InvalidArgument("solver.residual_tol must be positive");
}

namespace {

constexpr double kProjectionMoveTol = 1e-8;
// Clamped values sit a hair above the floor so rescaling cannot push them under it.
constexpr double kFloorMargin = 1.0 + 1e-9;
constexpr double kMinStep = 1e-300;

struct Candidate {
  GridFunction u;
  double energy;
  double t;
};

// u - s d with interior values clamped at the relative floor, then projected.
std::optional<Candidate> trial_point(const GridFunction& u, const std::vector<double>& d, double s,
                                     const ProblemData& data, Branch branch, double floor_factor) {
  const Mesh& mesh = data.mesh();
  std::vector<double> raw(u.values().begin(), u.values().end());
  for (std::size_t i : mesh.interior_vertices()) raw[i] = std::max(raw[i] - s * d[i], 0.0);
  GridFunction v(data.mesh_ptr(), std::move(raw));
  const double floor = floor_factor * v.mean_positive();
  if (!(floor > 0.0)) return std::nullopt;
  std::vector<double> clamped(v.values().begin(), v.values().end());
  for (std::size_t i : mesh.interior_vertices()) clamped[i] = std::max(clamped[i], kFloorMargin * floor);
  GridFunction w(data.mesh_ptr(), std::move(clamped));
  try {
    const FiberMap fiber(w, data);
    const double t = projection_scale(fiber, w.sup_norm(), branch);
    return Candidate{w.scaled(t), fiber.value(t), t};
  } catch (const NoProjection&) {
    return std::nullopt;
  }
}

GridFunction floored_start(const ProblemData& data, double floor_factor) {
  const auto s = eigen_surrogate(data.mesh_ptr());
  const double floor = floor_factor * s.mean_positive();
  std::vector<double> v(s.values().begin(), s.values().end());
  for (std::size_t i : data.mesh().interior_vertices()) v[i] = std::max(v[i], kFloorMargin * floor);
  return GridFunction(data.mesh_ptr(), std::move(v));
}

}  // namespace

MinimizeResult minimize_on_branch(const ProblemData& data, Branch branch, const SolveConfig& config) {
  config.validate();
  const Mesh& mesh = data.mesh();
  if (mesh.interior_vertices().empty()) throw InvalidArgument("mesh has no interior vertex");
  const auto& mass = mesh.lumped_mass();

  MinimizeResult state{project(floored_start(data, config.grad_floor), data, branch), {}, 0};
  double e = energy(state.u, data).total;
  state.trace.push_back({0, e, FiberMap(state.u, data).curvature(1.0), 0.0});

  double step = config.step0;
  double last_change = std::numeric_limits<double>::infinity();
  double last_move = std::numeric_limits<double>::infinity();
  std::vector<double> d(mesh.num_vertices(), 0.0);

  for (int it = 1; it <= config.max_iters; ++it) {
    const double floor = config.grad_floor * state.u.mean_positive();
    const auto wr = weak_residual(state.u, data, floor);
    const bool stationary = wr.max_abs <= config.residual_tol * wr.scale;
    if (stationary && last_change <= config.energy_tol * std::max(1.0, std::abs(e)) &&
        last_move < kProjectionMoveTol) {
      state.iterations = it - 1;
      return state;
    }

    double slope = 0.0;
    for (std::size_t i : mesh.interior_vertices()) {
      d[i] = wr.residual[i] / mass[i];
      slope += wr.residual[i] * d[i];
    }

    double s = 2.0 * step;
    std::optional<Candidate> accepted;
    while (s > kMinStep) {
      auto c = trial_point(state.u, d, s, data, branch, config.grad_floor);
      if (c && c->energy <= e - config.armijo_c * s * slope) {
        accepted = std::move(c);
        break;
      }
      s *= config.shrink;
    }
    if (!accepted) {
      // No representable decrease left along the residual direction.
      if (stationary) {
        state.iterations = it - 1;
        return state;
      }
      state.iterations = it - 1;
      throw MaxIters("line search stalled on the " + to_string(branch) + " branch at iteration " +
                         std::to_string(it) + " with relative residual " + std::to_string(wr.relative()),
                     std::move(state));
    }

    step = s;
    last_change = e - accepted->energy;
    last_move = std::abs(accepted->t - 1.0);
    e = accepted->energy;
    state.u = std::move(accepted->u);
    state.trace.push_back({it, e, FiberMap(state.u, data).curvature(1.0), s});
  }
  state.iterations = config.max_iters;
  throw MaxIters("iteration budget of " + std::to_string(config.max_iters) + " exhausted on the " +
                     to_string(branch) + " branch",
                 std::move(state));
}

MinimizeResult minimize_on_Nplus(const ProblemData& data, const SolveConfig& config) {
  return minimize_on_branch(data, Branch::plus, config);
}

MinimizeResult minimize_on_Nminus(const ProblemData& data, const SolveConfig& config) {
  return minimize_on_branch(data, Branch::minus, config);
}

VerificationRecord verify_solution(const GridFunction& u, const ProblemData& data, double floor,
                                   double residual_tol) {
  VerificationRecord r;
  r.floor = floor;
  r.residual_tol = residual_tol;
  const auto& interior = data.mesh().interior_vertices();
  r.min_interior = std::numeric_limits<double>::infinity();
  for (std::size_t i : interior) r.min_interior = std::min(r.min_interior, u[i]);
  r.positive = !interior.empty() && floor > 0.0 && r.min_interior >= floor;

  if (r.positive) {
    const auto wr = weak_residual(u, data, floor);
    r.weak_residual = wr.max_abs;
    r.residual_scale = wr.scale;
    r.residual_ok = wr.max_abs <= residual_tol * wr.scale;
  } else {
    r.weak_residual = std::numeric_limits<double>::quiet_NaN();
  }

  if (u.is_nonnegative() && !u.is_zero()) {
    const auto c = classify(u, data);
    r.membership_slope = c.slope;
    r.membership_scale = c.slope_scale;
    r.on_manifold = c.kind != FiberClass::off_manifold;
    r.classification = c.kind;
  }
  return r;
}

namespace {

BranchResult run_branch(const ProblemData& data, Branch branch, const SolveConfig& config) {
  BranchResult out;
  std::optional<MinimizeResult> result;
  try {
    result = minimize_on_branch(data, branch, config);
    out.status = "converged";
  } catch (const MaxIters& e) {
    out.status = e.code();
    out.message = e.what();
    result = e.best();
  } catch (const Error& e) {
    out.status = e.code();
    out.message = e.what();
    spdlog::warn("{} branch failed: {}", to_string(branch), e.what());
    return out;
  }
  out.u = result->u;
  out.iterations = result->iterations;
  out.trace = std::move(result->trace);
  out.energy = energy(*out.u, data).total;
  out.verification = verify_solution(*out.u, data, default_floor(*out.u, config.grad_floor), config.residual_tol);
  out.weak_residual = out.verification->weak_residual;
  out.residual_scale = out.verification->residual_scale;
  return out;
}

}  // namespace

SolveReport solve_both(const ProblemData& data, const SolveConfig& config, std::optional<LambdaReport> threshold) {
  require_hypotheses(data);
  SolveReport r;
  r.lambda_used = data.lambda();
  r.threshold = std::move(threshold);
  r.plus = run_branch(data, Branch::plus, config);
  r.minus = run_branch(data, Branch::minus, config);
  if (r.plus.u && r.minus.u) {
    const auto diff = *r.plus.u - *r.minus.u;
    r.sup_distance = diff.sup_norm();
    r.sobolev_distance = sobolev_norm(diff, data.p_at());
    r.distinctness_scale = std::max(r.plus.u->sup_norm(), r.minus.u->sup_norm());
    r.distinct = r.sup_distance > kDistinctnessFactor * r.distinctness_scale;
  }
  return r;
}

namespace {

class OracleObjective {
 public:
  OracleObjective(const ProblemData& data, Branch branch) : data_(data), branch_(branch) {}

  double operator()(const std::vector<double>& interior) const {
    std::vector<double> v(data_.mesh().num_vertices(), 0.0);
    const auto& idx = data_.mesh().interior_vertices();
    for (std::size_t k = 0; k < idx.size(); ++k) v[idx[k]] = interior[k];
    const GridFunction w(data_.mesh_ptr(), std::move(v));
    if (w.is_zero()) return std::numeric_limits<double>::infinity();
    try {
      const FiberMap fiber(w, data_);
      return fiber.value(projection_scale(fiber, w.sup_norm(), branch_));
    } catch (const NoProjection&) {
      return std::numeric_limits<double>::infinity();
    }
  }

 private:
  const ProblemData& data_;
  Branch branch_;
};

struct SearchState {
  std::vector<double> w;
  double value = std::numeric_limits<double>::infinity();
  double h = 0.25;
};

// Compass search along the coordinate axes; the objective is invariant under
// positive scaling, so iterates are renormalized to unit sup after each sweep.
void pattern_search(const OracleObjective& f, SearchState& s, int sweeps, double final_step) {
  for (int sweep = 0; sweep < sweeps && s.h >= final_step; ++sweep) {
    bool improved = false;
    for (std::size_t i = 0; i < s.w.size(); ++i) {
      for (double sign : {1.0, -1.0}) {
        const double old = s.w[i];
        s.w[i] = std::max(old + sign * s.h, 0.0);
        if (s.w[i] == old) continue;
        const double v = f(s.w);
        if (v < s.value) {
          s.value = v;
          improved = true;
          break;
        }
        s.w[i] = old;
      }
    }
    if (!improved) s.h *= 0.5;
    const double sup = *std::max_element(s.w.begin(), s.w.end());
    if (sup > 0.0)
      for (double& x : s.w) x /= sup;
  }
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) fn(i);
    });
  for (auto& th : pool) th.join();
}

std::optional<double> oracle_branch(const ProblemData& data, Branch branch, const OracleOptions& options) {
  const OracleObjective f(data, branch);
  const std::size_t dim = data.mesh().interior_vertices().size();
  const std::size_t n = static_cast<std::size_t>(options.starts);

  std::vector<SearchState> states(n);
  parallel_for(n, options.threads, [&](std::size_t k) {
    std::mt19937_64 rng(options.seed + 0x9E3779B97F4A7C15ULL * (k + 1) + (branch == Branch::plus ? 0 : 1));
    std::uniform_real_distribution<double> uni(0.05, 1.0);
    SearchState& s = states[k];
    s.w.resize(dim);
    for (double& x : s.w) x = uni(rng);
    s.value = f(s.w);
    pattern_search(f, s, options.burst_sweeps, options.final_step);
  });

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return states[l].value < states[r].value; });
  const std::size_t polish = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(options.polish_count, 1)));
  parallel_for(polish, options.threads, [&](std::size_t k) {
    pattern_search(f, states[order[k]], options.polish_sweeps, options.final_step);
  });

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < polish; ++k) best = std::min(best, states[order[k]].value);
  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

}  // namespace

OracleResult oracle_global_scan(const ProblemData& data, std::size_t resolution_cap, const OracleOptions& options) {
  if (data.mesh().num_vertices() > resolution_cap)
    throw InvalidArgument("oracle mesh has " + std::to_string(data.mesh().num_vertices()) +
                          " vertices, above the cap of " + std::to_string(resolution_cap));
  if (options.starts < 1) throw InvalidArgument("oracle needs at least one start");
  OracleResult r;
  r.starts = options.starts;
  if (auto e = oracle_branch(data, Branch::plus, options)) {
    r.found_plus = true;
    r.energy_plus = *e;
  }
  if (auto e = oracle_branch(data, Branch::minus, options)) {
    r.found_minus = true;
    r.energy_minus = *e;
  }
  return r;
}

}  // namespace pxlap
