#include "pxlap/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pxlap/error.hpp"

namespace pxlap {

namespace {

void require_admissible(const GridFunction& u, const char* where) {
  if (!u.is_nonnegative()) throw InvalidArgument(std::string(where) + " requires a nonnegative function");
  if (u.is_zero()) throw InvalidArgument(std::string(where) + " requires a nonzero function");
}

}  // namespace

EnergyBreakdown energy(const GridFunction& u, const ProblemData& data) {
  const auto& m = data.mesh().element_measures();
  const auto uc = u.centroid_values();
  const auto grad = u.gradient_magnitudes();
  EnergyBreakdown out;
  for (std::size_t e = 0; e < uc.size(); ++e) {
    const double p = data.p_at()[e];
    const double q = data.q_at()[e];
    const double s = 1.0 - data.delta_at()[e];
    if (grad[e] != 0.0) out.gradient_term += m[e] * std::pow(grad[e], p) / p;
    if (uc[e] != 0.0) out.q_term += m[e] * data.a_at()[e] * std::pow(std::abs(uc[e]), q) / q;
    if (uc[e] > 0.0) out.singular_term += m[e] * data.b_at()[e] * std::pow(uc[e], s) / s;
  }
  out.total = out.gradient_term - out.q_term - data.lambda() * out.singular_term;
  return out;
}

double nehari_residual(const GridFunction& u, const ProblemData& data) {
  require_admissible(u, "nehari_residual");
  const auto& m = data.mesh().element_measures();
  const auto uc = u.centroid_values();
  const auto grad = u.gradient_magnitudes();
  double gradient = 0.0, q_term = 0.0, singular = 0.0;
  for (std::size_t e = 0; e < uc.size(); ++e) {
    if (grad[e] != 0.0) gradient += m[e] * std::pow(grad[e], data.p_at()[e]);
    if (uc[e] != 0.0) q_term += m[e] * data.a_at()[e] * std::pow(std::abs(uc[e]), data.q_at()[e]);
    if (uc[e] > 0.0) singular += m[e] * data.b_at()[e] * std::pow(uc[e], 1.0 - data.delta_at()[e]);
  }
  return gradient - q_term - data.lambda() * singular;
}

double default_floor(const GridFunction& u, double factor) { return factor * u.mean_positive(); }

namespace {

struct Assembly {
  std::vector<double> residual;
  std::vector<double> magnitude;  // per-vertex sum of absolute contributions
};

Assembly assemble_weak_form(const GridFunction& u, const ProblemData& data, double floor) {
  if (!(floor > 0.0)) throw InvalidArgument("weak gradient floor must be positive");
  const Mesh& mesh = data.mesh();
  for (std::size_t i : mesh.interior_vertices())
    if (u[i] < floor)
      throw BelowFloor("interior vertex " + std::to_string(i) + " has value " + std::to_string(u[i]) +
                       " below the floor " + std::to_string(floor));

  const std::size_t k = mesh.nodes_per_element();
  const double share = 1.0 / static_cast<double>(k);  // hat function value at the centroid
  const double lambda = data.lambda();
  const auto uc = u.centroid_values();

  Assembly out{std::vector<double>(mesh.num_vertices(), 0.0), std::vector<double>(mesh.num_vertices(), 0.0)};
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.elements()[e];
    const double m = mesh.element_measures()[e];
    const Point g = u.element_gradient(e);
    const double g_norm = std::hypot(g.x, g.y);
    const double p = data.p_at()[e];
    const double flux_factor = g_norm > 0.0 ? std::pow(g_norm, p - 2.0) : 0.0;

    const double ue = uc[e];
    const double q_load =
        ue != 0.0 ? data.a_at()[e] * std::pow(std::abs(ue), data.q_at()[e] - 2.0) * ue * share : 0.0;
    // Elements whose vertices all lie on the boundary have ue == 0 and touch no
    // interior hat function, so the singular load is never needed there.
    const double s_load = ue > 0.0 ? data.b_at()[e] * std::pow(ue, -data.delta_at()[e]) * share : 0.0;

    const auto& grads = mesh.basis_gradients(e);
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t i = el[j];
      if (mesh.is_boundary(i)) continue;
      const double stiff = m * flux_factor * (g.x * grads[j].x + g.y * grads[j].y);
      const double ql = m * q_load;
      const double sl = m * lambda * s_load;
      out.residual[i] += stiff - ql - sl;
      out.magnitude[i] += std::abs(stiff) + std::abs(ql) + std::abs(sl);
    }
  }
  return out;
}

}  // namespace

GridFunction weak_gradient(const GridFunction& u, const ProblemData& data, double floor) {
  auto a = assemble_weak_form(u, data, floor);
  return GridFunction(data.mesh_ptr(), std::move(a.residual));
}

WeakResidual weak_residual(const GridFunction& u, const ProblemData& data, double floor) {
  auto a = assemble_weak_form(u, data, floor);
  double max_abs = 0.0, scale = 0.0;
  std::size_t worst = 0;
  for (std::size_t i = 0; i < a.residual.size(); ++i) {
    if (std::abs(a.residual[i]) > max_abs) {
      max_abs = std::abs(a.residual[i]);
      worst = i;
    }
    scale = std::max(scale, a.magnitude[i]);
  }
  return {GridFunction(data.mesh_ptr(), std::move(a.residual)), max_abs, scale, worst};
}

std::string to_string(FiberClass c) {
  switch (c) {
    case FiberClass::n_plus: return "N+";
    case FiberClass::n_minus: return "N-";
    case FiberClass::n_zero: return "N0";
    case FiberClass::off_manifold: return "off";
  }
  return "unknown";
}

namespace {

// Sorts by exponent and merges equal exponents so constant-exponent problems
// collapse to a single power law per term.
std::vector<FiberMap::PowerTerm> compress(std::vector<FiberMap::PowerTerm> terms) {
  std::erase_if(terms, [](const FiberMap::PowerTerm& t) { return t.coefficient == 0.0; });
  std::stable_sort(terms.begin(), terms.end(),
                   [](const auto& l, const auto& r) { return l.exponent < r.exponent; });
  std::vector<FiberMap::PowerTerm> out;
  for (const auto& t : terms) {
    if (!out.empty() && out.back().exponent == t.exponent)
      out.back().coefficient += t.coefficient;
    else
      out.push_back(t);
  }
  return out;
}

double sum_coefficients(const std::vector<FiberMap::PowerTerm>& terms) {
  double s = 0.0;
  for (const auto& t : terms) s += t.coefficient;
  return s;
}

}  // namespace

FiberMap::FiberMap(const GridFunction& u, const ProblemData& data) : lambda_(data.lambda()) {
  const auto& m = data.mesh().element_measures();
  const auto uc = u.centroid_values();
  const auto grad = u.gradient_magnitudes();
  std::vector<PowerTerm> g, q, s;
  g.reserve(uc.size());
  q.reserve(uc.size());
  s.reserve(uc.size());
  for (std::size_t e = 0; e < uc.size(); ++e) {
    const double p = data.p_at()[e];
    const double qe = data.q_at()[e];
    const double se = 1.0 - data.delta_at()[e];
    if (grad[e] != 0.0) g.push_back({m[e] * std::pow(grad[e], p), p});
    if (uc[e] != 0.0) q.push_back({m[e] * data.a_at()[e] * std::pow(std::abs(uc[e]), qe), qe});
    if (uc[e] > 0.0) s.push_back({m[e] * data.b_at()[e] * std::pow(uc[e], se), se});
  }
  gradient_ = compress(std::move(g));
  q_ = compress(std::move(q));
  singular_ = compress(std::move(s));
}

FiberMap FiberMap::with_lambda(double lambda) const {
  FiberMap copy = *this;
  copy.lambda_ = lambda;
  return copy;
}

double FiberMap::value(double t) const {
  double a = 0.0, b = 0.0, c = 0.0;
  for (const auto& term : gradient_) a += term.coefficient * std::pow(t, term.exponent) / term.exponent;
  for (const auto& term : q_) b += term.coefficient * std::pow(t, term.exponent) / term.exponent;
  for (const auto& term : singular_) c += term.coefficient * std::pow(t, term.exponent) / term.exponent;
  return a - b - lambda_ * c;
}

double FiberMap::slope(double t) const {
  double a = 0.0, b = 0.0, c = 0.0;
  for (const auto& term : gradient_) a += term.coefficient * std::pow(t, term.exponent - 1.0);
  for (const auto& term : q_) b += term.coefficient * std::pow(t, term.exponent - 1.0);
  for (const auto& term : singular_) c += term.coefficient * std::pow(t, term.exponent - 1.0);
  return a - b - lambda_ * c;
}

double FiberMap::curvature(double t) const {
  double a = 0.0, b = 0.0, c = 0.0;
  for (const auto& term : gradient_) a += term.coefficient * (term.exponent - 1.0) * std::pow(t, term.exponent - 2.0);
  for (const auto& term : q_) b += term.coefficient * (term.exponent - 1.0) * std::pow(t, term.exponent - 2.0);
  // exponent - 1 = -delta, so this is + lambda * delta * t^{-delta-1} * b u^{1-delta}.
  for (const auto& term : singular_)
    c += term.coefficient * (1.0 - term.exponent) * std::pow(t, term.exponent - 2.0);
  return a - b + lambda_ * c;
}

double FiberMap::slope_scale(double t) const {
  double a = 0.0, b = 0.0, c = 0.0;
  for (const auto& term : gradient_) a += term.coefficient * std::pow(t, term.exponent - 1.0);
  for (const auto& term : q_) b += term.coefficient * std::pow(t, term.exponent - 1.0);
  for (const auto& term : singular_) c += term.coefficient * std::pow(t, term.exponent - 1.0);
  return std::abs(a) + std::abs(b) + std::abs(lambda_ * c);
}

double FiberMap::curvature_scale(double t) const {
  double a = 0.0, b = 0.0, c = 0.0;
  for (const auto& term : gradient_) a += term.coefficient * (term.exponent - 1.0) * std::pow(t, term.exponent - 2.0);
  for (const auto& term : q_) b += term.coefficient * (term.exponent - 1.0) * std::pow(t, term.exponent - 2.0);
  for (const auto& term : singular_)
    c += term.coefficient * (1.0 - term.exponent) * std::pow(t, term.exponent - 2.0);
  return std::abs(a) + std::abs(b) + std::abs(lambda_ * c);
}

double FiberMap::gradient_modular() const { return sum_coefficients(gradient_); }
double FiberMap::q_integral() const { return sum_coefficients(q_); }
double FiberMap::singular_integral() const { return sum_coefficients(singular_); }

namespace {

FiberClass classify_curvature(const FiberMap& fiber, double t) {
  const double c = fiber.curvature(t);
  const double band = kCurvatureDeadBand * fiber.curvature_scale(t);
  if (c > band) return FiberClass::n_plus;
  if (c < -band) return FiberClass::n_minus;
  return FiberClass::n_zero;
}

double refine_root(const FiberMap& fiber, double lo, double hi, double s_lo, double s_hi, const RootOptions& options) {
  int steps = 0;
  while (hi / lo - 1.0 > options.relative_width) {
    if (++steps > options.max_steps) throw NonConvergence("fiber root bisection exceeded the step limit");
    const double mid = std::sqrt(lo * hi);
    const double s_mid = fiber.slope(mid);
    if (s_mid == 0.0) return mid;
    if ((s_mid < 0.0) == (s_lo < 0.0)) {
      lo = mid;
      s_lo = s_mid;
    } else {
      hi = mid;
      s_hi = s_mid;
    }
  }
  // Final secant step inside the converged bracket.
  const double t = lo - s_lo * (hi - lo) / (s_hi - s_lo);
  return std::isfinite(t) ? std::clamp(t, lo, hi) : std::sqrt(lo * hi);
}

}  // namespace

std::vector<CriticalPoint> find_critical_points(const FiberMap& fiber, double t_min, double t_max, int samples,
                                                const RootOptions& options) {
  if (!(t_min > 0.0) || !(t_max > t_min)) throw InvalidArgument("fiber range needs 0 < t_min < t_max");
  if (samples < 2) throw InvalidArgument("fiber scan needs at least two samples");
  const double log_ratio = std::log(t_max / t_min);
  auto t_at = [&](int i) {
    return i == samples - 1 ? t_max : t_min * std::exp(log_ratio * i / static_cast<double>(samples - 1));
  };

  std::vector<CriticalPoint> roots;
  double t_prev = t_at(0);
  double s_prev = fiber.slope(t_prev);
  auto push = [&](double t) {
    roots.push_back({t, fiber.slope(t), fiber.curvature(t), classify_curvature(fiber, t)});
  };
  if (s_prev == 0.0) push(t_prev);
  for (int i = 1; i < samples; ++i) {
    const double t = t_at(i);
    const double s = fiber.slope(t);
    if (s == 0.0)
      push(t);
    else if (s_prev != 0.0 && (s < 0.0) != (s_prev < 0.0))
      push(refine_root(fiber, t_prev, t, s_prev, s, options));
    t_prev = t;
    s_prev = s;
  }
  return roots;
}

FiberProfile fiber_profile(const GridFunction& u, const ProblemData& data, double t_min, double t_max,
                           int n_samples) {
  require_admissible(u, "fiber_profile");
  if (n_samples < 16) throw InvalidArgument("fiber profile needs at least 16 samples");
  const FiberMap fiber(u, data);
  FiberProfile out{u, {}, {}, {}, {}, {}, false};
  out.critical_points = find_critical_points(fiber, t_min, t_max, n_samples);
  out.bracket_found = !out.critical_points.empty();
  const double log_ratio = std::log(t_max / t_min);
  for (int i = 0; i < n_samples; ++i) {
    const double t = i == n_samples - 1 ? t_max : t_min * std::exp(log_ratio * i / static_cast<double>(n_samples - 1));
    out.t_samples.push_back(t);
    out.phi.push_back(fiber.value(t));
    out.dphi.push_back(fiber.slope(t));
    out.ddphi.push_back(fiber.curvature(t));
  }
  return out;
}

double nehari_reduced_energy(const GridFunction& u, const ProblemData& data) {
  const double e = energy(u, data).total;
  return e - nehari_residual(u, data) / data.extrema().q_minus;
}

double coercivity_lower_bound(double s, double grad_norm, const ProblemData& data, const EmbeddingConstants& c) {
  const auto& ex = data.extrema();
  const double alpha = 1.0 / ex.p_plus - 1.0 / ex.q_minus;
  const double beta = data.lambda() * c.c_d_minus * (1.0 / (1.0 - ex.delta_plus) - 1.0 / ex.q_minus);
  return alpha * std::pow(s * grad_norm, ex.p_minus) - beta * std::pow(s, 1.0 - ex.delta_minus);
}

double coercivity_radius(double grad_norm, const ProblemData& data, const EmbeddingConstants& c, double level) {
  if (!(grad_norm > 0.0)) throw InvalidArgument("coercivity radius needs a nonzero gradient norm");
  const auto& ex = data.extrema();
  const double s0 = std::max(1.0, 1.0 / grad_norm);
  auto bound = [&](double s) { return coercivity_lower_bound(s, grad_norm, data, c); };

  // The bound decreases then increases (p^- > 1 - delta^-); locate its minimiser.
  const double alpha = 1.0 / ex.p_plus - 1.0 / ex.q_minus;
  const double beta = data.lambda() * c.c_d_minus * (1.0 / (1.0 - ex.delta_plus) - 1.0 / ex.q_minus);
  double s_turn = 0.0;
  if (beta > 0.0) {
    const double k = (beta * (1.0 - ex.delta_minus)) / (alpha * ex.p_minus * std::pow(grad_norm, ex.p_minus));
    s_turn = std::pow(k, 1.0 / (ex.p_minus - 1.0 + ex.delta_minus));
  }
  double lo = std::max(s0, s_turn);
  if (bound(lo) > level) return s0 < s_turn ? (bound(s0) > level ? s0 : lo) : lo;

  double hi = 2.0 * lo;
  while (!(bound(hi) > level)) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NonConvergence("coercivity radius is unbounded");
  }
  for (int i = 0; i < 200 && hi / lo - 1.0 > 1e-12; ++i) {
    const double mid = std::sqrt(lo * hi);
    (bound(mid) > level ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace pxlap
