#include "pxlap/vexp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pxlap/error.hpp"

namespace pxlap {

GridFunction::GridFunction(std::shared_ptr<const Mesh> mesh, std::vector<double> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (!mesh_) throw InvalidArgument("grid function needs a mesh");
  if (values_.size() != mesh_->num_vertices())
    throw InvalidArgument("grid function has " + std::to_string(values_.size()) + " values for " +
                          std::to_string(mesh_->num_vertices()) + " vertices");
  for (double v : values_)
    if (!std::isfinite(v)) throw InvalidArgument("grid function has a non-finite nodal value");
  for (std::size_t i : mesh_->boundary_vertices()) values_[i] = 0.0;
}

GridFunction GridFunction::zero(std::shared_ptr<const Mesh> mesh) {
  const auto n = mesh->num_vertices();
  return GridFunction(std::move(mesh), std::vector<double>(n, 0.0));
}

GridFunction GridFunction::interpolate(std::shared_ptr<const Mesh> mesh,
                                       const std::function<double(const Point&)>& f) {
  std::vector<double> values;
  values.reserve(mesh->num_vertices());
  for (const auto& v : mesh->vertices()) values.push_back(f(v));
  return GridFunction(std::move(mesh), std::move(values));
}

GridFunction GridFunction::scaled(double s) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= s;
  return GridFunction(mesh_, std::move(v));
}

GridFunction GridFunction::positive_part() const {
  std::vector<double> v(values_);
  for (double& x : v) x = std::max(x, 0.0);
  return GridFunction(mesh_, std::move(v));
}

bool GridFunction::is_zero() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

bool GridFunction::is_nonnegative() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v >= 0.0; });
}

double GridFunction::sup_norm() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double GridFunction::mean_positive() const noexcept {
  double sum = 0.0;
  std::size_t count = 0;
  for (double v : values_) {
    if (v > 0.0) {
      sum += v;
      ++count;
    }
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

std::vector<double> GridFunction::centroid_values() const {
  const std::size_t k = mesh_->nodes_per_element();
  const double inv = 1.0 / static_cast<double>(k);
  std::vector<double> out;
  out.reserve(mesh_->num_elements());
  for (const auto& el : mesh_->elements()) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += values_[el[j]];
    out.push_back(s * inv);
  }
  return out;
}

Point GridFunction::element_gradient(std::size_t e) const {
  const auto& el = mesh_->elements()[e];
  const auto& g = mesh_->basis_gradients(e);
  Point out;
  for (std::size_t j = 0; j < mesh_->nodes_per_element(); ++j) {
    out.x += values_[el[j]] * g[j].x;
    out.y += values_[el[j]] * g[j].y;
  }
  return out;
}

std::vector<double> GridFunction::gradient_magnitudes() const {
  std::vector<double> out;
  out.reserve(mesh_->num_elements());
  for (std::size_t e = 0; e < mesh_->num_elements(); ++e) {
    const Point g = element_gradient(e);
    out.push_back(std::hypot(g.x, g.y));
  }
  return out;
}

GridFunction operator-(const GridFunction& u, const GridFunction& v) {
  if (u.mesh_ptr() != v.mesh_ptr()) throw InvalidArgument("grid functions live on different meshes");
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = u[i] - v[i];
  return GridFunction(u.mesh_ptr(), std::move(out));
}

namespace {

std::vector<double> magnitudes(const GridFunction& u, bool use_gradient) {
  if (use_gradient) return u.gradient_magnitudes();
  auto w = u.centroid_values();
  for (double& x : w) x = std::abs(x);
  return w;
}

void check_exponents(std::span<const double> exponent_at, std::size_t elements) {
  if (exponent_at.size() != elements) throw InvalidArgument("exponent sample count does not match element count");
  for (double p : exponent_at)
    if (!(p > 1.0)) throw InvalidArgument("modular exponent must exceed 1");
}

double modular_of_samples(std::span<const double> measures, std::span<const double> w,
                          std::span<const double> exponent_at, double scale) {
  double sum = 0.0;
  for (std::size_t e = 0; e < w.size(); ++e)
    if (w[e] != 0.0) sum += measures[e] * std::pow(w[e] / scale, exponent_at[e]);
  return sum;
}

}  // namespace

double modular(const GridFunction& u, std::span<const double> exponent_at, bool use_gradient) {
  check_exponents(exponent_at, u.mesh().num_elements());
  const auto w = magnitudes(u, use_gradient);
  return modular_of_samples(u.mesh().element_measures(), w, exponent_at, 1.0);
}

double modular(const GridFunction& u, const FieldSpec& exponent, bool use_gradient) {
  const auto p = sample_at_centroids(exponent, u.mesh());
  return modular(u, p, use_gradient);
}

double luxemburg_norm_of_samples(std::span<const double> measures, std::span<const double> w,
                                 std::span<const double> exponent_at, const LuxemburgOptions& options) {
  const bool nonzero = std::any_of(w.begin(), w.end(), [](double x) { return x != 0.0; });
  if (!nonzero) return 0.0;

  const double p_min = *std::min_element(exponent_at.begin(), exponent_at.end());
  auto f = [&](double s) { return modular_of_samples(measures, w, exponent_at, s); };

  const double rho = f(1.0);
  double guess = (rho > 0.0 && std::isfinite(rho)) ? std::pow(rho, 1.0 / p_min)
                                                   : *std::max_element(w.begin(), w.end());
  double lo = 1e-12 * guess;
  double hi = 1e12 * guess;
  double f_lo = f(lo);
  double f_hi = f(hi);
  for (int k = 0; k < 20 && f_lo < 1.0; ++k) f_lo = f(lo *= 1e-6);
  for (int k = 0; k < 20 && f_hi > 1.0; ++k) f_hi = f(hi *= 1e6);
  if (f_lo < 1.0 || f_hi > 1.0) throw NonConvergence("could not bracket the Luxemburg norm");

  // s -> modular(u/s) is continuous and strictly decreasing, so bisection in log(s) is safe.
  int steps = 0;
  while (hi / lo - 1.0 > options.relative_tolerance) {
    if (++steps > options.max_bisection_steps)
      throw NonConvergence("Luxemburg bisection exceeded " + std::to_string(options.max_bisection_steps) + " steps");
    const double mid = std::sqrt(lo * hi);
    const double f_mid = f(mid);
    if (f_mid > 1.0) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
  }

  // log(modular) is nearly linear in log(s) inside the final bracket (exactly so for
  // constant exponents); interpolate the crossing rather than return the midpoint.
  const double g_lo = std::log(f_lo);
  const double g_hi = std::log(f_hi);
  if (!std::isfinite(g_lo) || !std::isfinite(g_hi) || g_lo == g_hi) return std::sqrt(lo * hi);
  const double x_lo = std::log(lo);
  const double x_hi = std::log(hi);
  const double x = x_lo + g_lo * (x_hi - x_lo) / (g_lo - g_hi);
  return std::clamp(std::exp(x), lo, hi);
}

double luxemburg_norm(const GridFunction& u, std::span<const double> exponent_at, bool use_gradient,
                      const LuxemburgOptions& options) {
  check_exponents(exponent_at, u.mesh().num_elements());
  const auto w = magnitudes(u, use_gradient);
  return luxemburg_norm_of_samples(u.mesh().element_measures(), w, exponent_at, options);
}

double luxemburg_norm(const GridFunction& u, const FieldSpec& exponent, bool use_gradient,
                      const LuxemburgOptions& options) {
  const auto p = sample_at_centroids(exponent, u.mesh());
  return luxemburg_norm(u, p, use_gradient, options);
}

double sobolev_norm(const GridFunction& u, std::span<const double> p_at) {
  return luxemburg_norm(u, p_at, false) + luxemburg_norm(u, p_at, true);
}

double sobolev_norm(const GridFunction& u, const FieldSpec& p) {
  const auto p_at = sample_at_centroids(p, u.mesh());
  return sobolev_norm(u, p_at);
}

ModularRelationReport check_modular_relations(const GridFunction& u, const FieldSpec& p) {
  if (u.is_zero()) throw InvalidArgument("modular relations need a nonzero function");
  const auto p_at = sample_at_centroids(p, u.mesh());
  ModularRelationReport r;
  r.norm = luxemburg_norm(u, p_at, false);
  r.modular = modular(u, p_at, false);
  r.exponent_min = *std::min_element(p_at.begin(), p_at.end());
  r.exponent_max = *std::max_element(p_at.begin(), p_at.end());

  constexpr double unit_band = 1e-9;
  if (std::abs(r.norm - 1.0) <= unit_band) {
    r.clause = ModularClause::norm_equals_one;
    r.lower = std::min(std::pow(r.norm, r.exponent_min), std::pow(r.norm, r.exponent_max));
    r.upper = std::max(std::pow(r.norm, r.exponent_min), std::pow(r.norm, r.exponent_max));
  } else if (r.norm > 1.0) {
    r.clause = ModularClause::norm_above_one;
    r.lower = std::pow(r.norm, r.exponent_min);
    r.upper = std::pow(r.norm, r.exponent_max);
  } else {
    r.clause = ModularClause::norm_below_one;
    r.lower = std::pow(r.norm, r.exponent_max);
    r.upper = std::pow(r.norm, r.exponent_min);
  }
  // Slack covers the root-finder's relative error raised to the exponent.
  constexpr double slack = 1e-9;
  r.holds = r.lower * (1.0 - slack) <= r.modular && r.modular <= r.upper * (1.0 + slack);
  return r;
}

HolderReport holder_check(const GridFunction& u, const GridFunction& v, std::span<const double> p_at) {
  const auto& mesh = u.mesh();
  std::vector<double> conj(p_at.size());
  for (std::size_t e = 0; e < p_at.size(); ++e) conj[e] = p_at[e] / (p_at[e] - 1.0);

  const auto uc = u.centroid_values();
  const auto vc = v.centroid_values();
  double integral = 0.0;
  for (std::size_t e = 0; e < uc.size(); ++e) integral += mesh.element_measures()[e] * uc[e] * vc[e];

  const double p_min = *std::min_element(p_at.begin(), p_at.end());
  const double c_min = *std::min_element(conj.begin(), conj.end());
  HolderReport r;
  r.lhs = std::abs(integral);
  r.rhs = (1.0 / p_min + 1.0 / c_min) * luxemburg_norm(u, p_at, false) * luxemburg_norm(v, conj, false);
  r.holds = r.lhs <= r.rhs * (1.0 + 1e-12);
  return r;
}

double weighted_q_integral(const GridFunction& u, const ProblemData& data) {
  const auto uc = u.centroid_values();
  const auto& m = data.mesh().element_measures();
  double sum = 0.0;
  for (std::size_t e = 0; e < uc.size(); ++e)
    if (uc[e] != 0.0) sum += m[e] * data.a_at()[e] * std::pow(std::abs(uc[e]), data.q_at()[e]);
  return sum;
}

double weighted_singular_integral(const GridFunction& u, const ProblemData& data) {
  const auto uc = u.centroid_values();
  const auto& m = data.mesh().element_measures();
  double sum = 0.0;
  for (std::size_t e = 0; e < uc.size(); ++e)
    if (uc[e] != 0.0) sum += m[e] * data.b_at()[e] * std::pow(std::abs(uc[e]), 1.0 - data.delta_at()[e]);
  return sum;
}

std::size_t mode_count(int dimension) { return dimension == 1 ? 6 : 9; }

GridFunction mode_direction(std::shared_ptr<const Mesh> mesh, std::span<const double> coefficients) {
  const std::size_t modes = mode_count(mesh->dimension());
  if (coefficients.size() != modes) throw InvalidArgument("wrong number of mode coefficients");
  const Box box = mesh->extent();
  const double pi = std::numbers::pi;
  std::vector<double> values(mesh->num_vertices(), 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double xi = (mesh->vertices()[i].x - box.x0) / (box.x1 - box.x0);
    double s = 0.0;
    if (mesh->dimension() == 1) {
      for (std::size_t k = 0; k < modes; ++k) s += coefficients[k] * std::sin((k + 1) * pi * xi);
    } else {
      const double eta = (mesh->vertices()[i].y - box.y0) / (box.y1 - box.y0);
      for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t l = 0; l < 3; ++l)
          s += coefficients[3 * k + l] * std::sin((k + 1) * pi * xi) * std::sin((l + 1) * pi * eta);
    }
    values[i] = s;
  }
  return GridFunction(std::move(mesh), std::move(values));
}

namespace {

std::vector<double> random_coefficients(int dimension, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> c(mode_count(dimension));
  if (dimension == 1) {
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = gauss(rng) / static_cast<double>(k + 1);
  } else {
    for (std::size_t k = 0; k < 3; ++k)
      for (std::size_t l = 0; l < 3; ++l) c[3 * k + l] = gauss(rng) / static_cast<double>(k + l + 1);
  }
  return c;
}

}  // namespace

GridFunction random_direction(std::shared_ptr<const Mesh> mesh, std::mt19937_64& rng, bool nonnegative) {
  const auto c = random_coefficients(mesh->dimension(), rng);
  auto u = mode_direction(std::move(mesh), c);
  if (!nonnegative) return u;
  std::vector<double> values(u.values().begin(), u.values().end());
  for (double& v : values) v = std::abs(v);
  return GridFunction(u.mesh_ptr(), std::move(values));
}

GridFunction eigen_surrogate(std::shared_ptr<const Mesh> mesh) {
  const Box box = mesh->extent();
  const int dim = mesh->dimension();
  return GridFunction::interpolate(std::move(mesh), [box, dim](const Point& x) {
    double v = std::sin(std::numbers::pi * (x.x - box.x0) / (box.x1 - box.x0));
    if (dim == 2) v *= std::sin(std::numbers::pi * (x.y - box.y0) / (box.y1 - box.y0));
    return v;
  });
}

namespace {

constexpr double kAboveScales[] = {1.0 + 1e-6, 2.0, 4.0};
constexpr double kBelowScales[] = {1.0 - 1e-6, 0.5, 0.25};

struct ScaledIntegrals {
  const ProblemData& data;
  std::vector<double> uc;  // centroid values of the unit-norm direction

  double q_term(double r) const {
    double sum = 0.0;
    for (std::size_t e = 0; e < uc.size(); ++e)
      if (uc[e] != 0.0)
        sum += data.mesh().element_measures()[e] * data.a_at()[e] * std::pow(r * std::abs(uc[e]), data.q_at()[e]);
    return sum;
  }
  double singular_term(double r) const {
    double sum = 0.0;
    for (std::size_t e = 0; e < uc.size(); ++e)
      if (uc[e] != 0.0)
        sum += data.mesh().element_measures()[e] * data.b_at()[e] *
               std::pow(r * std::abs(uc[e]), 1.0 - data.delta_at()[e]);
    return sum;
  }
};

ScaledIntegrals unit_direction(const GridFunction& u, const ProblemData& data) {
  const double norm = sobolev_norm(u, data.p_at());
  if (!(norm > 0.0)) throw InvalidArgument("embedding ratios need a nonzero direction");
  auto uc = u.centroid_values();
  for (double& x : uc) x /= norm;
  return {data, std::move(uc)};
}

}  // namespace

EmbeddingConstants embedding_ratios(const GridFunction& direction, const ProblemData& data) {
  const auto& ex = data.extrema();
  const ScaledIntegrals unit = unit_direction(direction, data);
  EmbeddingConstants c;
  c.sample_count = 1;
  for (double r : kAboveScales) {
    c.c_q_plus = std::max(c.c_q_plus, unit.q_term(r) / std::pow(r, ex.q_plus));
    c.c_d_minus = std::max(c.c_d_minus, unit.singular_term(r) / std::pow(r, 1.0 - ex.delta_minus));
  }
  for (double r : kBelowScales) {
    c.c_q_minus = std::max(c.c_q_minus, unit.q_term(r) / std::pow(r, ex.q_minus));
    c.c_d_plus = std::max(c.c_d_plus, unit.singular_term(r) / std::pow(r, 1.0 - ex.delta_plus));
  }
  return c;
}

namespace {

double& slot(EmbeddingConstants& c, int which) {
  switch (which) {
    case 0: return c.c_q_plus;
    case 1: return c.c_q_minus;
    case 2: return c.c_d_plus;
    default: return c.c_d_minus;
  }
}

// Compass ascent on the mode coefficients for one of the four ratios. The sampled
// maxima of these ratios keep growing slowly with the sample count, so the best
// sample is pushed to its local supremum within the direction family.
double refine_ratio(const ProblemData& data, std::vector<double> c, int which, double start) {
  double best = start;
  double scale = 0.0;
  for (double x : c) scale = std::max(scale, std::abs(x));
  if (!(scale > 0.0)) return best;
  double h = 0.25 * scale;
  for (int sweep = 0; sweep < 400 && h > 1e-4 * scale; ++sweep) {
    bool improved = false;
    for (std::size_t k = 0; k < c.size(); ++k) {
      for (double sign : {1.0, -1.0}) {
        const double old = c[k];
        c[k] = old + sign * h;
        const auto u = mode_direction(data.mesh_ptr(), c);
        double v = -1.0;
        if (!u.is_zero()) {
          auto r = embedding_ratios(u, data);
          v = slot(r, which);
        }
        if (v > best) {
          best = v;
          improved = true;
          break;
        }
        c[k] = old;
      }
    }
    if (!improved) h *= 0.5;
  }
  return best;
}

}  // namespace

EmbeddingConstants estimate_embedding_constants(const ProblemData& data, int samples, std::uint64_t seed) {
  if (samples < 1) throw InvalidArgument("embedding estimation needs at least one sample");
  std::mt19937_64 rng(seed);
  EmbeddingConstants best;
  std::vector<double> best_coefficients[4];
  for (int s = 0; s < samples; ++s) {
    const auto c = random_coefficients(data.mesh().dimension(), rng);
    const auto u = mode_direction(data.mesh_ptr(), c);
    if (u.is_zero()) continue;
    auto r = embedding_ratios(u, data);
    for (int which = 0; which < 4; ++which) {
      if (slot(r, which) > slot(best, which)) {
        slot(best, which) = slot(r, which);
        best_coefficients[which] = c;
      }
    }
  }
  for (int which = 0; which < 4; ++which) {
    if (!best_coefficients[which].empty())
      slot(best, which) = refine_ratio(data, best_coefficients[which], which, slot(best, which));
    slot(best, which) *= kEmbeddingSafetyFactor;
  }
  best.sample_count = samples;
  return best;
}

bool certifies(const EmbeddingConstants& constants, const GridFunction& u, const ProblemData& data) {
  const auto& ex = data.extrema();
  const ScaledIntegrals unit = unit_direction(u, data);
  for (double r : kAboveScales) {
    if (unit.q_term(r) > constants.c_q_plus * std::pow(r, ex.q_plus)) return false;
    if (unit.singular_term(r) > constants.c_d_minus * std::pow(r, 1.0 - ex.delta_minus)) return false;
  }
  for (double r : kBelowScales) {
    if (unit.q_term(r) > constants.c_q_minus * std::pow(r, ex.q_minus)) return false;
    if (unit.singular_term(r) > constants.c_d_plus * std::pow(r, 1.0 - ex.delta_plus)) return false;
  }
  return true;
}

}  // namespace pxlap
